"""Shared fixtures and small builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from forkcast import VoteEvent, build_voter_matrix
from forkcast.matrix import VoterMatrix


def addr(index: int) -> str:
    """Deterministic syntactically-valid address for test data."""
    return f"0x{index:040x}"


def make_matrix(rows: list[list[int]], proposal_ids: list[int] | None = None) -> VoterMatrix:
    """Matrix from literal rows; addresses addr(1..n) are already sorted."""
    n = len(rows)
    m = len(rows[0]) if rows else 0
    pids = proposal_ids or list(range(1, m + 1))
    return VoterMatrix(tuple(addr(i) for i in range(1, n + 1)), tuple(pids),
                       np.asarray(rows, dtype=np.int8))


def events_from_rows(rows: list[list[int]],
                     proposal_ids: list[int] | None = None) -> list[VoteEvent]:
    """VoteEvents reproducing literal matrix rows (entries in {1, 0, -1})."""
    pids = proposal_ids or list(range(1, len(rows[0]) + 1))
    events = []
    for i, row in enumerate(rows, start=1):
        for j, value in enumerate(row):
            if value >= 0:
                events.append(VoteEvent(addr(i), pids[j], value, pids[j], i))
    return events


@pytest.fixture(scope="session")
def planted():
    """The bundled planted-partition scenario (events, ground truth)."""
    from forkcast import planted_two_bloc_events

    return planted_two_bloc_events(seed=0)


@pytest.fixture(scope="session")
def planted_matrix(planted):
    events, _ = planted
    return build_voter_matrix(events)
