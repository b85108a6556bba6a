"""Active-voter windows and per-proposal pairwise dissimilarity matrices.

For the proposal at position j (1-based over surviving columns), the window
is the trailing ``window_size`` positions truncated at the start of history.
An address is active when its valid-vote fraction over the window reaches
the participation threshold (inclusive). Pairwise dissimilarity is the
fraction of co-voted window proposals on which two addresses opposed each
other; pairs with no shared valid votes score 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyActiveSet, IndexOutOfRange
from .ingest import Address
from .matrix import VoterMatrix

DEFAULT_WINDOW_SIZE = 10
DEFAULT_PARTICIPATION_THRESHOLD = 0.40


@dataclass(frozen=True)
class WindowSpec:
    window_size: int = DEFAULT_WINDOW_SIZE
    participation_threshold: float = DEFAULT_PARTICIPATION_THRESHOLD

    def __post_init__(self) -> None:
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if not 0.0 <= self.participation_threshold <= 1.0:
            raise ValueError("participation_threshold must be in [0, 1]")


@dataclass(frozen=True)
class ActiveSet:
    """Addresses meeting the participation threshold for one proposal."""

    proposal_id: int
    window: tuple[int, ...]
    addresses: tuple[Address, ...]
    participation: tuple[float, ...]


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric zero-diagonal matrix over the active addresses."""

    proposal_id: int
    addresses: tuple[Address, ...]
    cells: np.ndarray  # (n, n) float64

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=np.float64)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)


def sliding_window(proposal_ids: Sequence[int], j: int, w: int) -> list[int]:
    """Trailing w proposal ids ending at position j (1-based)."""
    if not 1 <= j <= len(proposal_ids):
        raise IndexOutOfRange(f"position {j} outside 1..{len(proposal_ids)}")
    if w < 1:
        raise ValueError("window size must be >= 1")
    return list(proposal_ids[max(0, j - w):j])


def participation(matrix: VoterMatrix, address: Address,
                  window: Sequence[int]) -> float:
    """Fraction of window proposals where the address holds a valid vote."""
    if not window:
        raise ValueError("window must be non-empty")
    row = matrix.cells[matrix.row_index(address)]
    cols = [matrix.col_index(pid) for pid in window]
    return float((row[cols] >= 0).mean())


def active_set(matrix: VoterMatrix, j: int, spec: WindowSpec) -> ActiveSet:
    """Active addresses at position j; the first proposal is never analyzable."""
    if not 2 <= j <= matrix.m:
        raise IndexOutOfRange(f"position {j} outside analyzable range 2..{matrix.m}")
    window = sliding_window(matrix.proposal_ids, j, spec.window_size)
    cols = [matrix.col_index(pid) for pid in window]
    fractions = (matrix.cells[:, cols] >= 0).mean(axis=1)
    keep = np.flatnonzero(fractions >= spec.participation_threshold)
    if len(keep) < 2:
        raise EmptyActiveSet(
            f"proposal {matrix.proposal_ids[j - 1]}: {len(keep)} active addresses")
    return ActiveSet(
        proposal_id=matrix.proposal_ids[j - 1],
        window=tuple(window),
        addresses=tuple(matrix.addresses[i] for i in keep),
        participation=tuple(float(fractions[i]) for i in keep),
    )


def dissimilarity_matrix(matrix: VoterMatrix,
                         active: ActiveSet) -> DissimilarityMatrix:
    """Pairwise opposition fractions over the active set's window."""
    if len(active.addresses) < 2:
        raise EmptyActiveSet("need at least 2 active addresses")
    rows = [matrix.row_index(a) for a in active.addresses]
    cols = [matrix.col_index(p) for p in active.window]
    sub = matrix.cells[np.ix_(rows, cols)]
    yes = (sub == 1).astype(np.float64)
    no = (sub == 0).astype(np.float64)
    valid = yes + no
    shared = valid @ valid.T
    opposing = yes @ no.T + no @ yes.T
    cells = np.where(shared > 0, opposing / np.where(shared > 0, shared, 1.0), 1.0)
    np.fill_diagonal(cells, 0.0)
    return DissimilarityMatrix(active.proposal_id, active.addresses, cells)


def to_csv(d: DissimilarityMatrix, path: str | Path) -> None:
    """Square CSV with the address list as both header row and first column."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["address", *d.addresses])
        for i, address in enumerate(d.addresses):
            writer.writerow([address, *(repr(float(v)) for v in d.cells[i])])
