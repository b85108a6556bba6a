"""Community friction metrics: per-proposal disagreement and its rolling mean.

Disagreement is the fraction of valid voters opposing the winning outcome,
so it lives in [0, 0.5]; a tie counts as 0.5 (the label-symmetric choice).
Category cut points default to: unanimous (exactly 0), low (0, 0.20),
medium [0.20, 0.40), high [0.40, 0.50].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

from .errors import EmptyInput
from .matrix import VoterMatrix, column_votes

CATEGORIES = ("unanimous", "low", "medium", "high")

DEFAULT_LOW_CUT = 0.20
DEFAULT_HIGH_CUT = 0.40
DEFAULT_WINDOW = 10
DEFAULT_SHARE_CUTOFF = 0.20
DEFAULT_ROLLING_CUTOFF = 0.15


@dataclass(frozen=True)
class DisagreementRecord:
    proposal_id: int
    disagreement: float
    category: str


@dataclass(frozen=True)
class FrictionReport:
    dao_name: str
    records: tuple[DisagreementRecord, ...]
    rolling: tuple[tuple[int, float], ...]
    category_shares: Mapping[str, float]
    flagged: bool


def categorize(disagreement: float, low_cut: float = DEFAULT_LOW_CUT,
               high_cut: float = DEFAULT_HIGH_CUT) -> str:
    if not 0.0 <= disagreement <= 0.5:
        raise ValueError(f"disagreement {disagreement} outside [0, 0.5]")
    if disagreement == 0.0:
        return "unanimous"
    if disagreement < low_cut:
        return "low"
    if disagreement < high_cut:
        return "medium"
    return "high"


def static_disagreement(matrix: VoterMatrix, proposal_id: int,
                        low_cut: float = DEFAULT_LOW_CUT,
                        high_cut: float = DEFAULT_HIGH_CUT) -> DisagreementRecord:
    """Fraction of the minority side among valid votes on one proposal."""
    yes, no, _ = column_votes(matrix, proposal_id)
    disagreement = min(yes, no) / (yes + no)
    return DisagreementRecord(proposal_id, disagreement,
                              categorize(disagreement, low_cut, high_cut))


def rolling_disagreement(records: Sequence[DisagreementRecord],
                         window: int = DEFAULT_WINDOW) -> list[tuple[int, float]]:
    """Trailing-window mean, moving forward one proposal at a time.

    Positions earlier than ``window`` average whatever history exists, so the
    output has one entry per input record.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    out: list[tuple[int, float]] = []
    for j, record in enumerate(records, start=1):
        tail = records[max(0, j - window):j]
        mean = sum(r.disagreement for r in tail) / len(tail)
        out.append((record.proposal_id, mean))
    return out


def category_shares(records: Sequence[DisagreementRecord]) -> dict[str, float]:
    if not records:
        raise EmptyInput("no disagreement records")
    counts = {category: 0 for category in CATEGORIES}
    for record in records:
        counts[record.category] += 1
    return {category: counts[category] / len(records) for category in CATEGORIES}


def flag_dao(report: FrictionReport,
             share_cutoff: float = DEFAULT_SHARE_CUTOFF,
             rolling_cutoff: float = DEFAULT_ROLLING_CUTOFF,
             rolling_stat: str = "max") -> bool:
    """True iff medium+high share exceeds ``share_cutoff`` and the rolling
    series exceeds ``rolling_cutoff`` (by max, or by mean when configured)."""
    if rolling_stat not in ("max", "mean"):
        raise ValueError(f"rolling_stat must be 'max' or 'mean', got {rolling_stat!r}")
    contentious = report.category_shares["medium"] + report.category_shares["high"]
    values = [value for _, value in report.rolling]
    if not values:
        return False
    stat = max(values) if rolling_stat == "max" else sum(values) / len(values)
    return contentious > share_cutoff and stat > rolling_cutoff


def build_friction_report(matrix: VoterMatrix, dao_name: str,
                          window: int = DEFAULT_WINDOW,
                          low_cut: float = DEFAULT_LOW_CUT,
                          high_cut: float = DEFAULT_HIGH_CUT,
                          share_cutoff: float = DEFAULT_SHARE_CUTOFF,
                          rolling_cutoff: float = DEFAULT_ROLLING_CUTOFF,
                          rolling_stat: str = "max") -> FrictionReport:
    records = tuple(static_disagreement(matrix, pid, low_cut, high_cut)
                    for pid in matrix.proposal_ids)
    report = FrictionReport(
        dao_name=dao_name,
        records=records,
        rolling=tuple(rolling_disagreement(records, window)),
        category_shares=category_shares(records),
        flagged=False,
    )
    return replace(report, flagged=flag_dao(report, share_cutoff,
                                            rolling_cutoff, rolling_stat))


def to_csv(report: FrictionReport, path: str | Path) -> None:
    """Records and the rolling series, one row per proposal."""
    rolling = dict(report.rolling)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["proposal_id", "disagreement", "category", "rolling_mean"])
        for record in report.records:
            writer.writerow([record.proposal_id, repr(record.disagreement),
                             record.category, repr(rolling[record.proposal_id])])
