"""2D embeddings of dissimilarity matrices by iterative stress majorization.

Each Guttman transform step minimizes the quadratic majorizer of the raw
stress, so stress is non-increasing iteration to iteration. The reported
stress is the normalized form

    sqrt( sum_{i<k} (d_ik - |x_i - x_k|)^2 / sum_{i<k} d_ik^2 )

and the stopping rule is relative stress decrease below ``tolerance``.
Consecutive proposals are chained by warm-starting from the previous
embedding, which pins down rotation/reflection across frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dissim import DissimilarityMatrix
from .errors import AllZeroDissimilarity, NonFiniteInput
from .ingest import Address
from .rng import SplitMix64, derive_seed

DEFAULT_MAX_ITERATIONS = 300
DEFAULT_TOLERANCE = 1e-6

# fallback jitter radius when the previous embedding has zero spread
_MIN_JITTER = 1e-3


@dataclass(frozen=True)
class MdsConfig:
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class Embedding:
    proposal_id: int
    addresses: tuple[Address, ...]
    coords: np.ndarray  # (n, 2) float64
    stress: float
    iterations_used: int
    seed: int
    stress_path: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=np.float64)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)


def _pairwise_distances(coords: np.ndarray) -> np.ndarray:
    deltas = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((deltas ** 2).sum(axis=2))


def _cells(d: DissimilarityMatrix | np.ndarray) -> np.ndarray:
    return d.cells if isinstance(d, DissimilarityMatrix) else np.asarray(d, dtype=np.float64)


def stress(d: DissimilarityMatrix | np.ndarray, coords: np.ndarray) -> float:
    """Normalized residual stress of coords against the dissimilarities."""
    cells = _cells(d)
    coords = np.asarray(coords, dtype=np.float64)
    if cells.shape[0] != coords.shape[0]:
        raise ValueError("dissimilarity and coordinate row counts differ")
    upper = np.triu_indices(cells.shape[0], k=1)
    denominator = float((cells[upper] ** 2).sum())
    if denominator == 0.0:
        raise AllZeroDissimilarity("all dissimilarities are zero")
    distances = _pairwise_distances(coords)
    numerator = float(((cells[upper] - distances[upper]) ** 2).sum())
    return math.sqrt(numerator / denominator)


def random_init(n: int, seed: int) -> np.ndarray:
    """Deterministic unit-square start: 2n uniforms from SplitMix64(seed)."""
    rng = SplitMix64(seed)
    return np.array([[rng.uniform(), rng.uniform()] for _ in range(n)])


def mds_embed(d: DissimilarityMatrix, init: np.ndarray | None = None,
              config: MdsConfig | None = None) -> Embedding:
    """Embed one dissimilarity matrix in 2D.

    Deterministic given (d, init, config.seed); per-iteration stress is
    non-increasing and recorded in ``stress_path``.
    """
    config = config or MdsConfig()
    cells = d.cells
    n = cells.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points")
    if not np.all(np.isfinite(cells)):
        raise NonFiniteInput("dissimilarity matrix contains non-finite values")
    if init is None:
        coords = random_init(n, config.seed)
    else:
        coords = np.array(init, dtype=np.float64)
        if coords.shape != (n, 2):
            raise ValueError(f"init shape {coords.shape} != ({n}, 2)")
        if not np.all(np.isfinite(coords)):
            raise NonFiniteInput("init coordinates contain non-finite values")
    current = stress(cells, coords)
    path = [current]
    iterations = 0
    for iteration in range(1, config.max_iterations + 1):
        distances = _pairwise_distances(coords)
        positive = distances > 0
        ratio = np.where(positive, cells / np.where(positive, distances, 1.0), 0.0)
        b = -ratio
        np.fill_diagonal(b, 0.0)
        np.fill_diagonal(b, -b.sum(axis=1))
        coords = (b @ coords) / n
        new = stress(cells, coords)
        path.append(new)
        iterations = iteration
        if current - new <= config.tolerance * current:
            break
        current = new
    return Embedding(
        proposal_id=d.proposal_id,
        addresses=d.addresses,
        coords=coords,
        stress=path[-1],
        iterations_used=iterations,
        seed=config.seed,
        stress_path=tuple(path),
    )


def warm_start(previous: Embedding | None, current_addresses: Sequence[Address],
               seed: int) -> np.ndarray:
    """Initial coordinates for the next proposal in the chain.

    Addresses seen before keep their coordinates; new addresses land near the
    previous centroid with a deterministic per-address jitter of radius at
    most 1% of the previous coordinate spread. Without a previous embedding
    all points come from :func:`random_init`.
    """
    if previous is None:
        return random_init(len(current_addresses), seed)
    index = {address: i for i, address in enumerate(previous.addresses)}
    centroid = previous.coords.mean(axis=0)
    spread = float(np.ptp(previous.coords, axis=0).max())
    radius = 0.01 * spread if spread > 0 else _MIN_JITTER
    coords = np.empty((len(current_addresses), 2))
    for i, address in enumerate(current_addresses):
        if address in index:
            coords[i] = previous.coords[index[address]]
        else:
            rng = SplitMix64(derive_seed(seed, "warm-start", address))
            angle = 2.0 * math.pi * rng.uniform()
            rho = radius * rng.uniform()
            coords[i] = centroid + rho * np.array([math.cos(angle), math.sin(angle)])
    return coords
