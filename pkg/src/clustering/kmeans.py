"""
Two-way k-means split (Lloyd iteration) on a numeric matrix.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from src.core.errors import DegenerateSplitError
from src.core.rng import STREAM_SPLITTER, RngStream

logger = logging.getLogger(__name__)

# Rows considered when searching for the farthest seed pair
SEED_SAMPLE = 256


@dataclass(frozen=True)
class BinarySplit:
    """
    Result of a two-way split of ``n`` rows.

    ``left``/``right`` are sorted positions into the rows that were split; the
    side containing row 0 is always ``left``. ``objective_trace`` holds the
    objective (within-SS for k-means, Hamming cost for k-modes) after every
    centroid update since the last (re)seeding.
    """

    left: np.ndarray
    right: np.ndarray
    centroids: np.ndarray
    objective_trace: List[float] = field(default_factory=list)
    sweeps: int = 0
    reseeded: bool = False

    def sides(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.left, self.right


def as_stream(seed: Union[int, RngStream]) -> RngStream:
    if isinstance(seed, RngStream):
        return seed
    return RngStream(seed=seed, stream_id=STREAM_SPLITTER)


def sq_distances(rows: np.ndarray, point: np.ndarray) -> np.ndarray:
    diff = rows - point
    return np.einsum("ij,ij->i", diff, diff)


def within_ss(rows: np.ndarray, assignment: np.ndarray) -> float:
    """Total within-cluster sum of squares of a 0/1 assignment."""
    total = 0.0
    for side in (0, 1):
        members = rows[assignment == side]
        if len(members):
            total += float(((members - members.mean(axis=0)) ** 2).sum())
    return total


def all_identical(rows: np.ndarray) -> bool:
    return bool(np.all(rows == rows[0]))


def _double_sweep(rows: np.ndarray) -> Tuple[int, int]:
    """Approximate most distant pair: farthest from row 0, then farthest from that."""
    a = int(np.argmax(sq_distances(rows, rows[0])))
    b = int(np.argmax(sq_distances(rows, rows[a])))
    return a, b


def _farthest_pair(rows: np.ndarray, rng: np.random.Generator) -> Tuple[int, int]:
    n = len(rows)
    if n > SEED_SAMPLE:
        idx = np.sort(rng.choice(n, size=SEED_SAMPLE, replace=False))
    else:
        idx = np.arange(n)
    pts = rows[idx]
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    i, j = np.unravel_index(int(np.argmax(d2)), d2.shape)
    if d2[i, j] > 0:
        return int(idx[i]), int(idx[j])
    # sampled rows all coincide; fall back to the whole subset
    return _double_sweep(rows)


def _canonical(assignment: np.ndarray, centroids: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if assignment[0] == 1:
        return 1 - assignment, centroids[::-1].copy()
    return assignment, centroids


def split_two_kmeans(
    rows: np.ndarray,
    seed: Union[int, RngStream] = 0,
    max_sweeps: int = 100,
) -> BinarySplit:
    """
    Split ``rows`` into two groups with Lloyd's algorithm.

    Seeds are the farthest pair among (at most) 256 sampled rows. A row joins
    side 1 only when strictly closer to centroid 1. Iteration stops when the
    assignment no longer changes or after ``max_sweeps`` sweeps. If an update
    empties a side, the centroids are re-seeded once from the most distant
    members; a second empty side raises ``DegenerateSplitError``.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or len(rows) < 2:
        raise DegenerateSplitError(f"need at least 2 rows to split, got {len(rows)}")
    if all_identical(rows):
        raise DegenerateSplitError("all rows identical; no split possible", n=len(rows))

    rng = as_stream(seed).generator()
    a, b = _farthest_pair(rows, rng)
    centroids = np.vstack([rows[a], rows[b]])

    assignment = None
    trace: List[float] = []
    reseeded = False
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        d0 = sq_distances(rows, centroids[0])
        d1 = sq_distances(rows, centroids[1])
        new = (d1 < d0).astype(int)
        if new.all() or not new.any():
            if reseeded:
                raise DegenerateSplitError("k-means update emptied a side twice", n=len(rows))
            reseeded = True
            a, b = _double_sweep(rows)
            centroids = np.vstack([rows[a], rows[b]])
            assignment = None
            trace = []
            logger.debug("[SPLIT] k-means re-seeded after an empty side (n=%d)", len(rows))
            continue
        if assignment is not None and np.array_equal(new, assignment):
            break
        assignment = new
        centroids = np.vstack([rows[assignment == 0].mean(axis=0), rows[assignment == 1].mean(axis=0)])
        trace.append(within_ss(rows, assignment))

    if assignment is None:
        raise DegenerateSplitError("split did not settle within the sweep cap", n=len(rows))
    assignment, centroids = _canonical(assignment, centroids)
    return BinarySplit(
        left=np.flatnonzero(assignment == 0),
        right=np.flatnonzero(assignment == 1),
        centroids=centroids,
        objective_trace=trace,
        sweeps=sweeps,
        reseeded=reseeded,
    )
