"""
Two-way k-modes split for categorical/binary rows.

Rows are integer category codes. Distance is Hamming (number of differing
attributes); a side's mode takes, per column, the most frequent code with ties
resolved to the smallest code. Initial modes follow Cao's density/distance
method: the densest row first, then the row maximising distance × density.
"""
import logging
from typing import List, Tuple, Union

import numpy as np

from src.core.errors import DegenerateSplitError
from src.core.rng import RngStream

from .kmeans import BinarySplit, all_identical

logger = logging.getLogger(__name__)


def hamming(rows: np.ndarray, mode: np.ndarray) -> np.ndarray:
    """Hamming distance of every row (or a single row) to ``mode``."""
    return (np.asarray(rows) != np.asarray(mode)).sum(axis=-1)


def column_modes(rows: np.ndarray) -> np.ndarray:
    return np.array([np.bincount(rows[:, j]).argmax() for j in range(rows.shape[1])], dtype=int)


def hamming_cost(rows: np.ndarray, assignment: np.ndarray, modes: np.ndarray) -> float:
    return float(sum(hamming(rows[assignment == s], modes[s]).sum() for s in (0, 1)))


def cao_densities(rows: np.ndarray) -> np.ndarray:
    """Dens(x_i) = Σ_j |{x : x_j = x_ij}| / (d·n)."""
    n, d = rows.shape
    freq = np.zeros((n, d), dtype=float)
    for j in range(d):
        counts = np.bincount(rows[:, j])
        freq[:, j] = counts[rows[:, j]]
    return freq.sum(axis=1) / (d * n)


def cao_seeds(rows: np.ndarray) -> Tuple[int, int]:
    dens = cao_densities(rows)
    first = int(np.argmax(dens))
    second = int(np.argmax(hamming(rows, rows[first]) * dens))
    return first, second


def _double_sweep(rows: np.ndarray) -> Tuple[int, int]:
    a = int(np.argmax(hamming(rows, rows[0])))
    b = int(np.argmax(hamming(rows, rows[a])))
    return a, b


def split_two_kmodes(
    rows: np.ndarray,
    seed: Union[int, RngStream] = 0,
    max_sweeps: int = 100,
) -> BinarySplit:
    """
    Split categorical ``rows`` into two groups (batch Huang mode updates).

    Cao initialisation is deterministic, so ``seed`` only matters for
    interface parity with ``split_two_kmeans``. Convergence, the empty-side
    guard and the side ordering follow the k-means splitter.
    """
    rows = np.asarray(rows)
    if rows.ndim != 2 or len(rows) < 2:
        raise DegenerateSplitError(f"need at least 2 rows to split, got {len(rows)}")
    rows = rows.astype(int)
    if (rows < 0).any():
        raise DegenerateSplitError("k-modes rows must hold nonnegative category codes")
    if all_identical(rows):
        raise DegenerateSplitError("all rows identical; no split possible", n=len(rows))

    a, b = cao_seeds(rows)
    modes = np.vstack([rows[a], rows[b]])

    assignment = None
    trace: List[float] = []
    reseeded = False
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        new = (hamming(rows, modes[1]) < hamming(rows, modes[0])).astype(int)
        if new.all() or not new.any():
            if reseeded:
                raise DegenerateSplitError("k-modes update emptied a side twice", n=len(rows))
            reseeded = True
            a, b = _double_sweep(rows)
            modes = np.vstack([rows[a], rows[b]])
            assignment = None
            trace = []
            logger.debug("[SPLIT] k-modes re-seeded after an empty side (n=%d)", len(rows))
            continue
        if assignment is not None and np.array_equal(new, assignment):
            break
        assignment = new
        modes = np.vstack([column_modes(rows[assignment == 0]), column_modes(rows[assignment == 1])])
        trace.append(hamming_cost(rows, assignment, modes))

    if assignment is None:
        raise DegenerateSplitError("split did not settle within the sweep cap", n=len(rows))
    if assignment[0] == 1:
        assignment = 1 - assignment
        modes = modes[::-1].copy()
    return BinarySplit(
        left=np.flatnonzero(assignment == 0),
        right=np.flatnonzero(assignment == 1),
        centroids=modes.astype(float),
        objective_trace=trace,
        sweeps=sweeps,
        reseeded=reseeded,
    )
