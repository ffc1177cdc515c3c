"""
Sample splitting for post-selection inference, and fold construction.
"""
import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from .errors import DegenerateSplitError
from .rng import STREAM_FOLDS, STREAM_SPLIT, RngStream


class SplitIndices(BaseModel):
    """Disjoint train/test index sets (0-based) covering range(n)."""

    model_config = ConfigDict(frozen=True)

    train: List[int]
    test: List[int]
    fraction: float
    seed: int

    @property
    def n(self) -> int:
        return len(self.train) + len(self.test)

    def summary(self) -> dict:
        return {"n_train": len(self.train), "n_test": len(self.test),
                "fraction": self.fraction, "seed": self.seed}


def holdout_size(n: int, fraction: float) -> int:
    """round-half-up of fraction·n"""
    return int(math.floor(fraction * n + 0.5))


def split_sample(n: int, fraction: float, seed: int) -> SplitIndices:
    """
    Uniform random train/test partition without replacement (unstratified).

    ``|test| = round_half_up(fraction · n)``; both sides must be nonempty.
    """
    if n < 2:
        raise DegenerateSplitError(f"cannot split {n} rows", n=n)
    if not 0.0 < fraction < 1.0:
        raise DegenerateSplitError(f"test fraction must lie in (0, 1), got {fraction}",
                                   fraction=fraction)
    n_test = holdout_size(n, fraction)
    if n_test < 1 or n_test > n - 1:
        raise DegenerateSplitError(
            f"split of {n} rows at fraction {fraction} leaves an empty side "
            f"({n_test} test / {n - n_test} train)",
            n=n, fraction=fraction,
        )
    order = RngStream(seed=seed, stream_id=STREAM_SPLIT).generator().permutation(n)
    return SplitIndices(
        train=sorted(int(i) for i in order[n_test:]),
        test=sorted(int(i) for i in order[:n_test]),
        fraction=fraction,
        seed=seed,
    )


def fold_blocks(n: int, folds: int, seed: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    K-fold (train, held_out) index pairs: contiguous blocks of a seeded shuffle.
    """
    if folds < 2:
        raise ValueError(f"need at least 2 folds, got {folds}")
    if n < folds:
        raise DegenerateSplitError(f"cannot make {folds} folds from {n} rows", n=n, folds=folds)
    order = RngStream(seed=seed, stream_id=STREAM_FOLDS).generator().permutation(n)
    blocks = np.array_split(order, folds)
    pairs = []
    for k, held in enumerate(blocks):
        train = np.concatenate([b for j, b in enumerate(blocks) if j != k])
        pairs.append((np.sort(train), np.sort(held)))
    return pairs
