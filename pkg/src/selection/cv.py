"""
Cross-validated choice of ``n_min``.

For every candidate and fold, HBAC is fitted on the training folds, the
held-out fold is assigned by centroids and scored with the CH index of its
metric values. The candidate with the highest mean score wins; ties go to the
smaller ``n_min``.
"""
import logging
import math
from typing import Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from src.clustering.hbac import fit_hbac
from src.clustering.partition import HbacConfig, assign_all
from src.core.dataset import Dataset
from src.core.errors import InfeasibleGridError
from src.core.sampling import fold_blocks

from .calinski import ChScore, calinski_harabasz

logger = logging.getLogger(__name__)

# Absolute grids used on the two CUB audit cohorts
GRID_PRESETS = {
    "cub2014": [5000, 10000, 20000, 30000],
    "cub2019": [1000, 2000, 3500, 5000],
}


class FoldScore(BaseModel):
    n_min: int
    fold: int
    n_clusters_fit: int
    score: ChScore


class CandidateScore(BaseModel):
    n_min: int
    feasible: bool
    mean_score: Optional[float] = None
    infinite: bool = False


class SelectionResult(BaseModel):
    grid: List[int]
    folds: int
    seed: int
    fold_scores: List[FoldScore]
    candidates: List[CandidateScore]
    chosen: int


def resolve_grid(n_train: int, fractions: Iterable[float]) -> List[int]:
    """Scale-free grid: each fraction of ``n_train`` rounded half-up, at least 1."""
    return sorted({max(1, int(math.floor(f * n_train + 0.5))) for f in fractions})


def feasible_candidates(grid: Sequence[int], folds: Sequence[tuple]) -> List[int]:
    """Candidates for which every fold's training portion holds 2·n_min rows."""
    smallest = min(len(train) for train, _ in folds)
    return [n_min for n_min in grid if smallest >= 2 * n_min]


def evaluate_fold(
    dataset: Dataset,
    train_idx: Sequence[int],
    held_idx: Sequence[int],
    n_min: int,
    base_config: HbacConfig,
    fold: int,
) -> FoldScore:
    """Fit on ``train_idx``, assign ``held_idx`` by centroid, score the held-out metric."""
    config = base_config.model_copy(update={"n_min": n_min})
    partition = fit_hbac(dataset.subset(train_idx), config)
    held = dataset.subset(held_idx)
    labels = assign_all(partition, held)
    k = len(np.unique(labels))
    if k < 2 or held.n_rows <= k:
        score = ChScore(degenerate=True, k=k, n=held.n_rows)
    else:
        score = calinski_harabasz(held.metric, labels)
    logger.debug("[SELECT] n_min=%d fold=%d: %d clusters, CH=%s",
                 n_min, fold, partition.k, "inf" if score.infinite else f"{score.value:.4f}")
    return FoldScore(n_min=n_min, fold=fold, n_clusters_fit=partition.k, score=score)


def summarize_selection(
    grid: Sequence[int],
    feasible: Sequence[int],
    folds: int,
    seed: int,
    fold_scores: Iterable[FoldScore],
) -> SelectionResult:
    """Aggregate fold scores (any order) into the ranked selection result."""
    if not feasible:
        raise InfeasibleGridError(
            f"no n_min candidate in {list(grid)} fits the training folds", grid=list(grid)
        )
    ordered = sorted(fold_scores, key=lambda s: (s.n_min, s.fold))
    candidates: List[CandidateScore] = []
    for n_min in sorted(grid):
        if n_min not in feasible:
            candidates.append(CandidateScore(n_min=n_min, feasible=False))
            continue
        scores = [s.score for s in ordered if s.n_min == n_min]
        if any(s.infinite for s in scores):
            candidates.append(CandidateScore(n_min=n_min, feasible=True, infinite=True))
        else:
            candidates.append(CandidateScore(
                n_min=n_min, feasible=True, mean_score=float(np.mean([s.value for s in scores]))))

    ranked = [c for c in candidates if c.feasible]
    # highest mean first (infinite above finite), then the smaller n_min
    best = min(ranked, key=lambda c: (not c.infinite, -(c.mean_score or 0.0), c.n_min))
    logger.info("[SELECT] chose n_min=%d from grid %s", best.n_min, list(grid))
    return SelectionResult(grid=sorted(grid), folds=folds, seed=seed, fold_scores=ordered,
                           candidates=candidates, chosen=best.n_min)


def select_n_min(
    dataset: Dataset,
    grid: Sequence[int],
    folds: int,
    base_config: HbacConfig,
    seed: Optional[int] = None,
) -> SelectionResult:
    """Sequential cross-validation over ``grid`` (the pipeline fans the same work out)."""
    seed = base_config.seed if seed is None else seed
    pairs = fold_blocks(dataset.n_rows, folds, seed)
    feasible = feasible_candidates(grid, pairs)
    scores = [
        evaluate_fold(dataset, train, held, n_min, base_config, fold)
        for n_min in feasible
        for fold, (train, held) in enumerate(pairs)
    ]
    return summarize_selection(grid, feasible, folds, seed, scores)
