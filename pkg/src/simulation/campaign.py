"""
Simulation campaigns: repeat generate → split → fit → test many times and
aggregate rejection rates and mean cluster differences.

Experiments and the variants each one compares:

- ``insample_vs_oos``: differences/tests on the fit rows vs the held-out rows
- ``bonferroni_effect``: held-out tests with and without Bonferroni
- ``perm_vs_t``: Welch t-test vs permutation test, metric = predicted value
- ``accuracy_perm``: the same comparison with the accuracy metric
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.clustering.hbac import fit_hbac
from src.clustering.partition import HbacConfig, Partition, assign_all
from src.core.dataset import MetricKind
from src.core.errors import AuditError, CampaignFailure
from src.core.rng import STREAM_SIMULATION, RngStream
from src.core.sampling import split_sample
from src.stats.clusters import TestReport, test_assignment, test_clusters
from src.stats.permutation import permutation_test
from src.stats.significance import bonferroni

from .generate import LabelMode, SimConfig, simulate, to_dataset
from .logistic import metric_from_model, train_logistic

logger = logging.getLogger(__name__)

Z_95 = 1.96


class Experiment(str, Enum):
    INSAMPLE_VS_OOS = "insample_vs_oos"
    BONFERRONI_EFFECT = "bonferroni_effect"
    PERM_VS_T = "perm_vs_t"
    ACCURACY_PERM = "accuracy_perm"


VARIANTS: Dict[Experiment, Tuple[str, str]] = {
    Experiment.INSAMPLE_VS_OOS: ("in_sample", "out_of_sample"),
    Experiment.BONFERRONI_EFFECT: ("bonferroni", "uncorrected"),
    Experiment.PERM_VS_T: ("t_test", "permutation"),
    Experiment.ACCURACY_PERM: ("t_test", "permutation"),
}

LABEL_EXPERIMENTS = {Experiment.PERM_VS_T, Experiment.ACCURACY_PERM}


class SimRecord(BaseModel):
    """One (simulation, variant, cluster) row of the flat export."""

    sim: int
    seed: int
    variant: str
    cluster_index: int
    cluster_size: int
    n_in: int
    difference: Optional[float] = None
    abs_difference: Optional[float] = None
    p_value: Optional[float] = None
    significant: bool = False


class SimulationOutcome(BaseModel):
    sim: int
    seed: int
    n_clusters: int
    rejections: Dict[str, bool]
    mean_difference: Dict[str, Optional[float]]
    mean_abs_difference: Dict[str, Optional[float]]
    records: List[SimRecord]


class VariantSummary(BaseModel):
    variant: str
    n_sims: int
    rejection_rate: float
    ci_low: float
    ci_high: float
    mean_difference: Optional[float] = None
    mean_abs_difference: Optional[float] = None
    abs_difference_ci_half_width: Optional[float] = None


class CampaignResult(BaseModel):
    experiment: Experiment
    config: SimConfig
    n_sims: int
    alpha: float
    seed: int
    variants: List[VariantSummary]
    simulations: List[SimulationOutcome]

    def variant(self, name: str) -> VariantSummary:
        for summary in self.variants:
            if summary.variant == name:
                return summary
        raise KeyError(name)

    def records_frame(self) -> pd.DataFrame:
        rows = [r.model_dump() for sim in self.simulations for r in sim.records]
        return pd.DataFrame(rows, columns=list(SimRecord.model_fields))

    def figure_table(self) -> pd.DataFrame:
        return pd.DataFrame([v.model_dump() for v in self.variants],
                            columns=list(VariantSummary.model_fields))

    def summary_json(self) -> str:
        return self.model_dump_json(indent=2, exclude={"simulations"})


def rejection_ci(rate: float, n_sims: int) -> Tuple[float, float]:
    """rate ± 1.96·sqrt(rate(1−rate)/R)"""
    half = Z_95 * math.sqrt(rate * (1.0 - rate) / n_sims)
    return rate - half, rate + half


def experiment_config(experiment: Experiment, config: SimConfig) -> SimConfig:
    mode = LabelMode.BERNOULLI_LABELS if experiment in LABEL_EXPERIMENTS else LabelMode.DIRECT_METRIC
    return config.model_copy(update={"label_mode": mode})


def _hbac_config(config: SimConfig, seed: int) -> HbacConfig:
    return HbacConfig(
        n_min=config.resolved_n_min(),
        max_iterations=config.max_iterations,
        seed=seed,
        metric_weight=config.resolved_metric_weight(),
    )


def _records(sim: int, seed: int, variant: str, report: TestReport, partition: Partition,
             p_values: Optional[Dict[int, float]] = None, alpha: float = 0.05) -> List[SimRecord]:
    records = []
    for t in report.tests:
        if p_values is None:
            p, significant = t.p_adjusted, t.significant
        else:
            p = p_values.get(t.cluster_index)
            significant = p is not None and p <= alpha
        records.append(SimRecord(
            sim=sim, seed=seed, variant=variant, cluster_index=t.cluster_index,
            cluster_size=partition.clusters[t.cluster_index].size, n_in=t.n_in,
            difference=t.difference,
            abs_difference=None if t.difference is None else abs(t.difference),
            p_value=p, significant=significant,
        ))
    return records


def _direct_metric_variants(experiment, config, data, split, hbac, alpha, sim, seed):
    dataset = to_dataset(data.features, data.metric)
    train = dataset.subset(split.train)
    test = dataset.subset(split.test)
    partition = fit_hbac(train, hbac)
    if experiment == Experiment.INSAMPLE_VS_OOS:
        kind = train.schema.metric_kind
        reports = {
            "in_sample": test_assignment(partition, partition.fit_labels(), train.metric, kind, alpha),
            "out_of_sample": test_clusters(partition, test, alpha=alpha),
        }
    else:
        reports = {
            "bonferroni": test_clusters(partition, test, alpha=alpha, correction="bonferroni"),
            "uncorrected": test_clusters(partition, test, alpha=alpha, correction="none"),
        }
    records = [r for name, rep in reports.items() for r in _records(sim, seed, name, rep, partition)]
    return partition, records


def _label_variants(experiment, config, data, split, hbac, alpha, sim, seed):
    features, labels = data.features, data.labels
    train_idx = np.asarray(split.train)
    test_idx = np.asarray(split.test)
    kind = "predicted_value" if experiment == Experiment.PERM_VS_T else "accuracy"

    def trainer(x, y, trainer_seed):
        return train_logistic(x[train_idx], y[train_idx], config.l2_penalty, trainer_seed)

    def metric_fn(model, x, y):
        return metric_from_model(kind, model, x, y, probability=config.probability_metric)

    def fit_and_assign(x, metric_values):
        fitted = fit_hbac(to_dataset(x[train_idx], metric_values[train_idx]), hbac)
        out = np.full(len(x), -1, dtype=int)
        out[test_idx] = assign_all(fitted, to_dataset(x[test_idx], metric_values[test_idx]))
        return fitted, out

    metric = metric_fn(trainer(features, labels, seed), features, labels)
    partition, assignment = fit_and_assign(features, metric)

    def partition_fn(x, y, metric_values):
        if config.refit_partition:
            return fit_and_assign(x, metric_values)[1]
        return assignment

    t_report = test_assignment(partition, assignment[test_idx], metric[test_idx],
                               MetricKind.CONTINUOUS, alpha)
    perm = permutation_test(features, labels, trainer, metric_fn, partition_fn,
                            n_perm=config.n_perm, seed=seed,
                            refit_partition=config.refit_partition)
    tested = [j for j, obs in enumerate(perm.observed) if not math.isnan(obs)]
    adjusted = bonferroni([perm.p_values[j] for j in tested], len(tested)) if tested else []
    perm_p = dict(zip(tested, adjusted))

    records = _records(sim, seed, "t_test", t_report, partition)
    records += _records(sim, seed, "permutation", t_report, partition, p_values=perm_p, alpha=alpha)
    return partition, records


def run_simulation(experiment: Experiment, config: SimConfig, alpha: float, sim: int,
                   seed: int) -> SimulationOutcome:
    """One simulation of a campaign; every draw comes from the simulation's own stream."""
    experiment = Experiment(experiment)
    config = experiment_config(experiment, config)
    stream = RngStream(seed=seed, stream_id=STREAM_SIMULATION).child(sim)
    sim_seed = stream.derive_seed()
    try:
        data = simulate(config, stream.generator())
        split = split_sample(config.n_total, config.test_fraction, sim_seed)
        hbac = _hbac_config(config, sim_seed)
        build = _label_variants if experiment in LABEL_EXPERIMENTS else _direct_metric_variants
        partition, records = build(experiment, config, data, split, hbac, alpha, sim, sim_seed)
    except AuditError as exc:
        raise CampaignFailure(f"simulation {sim} failed: {exc.message}",
                              sim=sim, seed=sim_seed, cause=exc.code) from exc

    rejections, mean_diff, mean_abs = {}, {}, {}
    for variant in VARIANTS[experiment]:
        rows = [r for r in records if r.variant == variant]
        diffs = [r.difference for r in rows if r.difference is not None]
        rejections[variant] = any(r.significant for r in rows)
        mean_diff[variant] = float(np.mean(diffs)) if diffs else None
        mean_abs[variant] = float(np.mean(np.abs(diffs))) if diffs else None
    return SimulationOutcome(sim=sim, seed=sim_seed, n_clusters=partition.k, rejections=rejections,
                             mean_difference=mean_diff, mean_abs_difference=mean_abs, records=records)


def _run_one(args: tuple) -> SimulationOutcome:
    return run_simulation(*args)


def summarize(experiment: Experiment, outcomes: List[SimulationOutcome]) -> List[VariantSummary]:
    summaries = []
    n_sims = len(outcomes)
    for variant in VARIANTS[Experiment(experiment)]:
        rate = float(np.mean([o.rejections[variant] for o in outcomes]))
        low, high = rejection_ci(rate, n_sims)
        diffs = [o.mean_difference[variant] for o in outcomes if o.mean_difference[variant] is not None]
        abs_diffs = [o.mean_abs_difference[variant] for o in outcomes
                     if o.mean_abs_difference[variant] is not None]
        half = None
        if len(abs_diffs) > 1:
            half = float(Z_95 * np.std(abs_diffs, ddof=1) / math.sqrt(len(abs_diffs)))
        summaries.append(VariantSummary(
            variant=variant, n_sims=n_sims, rejection_rate=rate, ci_low=low, ci_high=high,
            mean_difference=float(np.mean(diffs)) if diffs else None,
            mean_abs_difference=float(np.mean(abs_diffs)) if abs_diffs else None,
            abs_difference_ci_half_width=half,
        ))
    return summaries


def run_campaign(
    experiment: Union[Experiment, str],
    config: SimConfig,
    n_sims: int,
    alpha: float = 0.05,
    seed: Optional[int] = None,
    workers: int = 1,
) -> CampaignResult:
    """
    Run ``n_sims`` seeded simulations, sequentially or over a process pool.

    Simulation ``s`` always uses stream ``s`` of the campaign seed, and results
    are gathered in simulation order, so the summary does not depend on
    ``workers``.
    """
    if n_sims < 1:
        raise ValueError(f"n_sims must be at least 1, got {n_sims}")
    experiment = Experiment(experiment)
    seed = config.seed if seed is None else seed
    config = experiment_config(experiment, config)
    jobs = [(experiment, config, alpha, sim, seed) for sim in range(n_sims)]

    logger.info("[CAMPAIGN] %s: %d simulations (K=%d, N=%d, d=%d, scenario=%s, workers=%d)",
                experiment.value, n_sims, config.k_clusters, config.n_total, config.d,
                config.scenario.value, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_one, jobs, chunksize=max(1, n_sims // (4 * workers))))
    else:
        outcomes = [_run_one(job) for job in jobs]

    result = CampaignResult(
        experiment=experiment, config=config, n_sims=n_sims, alpha=alpha, seed=seed,
        variants=summarize(experiment, outcomes), simulations=outcomes,
    )
    for v in result.variants:
        logger.info("[CAMPAIGN] %s: rejection rate %.3f [%.3f, %.3f]",
                    v.variant, v.rejection_rate, v.ci_low, v.ci_high)
    return result


def write_campaign(result: CampaignResult, output_dir: Union[str, Path]) -> List[Path]:
    """summary.json, records.csv (simulation × variant × cluster) and figure_table.csv."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "summary.json", out / "records.csv", out / "figure_table.csv"]
    paths[0].write_text(result.summary_json(), encoding="utf-8")
    result.records_frame().to_csv(paths[1], index=False)
    result.figure_table().to_csv(paths[2], index=False)
    return paths
