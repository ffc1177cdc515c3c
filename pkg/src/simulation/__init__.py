"""
Synthetic data, the logistic classifier and simulation campaigns
"""
from .campaign import CampaignResult, Experiment, run_campaign, run_simulation, write_campaign
from .generate import (
    ClusterParams,
    LabelMode,
    Scenario,
    SimConfig,
    gen_features,
    gen_labels,
    gen_metric,
    simulate,
)
from .logistic import LogisticModel, metric_from_model, predict, train_logistic
