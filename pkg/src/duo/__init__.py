"""
Replica of the CUB risk-profiling rules and a synthetic cohort generator
"""
from .cohort import CohortComponent, CohortMix, synth_cohort
from .composition import combination_map
from .scoring import RiskOutcome, StudentRecord, categorize, risk_score
from .tables import R1_FACTORS, R3_ENTRIES, RiskTables, load_tables
