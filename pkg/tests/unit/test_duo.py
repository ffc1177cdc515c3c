"""
Unit tests for the risk-profiling replica and the synthetic cohort
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from src.clustering.hbac import fit_hbac
from src.clustering.partition import HbacConfig
from src.core.config import DATA_DIR
from src.core.dataset import SplitterKind, one_hot_groups
from src.core.errors import (
    MissingTableEntryError,
    OutOfRangeError,
    SchemaMismatchError,
    UnknownDistanceError,
)
from src.duo.cohort import CohortComponent, CohortMix, draw_records, score_records, synth_cohort
from src.duo.composition import all_combinations, combination_map
from src.duo.scoring import StudentRecord, categorize, risk_score
from src.duo.tables import R1_FACTORS, R3_ENTRIES, RiskTables, load_r2_table, load_tables


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

class TestTables:

    def test_education_factors(self):
        assert R1_FACTORS == {"MBO12": 1.2, "MBO34": 1.1, "HBO": 1.0, "WO": 0.8}

    def test_age_history_entries(self):
        assert len(R3_ENTRIES) == 18
        assert R3_ENTRIES[("25-65", "17-18", "17-18")] == 30
        assert R3_ENTRIES[("23-24", "17-18", "19-20")] == 10
        assert R3_ENTRIES[("21-22", "17-18", "17-18")] == 5

    def test_unlisted_age_history_is_zero(self, demo_tables):
        assert demo_tables.r3_value("15-18", "17-18", "17-18") == 0.0

    def test_current_age_band_maps_to_age_history_band(self, demo_tables):
        assert demo_tables.r3_value("25-50", "17-18", "19-20") == 25

    def test_demo_table_covers_every_cell(self, demo_tables):
        assert len(demo_tables.r2) == 5 * 8
        assert demo_tables.r2_value("15-18", "0km") == 100

    def test_missing_r2_cell(self):
        with pytest.raises(MissingTableEntryError):
            RiskTables(r2={}).r2_value("15-18", "0km")

    def test_missing_r2_file(self, tmp_path):
        with pytest.raises(MissingTableEntryError):
            load_tables(tmp_path / "absent.csv")

    @pytest.mark.parametrize("body", [
        "age,0km,3km\n15-18,1,2\n",
        "age,0km,1m-1km\n15-18,1,\n",
        "age,0km,1m-1km\n15-18,1,-4\n",
    ])
    def test_bad_r2_file(self, tmp_path, body):
        path = tmp_path / "r2.csv"
        path.write_text(body, encoding="utf-8")
        with pytest.raises(SchemaMismatchError):
            load_r2_table(path)


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

class TestCategorize:

    @pytest.mark.parametrize("score,category", [
        (0, 6), (0.5, 5), (1, 5), (19.999, 5), (20, 4), (39, 4), (40, 3),
        (59.99, 3), (60, 2), (79, 2), (80, 1), (120, 1), (180, 1),
    ])
    def test_boundaries(self, score, category):
        assert categorize(score) == category

    def test_every_integer_score(self):
        bins = [(1, 19, 5), (20, 39, 4), (40, 59, 3), (60, 79, 2), (80, 180, 1)]
        for score in range(181):
            expected = 6 if score == 0 else next(c for lo, hi, c in bins if lo <= score <= hi)
            assert categorize(score) == expected, score

    def test_product_lands_on_integer(self):
        assert categorize(1.2 * 50) == 2

    @pytest.mark.parametrize("score", [-1.0, 180.5, math.nan])
    def test_out_of_range(self, score):
        with pytest.raises(OutOfRangeError):
            categorize(score)


class TestRiskScore:

    def test_university_student_living_at_home(self, demo_tables):
        record = StudentRecord(education="WO", age_current="15-18", distance="0km")
        outcome = risk_score(record, demo_tables)
        assert outcome.score == pytest.approx(80.0)
        assert outcome.category == 1
        assert outcome.high_risk

    def test_age_history_adds_to_distance_factor(self):
        tables = RiskTables(r2={("25-50", "0km"): 10.0})
        record = StudentRecord(education="MBO12", age_current="25-50", distance="0km",
                               age_registered="17-18", age_gba="19-20")
        outcome = risk_score(record, tables)
        assert outcome.score == pytest.approx(42.0)
        assert outcome.category == 3
        assert not outcome.high_risk

    def test_far_away_is_low_risk(self, demo_tables):
        record = StudentRecord(education="HBO", age_current="23-24", distance="50-500km",
                               age_registered="23-24", age_gba="23-24")
        outcome = risk_score(record, demo_tables)
        assert outcome.score == 0.0
        assert outcome.category == 6

    def test_scores_above_maximum_are_clamped(self):
        tables = RiskTables(r2={("15-18", "0km"): 200.0})
        outcome = risk_score(StudentRecord(education="MBO12", age_current="15-18", distance="0km"),
                             tables)
        assert outcome.clamped
        assert outcome.score == 180.0
        assert outcome.category == 1

    def test_unknown_distance(self, demo_tables):
        record = StudentRecord(education="HBO", age_current="19-20", distance="unknown")
        with pytest.raises(UnknownDistanceError):
            risk_score(record, demo_tables)

    def test_unknown_education_rejected(self):
        with pytest.raises(PydanticValidationError):
            StudentRecord(education="PhD", age_current="19-20", distance="0km")


# ---------------------------------------------------------------------------
# Cohorts
# ---------------------------------------------------------------------------

class TestCohort:

    def test_weights_must_sum_to_one(self):
        with pytest.raises(PydanticValidationError):
            CohortMix(components=[CohortComponent(weight=0.5, education="WO",
                                                  age_current="19-20", distance="0km")])

    def test_values_checked_against_alphabet(self):
        with pytest.raises(PydanticValidationError):
            CohortComponent(weight=1.0, education="WO", age_current="19-20", distance="2km")

    def test_demo_mix_loads(self):
        mix = CohortMix.from_json_file(DATA_DIR / "demo_cohort.json")
        assert mix.n == 20000
        assert len(mix.components) == 6

    def test_draws_are_deterministic(self):
        mix = CohortMix.from_json_file(DATA_DIR / "demo_cohort.json")
        first = draw_records(500, mix, seed=3)
        second = draw_records(500, mix, seed=3)
        assert first.equals(second)
        assert not first.equals(draw_records(500, mix, seed=4))

    def test_unknown_distance_rows_are_dropped(self, demo_tables):
        mix = CohortMix(components=[
            CohortComponent(weight=0.5, education="HBO", age_current="19-20", distance="unknown"),
            CohortComponent(weight=0.5, education="HBO", age_current="19-20", distance="0km"),
        ])
        records = draw_records(200, mix, seed=1)
        scored = score_records(records, demo_tables)
        assert len(scored) == int((records["distance"] != "unknown").sum())
        assert set(scored["distance"]) == {"0km"}

    def test_point_mass_cohort(self, demo_tables):
        record = StudentRecord(education="WO", age_current="15-18", distance="0km")
        dataset = synth_cohort(50, CohortMix.point_mass(record), seed=0, tables=demo_tables)
        assert dataset.n_rows == 50
        assert np.all(dataset.metric == 1.0)
        assert dataset.features["education=WO"].sum() == 50
        assert dataset.features["distance=0km"].sum() == 50

    def test_one_hot_layout(self, demo_tables):
        mix = CohortMix.from_json_file(DATA_DIR / "demo_cohort.json")
        dataset = synth_cohort(400, mix, seed=2, tables=demo_tables)
        assert dataset.features.shape[1] == 17
        groups = one_hot_groups(dataset.schema)
        assert {k: len(v) for k, v in groups.items()} == {"education": 4, "age": 5, "distance": 8}
        for columns in groups.values():
            per_row = dataset.features[[c.name for c in columns]].sum(axis=1)
            assert (per_row == 1).all()
        assert set(np.unique(dataset.metric)) <= {0.0, 1.0}


class TestCombinationMap:

    def test_all_combinations(self):
        combos = all_combinations()
        assert len(combos) == 160
        assert not combos.duplicated().any()

    def test_each_combination_gets_one_cluster(self, demo_tables):
        mix = CohortMix.from_json_file(DATA_DIR / "demo_cohort.json")
        dataset = synth_cohort(2000, mix, seed=5, tables=demo_tables)
        partition = fit_hbac(dataset, HbacConfig(n_min=100, splitter=SplitterKind.KMODES, seed=5))
        mapping = combination_map(partition)
        assert len(mapping) == 160
        assert list(mapping.columns) == ["education", "age", "distance", "cluster"]
        assert mapping["cluster"].between(0, partition.k - 1).all()
