"""
Integration tests for the command line
"""
import json

import pandas as pd
import pytest

from src.cli.app import EXIT_DATA_ERROR, EXIT_INTERNAL_ERROR, EXIT_OK, build_parser, main
from src.cli.commands import default_output_dir
from src.core.config import settings

AUDIT_FILES = ("report.json", "report.txt", "partition.json", "assignments.csv")


def audit_args(files, output_dir, *extra):
    return ["audit", "--input", str(files["input"]), "--schema", str(files["schema"]),
            "--grid", "10", "40", "--folds", "3", "--output-dir", str(output_dir), *extra]


class TestAuditCommand:

    def test_writes_every_output(self, audit_files, tmp_path, capsys):
        out = tmp_path / "audit"
        assert main(audit_args(audit_files, out, "--xlsx")) == EXIT_OK
        for name in AUDIT_FILES + ("report.xlsx",):
            assert (out / name).exists(), name
        assert not (out / "error.json").exists()
        printed = capsys.readouterr().out
        assert "Testing the difference in bias metric per cluster" in printed

    def test_report_contents(self, audit_files, tmp_path):
        out = tmp_path / "audit"
        main(audit_args(audit_files, out))
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["provenance"]["tool"] == "hbac-audit"
        assert report["config"]["grid"] == [10, 40]
        assert "output_dir" not in report["config"]
        assert len(report["clusters"]) == 2

        assignments = pd.read_csv(out / "assignments.csv")
        assert list(assignments.columns) == ["row_id", "split", "cluster", "metric"]
        assert len(assignments) == 400
        assert (assignments["split"] == "test").sum() == 80
        assert set(assignments["cluster"]) == {0, 1}

    def test_reruns_are_byte_identical(self, audit_files, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(audit_args(audit_files, first)) == EXIT_OK
        assert main(audit_args(audit_files, second)) == EXIT_OK
        for name in AUDIT_FILES:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_rerun_replaces_owned_outputs_only(self, audit_files, tmp_path):
        out = tmp_path / "audit"
        assert main(audit_args(audit_files, out, "--xlsx")) == EXIT_OK
        (out / "notes.txt").write_text("keep me", encoding="utf-8")
        assert main(audit_args(audit_files, out)) == EXIT_OK
        assert (out / "notes.txt").read_text(encoding="utf-8") == "keep me"
        assert not (out / "report.xlsx").exists()
        for name in AUDIT_FILES:
            assert (out / name).exists(), name

    def test_output_dir_holding_the_input(self, audit_files, tmp_path):
        out = audit_files["input"].parent
        before = audit_files["input"].read_bytes()
        assert main(audit_args(audit_files, out)) == EXIT_OK
        assert audit_files["input"].read_bytes() == before
        assert audit_files["schema"].exists()
        assert (out / "report.json").exists()

    def test_failed_rerun_removes_the_old_report(self, audit_files, tmp_path):
        out = tmp_path / "audit"
        assert main(audit_args(audit_files, out)) == EXIT_OK
        (out / "notes.txt").write_text("keep me", encoding="utf-8")
        files = dict(audit_files, input=tmp_path / "absent.csv")
        assert main(audit_args(files, out)) == EXIT_DATA_ERROR
        assert (out / "error.json").exists()
        assert (out / "notes.txt").exists()
        for name in AUDIT_FILES:
            assert not (out / name).exists(), name

    def test_default_directories_do_not_overlap(self, audit_files, tmp_path, monkeypatch):
        monkeypatch.setattr(settings, "output_dir", str(tmp_path / "outputs"))
        sim = ["simulate", "bonferroni_effect", "--k", "2", "--n", "100", "--sims", "1",
               "--n-perm", "19", "--seed", "1"]
        assert main(sim) == EXIT_OK
        audit = ["audit", "--input", str(audit_files["input"]), "--schema", str(audit_files["schema"]),
                 "--grid", "10", "40", "--folds", "3"]
        assert main(audit) == EXIT_OK
        assert (tmp_path / "outputs" / "simulate-bonferroni_effect" / "summary.json").exists()
        assert (tmp_path / "outputs" / "audit" / "report.json").exists()
        assert default_output_dir("duo-demo") == tmp_path / "outputs" / "duo-demo"

    def test_output_path_that_is_a_file(self, audit_files, tmp_path):
        out = tmp_path / "report"
        out.write_text("not a directory", encoding="utf-8")
        assert main(audit_args(audit_files, out)) == EXIT_INTERNAL_ERROR
        assert out.read_text(encoding="utf-8") == "not a directory"

    def test_missing_input_is_a_data_error(self, audit_files, tmp_path, capsys):
        out = tmp_path / "audit"
        files = dict(audit_files, input=tmp_path / "absent.csv")
        assert main(audit_args(files, out)) == EXIT_DATA_ERROR
        record = json.loads((out / "error.json").read_text(encoding="utf-8"))
        assert record["error"] == "validation_failed"
        assert not (out / "report.json").exists()
        stderr_lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
        assert json.loads(stderr_lines[-1])["error"] == "validation_failed"

    def test_invalid_rows_are_a_data_error(self, tmp_path, audit_files):
        frame = pd.read_csv(audit_files["input"])
        frame.loc[3, "high_risk"] = 2
        frame.to_csv(audit_files["input"], index=False)
        out = tmp_path / "audit"
        assert main(audit_args(audit_files, out)) == EXIT_DATA_ERROR
        record = json.loads((out / "error.json").read_text(encoding="utf-8"))
        codes = [v["code"] for v in record["details"]["violations"]]
        assert "non_binary_metric" in codes

    def test_excluded_rows_are_dropped_before_validation(self, tmp_path, audit_files):
        frame = pd.read_csv(audit_files["input"])
        frame.loc[3, "high_risk"] = 2
        frame.to_csv(audit_files["input"], index=False)
        out = tmp_path / "audit"
        assert main(audit_args(audit_files, out, "--exclude", "high_risk=2")) == EXIT_OK
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["provenance"]["n_rows"] == 399

    def test_infeasible_grid(self, audit_files, tmp_path):
        out = tmp_path / "audit"
        args = ["audit", "--input", str(audit_files["input"]), "--schema", str(audit_files["schema"]),
                "--grid", "5000", "--output-dir", str(out)]
        assert main(args) == EXIT_DATA_ERROR
        assert json.loads((out / "error.json").read_text(encoding="utf-8"))["error"] == "infeasible_grid"

    def test_bad_option_value_is_a_usage_error(self, audit_files, tmp_path):
        assert main(audit_args(audit_files, tmp_path / "audit", "--alpha", "1.5")) == EXIT_INTERNAL_ERROR

    def test_grid_options_are_exclusive(self, audit_files, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(audit_args(audit_files, tmp_path, "--grid-preset", "cub2019"))
        assert info.value.code == 2


class TestOtherCommands:

    def test_simulate(self, tmp_path, capsys):
        out = tmp_path / "sim"
        args = ["simulate", "bonferroni_effect", "--k", "2", "--n", "100", "--sims", "2",
                "--n-perm", "19", "--seed", "1", "--output-dir", str(out)]
        assert main(args) == EXIT_OK
        for name in ("summary.json", "records.csv", "figure_table.csv"):
            assert (out / name).exists()
        assert "uncorrected" in capsys.readouterr().out

    def test_unknown_experiment(self):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["simulate", "no_such_experiment"])
        assert info.value.code == 2

    def test_duo_demo(self, tmp_path):
        out = tmp_path / "duo"
        assert main(["duo-demo", "--n", "600", "--seed", "3", "--output-dir", str(out)]) == EXIT_OK
        for name in AUDIT_FILES + ("combination_map.csv",):
            assert (out / name).exists(), name
        assert len(pd.read_csv(out / "combination_map.csv")) == 160

    def test_duo_demo_empty_cohort(self, tmp_path):
        out = tmp_path / "duo"
        assert main(["duo-demo", "--n", "0", "--output-dir", str(out)]) == EXIT_DATA_ERROR
        assert json.loads((out / "error.json").read_text(encoding="utf-8"))["error"] == "validation_failed"
        assert not (out / "report.json").exists()

    def test_assign_matches_the_audit(self, audit_files, tmp_path):
        out = tmp_path / "audit"
        assert main(audit_args(audit_files, out)) == EXIT_OK
        target = tmp_path / "assigned.csv"
        args = ["assign", "--partition", str(out / "partition.json"), "--input", str(audit_files["input"]),
                "--schema", str(audit_files["schema"]), "--output", str(target)]
        assert main(args) == EXIT_OK

        assigned = pd.read_csv(target)
        audited = pd.read_csv(out / "assignments.csv")
        assert list(assigned.columns) == ["row_id", "cluster", "metric"]
        held_out = audited[audited["split"] == "test"].set_index("row_id")
        assert (assigned.set_index("row_id").loc[held_out.index, "cluster"] == held_out["cluster"]).all()

    def test_version(self, capsys):
        with pytest.raises(SystemExit):
            main(["--version"])
        assert "hbac-audit" in capsys.readouterr().out
