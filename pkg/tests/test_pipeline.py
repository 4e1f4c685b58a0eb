import csv
import json

import numpy as np
import pytest

from motionshape.core import DegenerateInputError, InsufficientDataError
from motionshape.cli import main
from motionshape.pipeline import (
    ManifestError,
    PipelineConfig,
    ingest,
    load_manifest,
    run_pipeline,
)
from motionshape.synthetic import write_cohort

FAST = dict(grid_n=61, mean_max_iter=10)


@pytest.fixture
def cohort_dir(tmp_path):
    return write_cohort(tmp_path / "cohort", n_healthy=3, n_patients=2,
                        seed=5, rate_hz=50.0, duration_s=2.0)


def write_trial(path, rows, header=("time_s", "gyro")):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_manifest(path, entries):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["participant_id", "cohort", "trial_path",
                    "brooke_score", "dynamometry"])
        w.writerows(entries)


class TestConfig:
    def test_defaults(self):
        cfg = PipelineConfig()
        assert cfg.grid_n == 101
        assert cfg.filter_order == 3
        assert cfg.cutoff_ratio == 0.1
        assert cfg.dp_max_slope == 7

    def test_from_file_with_comments(self, tmp_path):
        f = tmp_path / "cfg.txt"
        f.write_text("# comment\ngrid_n = 61\ncutoff_ratio = 0.2\n\n")
        cfg = PipelineConfig.from_file(f)
        assert cfg.grid_n == 61
        assert cfg.cutoff_ratio == 0.2

    def test_unknown_key_names_line(self, tmp_path):
        f = tmp_path / "cfg.txt"
        f.write_text("grid_n = 61\nwavelet = db4\n")
        with pytest.raises(ManifestError, match=r"cfg\.txt:2.*wavelet"):
            PipelineConfig.from_file(f)

    def test_bad_value_names_field(self, tmp_path):
        f = tmp_path / "cfg.txt"
        f.write_text("grid_n = eleven\n")
        with pytest.raises(ManifestError, match=r"cfg\.txt:1.*grid_n"):
            PipelineConfig.from_file(f)

    def test_out_of_range_rejected(self):
        with pytest.raises(ManifestError, match="cutoff_ratio"):
            PipelineConfig(cutoff_ratio=1.5)
        with pytest.raises(ManifestError, match="grid_n"):
            PipelineConfig(grid_n=2)

    def test_out_of_range_in_file_names_line(self, tmp_path):
        f = tmp_path / "cfg.txt"
        f.write_text("grid_n = 61\ncutoff_ratio = 1.5\n")
        with pytest.raises(ManifestError, match=r"cfg\.txt:2.*cutoff_ratio"):
            PipelineConfig.from_file(f)

    def test_overrides_win(self, tmp_path):
        f = tmp_path / "cfg.txt"
        f.write_text("grid_n = 61\n")
        cfg = PipelineConfig.from_file(f, {"grid_n": 81})
        assert cfg.grid_n == 81


class TestManifest:
    def test_load_and_sort(self, cohort_dir):
        entries = load_manifest(cohort_dir)
        assert len(entries) == 5
        ids = [e.participant_id for e in entries]
        assert ids == sorted(ids)
        assert {e.cohort for e in entries} <= {"healthy", "DMD", "SMA"}

    def test_unknown_cohort(self, tmp_path):
        m = tmp_path / "m.csv"
        write_manifest(m, [["P1", "control", "x.csv", "", ""]])
        with pytest.raises(ManifestError, match=r"m\.csv:2.*control"):
            load_manifest(m)

    def test_duplicate_pair(self, tmp_path):
        m = tmp_path / "m.csv"
        write_manifest(m, [["P1", "healthy", "x.csv", "", ""],
                           ["P1", "healthy", "x.csv", "", ""]])
        with pytest.raises(ManifestError, match="duplicate"):
            load_manifest(m)

    def test_brooke_out_of_range(self, tmp_path):
        m = tmp_path / "m.csv"
        write_manifest(m, [["P1", "DMD", "x.csv", "9", ""]])
        with pytest.raises(ManifestError, match="brooke"):
            load_manifest(m)

    def test_missing_columns(self, tmp_path):
        m = tmp_path / "m.csv"
        m.write_text("participant_id,cohort\nP1,healthy\n")
        with pytest.raises(ManifestError, match="missing columns"):
            load_manifest(m)


class TestIngest:
    def test_empty_manifest(self, tmp_path):
        m = tmp_path / "m.csv"
        write_manifest(m, [])
        with pytest.raises(InsufficientDataError):
            ingest(m, PipelineConfig())

    def test_single_valid_trial(self, tmp_path):
        t = np.linspace(0, 2, 40)
        write_trial(tmp_path / "a.csv", zip(t, np.sin(t)))
        m = tmp_path / "m.csv"
        write_manifest(m, [["P7", "healthy", "a.csv", "", ""]])
        result = ingest(m, PipelineConfig(grid_n=31))
        assert len(result.trajectories) == 1
        assert result.items[0].trajectory.meta.participant == "P7"

    def test_shuffled_rows_name_offender(self, tmp_path):
        t = np.linspace(0, 2, 40)
        rows = list(zip(t, np.sin(t)))
        rows[10], rows[11] = rows[11], rows[10]
        write_trial(tmp_path / "a.csv", rows)
        m = tmp_path / "m.csv"
        write_manifest(m, [["P1", "healthy", "a.csv", "", ""]])
        with pytest.raises(ManifestError, match=r"a\.csv:13.*increasing"):
            ingest(m, PipelineConfig())

    def test_missing_file(self, tmp_path):
        m = tmp_path / "m.csv"
        write_manifest(m, [["P1", "healthy", "ghost.csv", "", ""]])
        with pytest.raises(ManifestError, match="ghost"):
            ingest(m, PipelineConfig())

    def test_missing_channel_column(self, tmp_path):
        t = np.linspace(0, 2, 40)
        write_trial(tmp_path / "a.csv", zip(t, np.sin(t)), header=("time_s", "acc"))
        m = tmp_path / "m.csv"
        write_manifest(m, [["P1", "healthy", "a.csv", "", ""]])
        with pytest.raises(ManifestError, match="'gyro'"):
            ingest(m, PipelineConfig())

    def test_too_few_samples(self, tmp_path):
        write_trial(tmp_path / "a.csv", [(0.0, 1.0), (0.1, 2.0), (0.2, 1.5)])
        m = tmp_path / "m.csv"
        write_manifest(m, [["P1", "healthy", "a.csv", "", ""]])
        with pytest.raises(ManifestError, match="fewer than 8"):
            ingest(m, PipelineConfig())

    def test_skip_bad_collects_instead(self, tmp_path):
        t = np.linspace(0, 2, 40)
        write_trial(tmp_path / "good.csv", zip(t, np.sin(t)))
        m = tmp_path / "m.csv"
        write_manifest(m, [["P1", "healthy", "good.csv", "", ""],
                           ["P2", "healthy", "ghost.csv", "", ""]])
        result = ingest(m, PipelineConfig(grid_n=31), skip_bad=True)
        assert len(result.items) == 1
        assert len(result.skipped) == 1
        assert result.skipped[0][0] == "P2"


class TestRunPipeline:
    def test_single_healthy_rejected(self, tmp_path):
        t = np.linspace(0, 2, 40)
        write_trial(tmp_path / "a.csv", zip(t, np.sin(t)))
        m = tmp_path / "m.csv"
        write_manifest(m, [["P1", "healthy", "a.csv", "", ""]])
        with pytest.raises(DegenerateInputError, match="reference"):
            run_pipeline(m, PipelineConfig(grid_n=31), tmp_path / "out")

    def test_outputs_and_roundtrip(self, cohort_dir, tmp_path):
        out = tmp_path / "out"
        report = run_pipeline(cohort_dir, PipelineConfig(**FAST), out)
        for name in ("distances.csv", "matrix_pre.csv", "matrix_post.csv",
                     "stats.json", "mean_healthy.csv"):
            assert (out / name).is_file()
        assert sorted(p.name for p in (out / "rolling").iterdir()) == \
            sorted(f"{s.label}.csv" for s in report.scores)

        # every statistic in stats.json reparses to exactly what was computed
        stats = json.loads((out / "stats.json").read_text())
        assert stats == report.summary_dict()
        for metric in ("amplitude", "phase", "cosine"):
            assert stats["t_tests"][metric]["p"] == report.t_tests[metric]["p"]

        with (out / "distances.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 5
        assert set(rows[0]) == {"participant", "cohort", "amplitude",
                                "phase", "cosine"}

    def test_skip_bad_counted_in_stats(self, cohort_dir, tmp_path):
        entries = list(csv.DictReader(cohort_dir.open()))
        entries.append({"participant_id": "PX", "cohort": "DMD",
                        "trial_path": "ghost.csv", "brooke_score": "",
                        "dynamometry": ""})
        m = cohort_dir.parent / "with_bad.csv"
        with m.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(entries[0]))
            w.writeheader()
            w.writerows(entries)
        out = tmp_path / "out"
        report = run_pipeline(m, PipelineConfig(**FAST), out, skip_bad=True)
        stats = json.loads((out / "stats.json").read_text())
        assert stats["skipped_trials"] == 1
        assert stats["skipped"][0]["label"] == "PX"
        assert len(report.scores) == 5


class TestCli:
    def test_report_subcommand(self, cohort_dir, tmp_path, capsys):
        out = tmp_path / "r"
        rc = main(["report", "--manifest", str(cohort_dir), "--out", str(out),
                   "--grid-n", "61", "--mean-max-iter", "10"])
        assert rc == 0
        assert (out / "stats.json").is_file()
        assert "report complete" in capsys.readouterr().out

    def test_stage_subcommands(self, cohort_dir, tmp_path):
        args = ["--manifest", str(cohort_dir), "--grid-n", "61"]
        assert main(["ingest-check"] + args) == 0
        assert main(["mean"] + args + ["--out", str(tmp_path / "m")]) == 0
        assert (tmp_path / "m" / "mean_healthy.csv").is_file()
        assert main(["align"] + args + ["--out", str(tmp_path / "a")]) == 0
        assert (tmp_path / "a" / "warps.csv").is_file()
        assert (tmp_path / "a" / "aligned_curves.csv").is_file()
        assert main(["distances"] + args + ["--out", str(tmp_path / "d")]) == 0
        assert (tmp_path / "d" / "distances.csv").is_file()
        assert main(["stats"] + args + ["--out", str(tmp_path / "s")]) == 0
        stats = json.loads((tmp_path / "s" / "stats.json").read_text())
        assert "t_tests" in stats and "regressions" in stats

    def test_error_exit_code(self, cohort_dir, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("nope = 1\n")
        rc = main(["report", "--manifest", str(cohort_dir),
                   "--config", str(bad), "--out", str(tmp_path / "x")])
        assert rc == 2
        assert "nope" in capsys.readouterr().err

    def test_config_file_used(self, cohort_dir, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("grid_n = 61\nmean_max_iter = 10\n")
        out = tmp_path / "r"
        rc = main(["distances", "--manifest", str(cohort_dir),
                   "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        assert (out / "distances.csv").is_file()
