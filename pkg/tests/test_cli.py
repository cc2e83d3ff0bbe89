import io
import subprocess
import sys

import numpy as np
import pytest

from pupilpost import cli
from pupilpost.fileio import read_report, read_trajectory
from pupilpost.fixtures import SLOT_US, blink_fixture

from conftest import FIXTURES


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


COMPOSITE = ("--input", FIXTURES / "composite_raw.csv", "--truth", FIXTURES / "composite_truth.csv",
             "--events", FIXTURES / "composite_events.csv")


class TestFilter:
    def test_constant_unchanged(self, tmp_path):
        code, out, _ = run("filter", "--input", FIXTURES / "constant.csv", "--output", tmp_path / "o.csv")
        assert code == 0
        assert (tmp_path / "o.csv").read_bytes() == (FIXTURES / "constant.csv").read_bytes()
        assert "window lengths" in out and "5:64" in out

    def test_blink_improves(self, tmp_path):
        code, _, _ = run("filter", "--input", FIXTURES / "blink_raw.csv", "--output", tmp_path / "o.csv")
        assert code == 0
        truth, raw = blink_fixture()
        out = read_trajectory(tmp_path / "o.csv")
        assert np.hypot(*(out.xy - truth.xy).T).mean() < np.hypot(*(raw.xy - truth.xy).T).mean()

    def test_missing_input(self, tmp_path):
        code, _, err = run("filter", "--input", tmp_path / "absent.csv", "--output", tmp_path / "o.csv")
        assert code == 1 and "absent.csv" in err

    def test_missing_flag(self, tmp_path):
        code, _, err = run("filter", "--output", tmp_path / "o.csv")
        assert code == 2 and "--input" in err


class TestRefine:
    def test_sparse_passes_through(self, tmp_path):
        code, _, _ = run("refine", "--input", FIXTURES / "sweep_filtered.csv",
                         "--events", FIXTURES / "sparse_events.csv", "--output", tmp_path / "o.csv")
        assert code == 0
        assert (tmp_path / "o.csv").read_bytes() == (FIXTURES / "sweep_filtered.csv").read_bytes()

    def test_sweep_moves_gated_prediction(self, tmp_path):
        code, out, _ = run("refine", "--input", FIXTURES / "sweep_filtered.csv",
                           "--events", FIXTURES / "sweep_events.csv", "--output", tmp_path / "o.csv")
        assert code == 0 and "shifted 1 predictions" in out
        before = read_trajectory(FIXTURES / "sweep_filtered.csv").xy
        after = read_trajectory(tmp_path / "o.csv").xy
        norms = np.hypot(*(after - before).T)
        assert np.flatnonzero(norms).tolist() == [6]
        assert abs(norms[6] - 1) < 1e-12

    def test_unsorted_events(self, tmp_path):
        code, _, err = run("refine", "--input", FIXTURES / "sweep_filtered.csv",
                           "--events", FIXTURES / "events_unsorted.csv", "--output", tmp_path / "o.csv")
        assert code == 2 and "line 4" in err


class TestScore:
    def test_identity(self, tmp_path):
        code, _, _ = run("score", "--input", FIXTURES / "blink_truth.csv", "--truth", FIXTURES / "blink_truth.csv",
                         "--report", tmp_path / "r.txt")
        assert code == 0
        r = read_report(tmp_path / "r.txt")
        assert r["jm"] == 0 and r["p10"] == r["p5"] == r["p1"] == 1

    def test_decoupling_pair(self, tmp_path):
        for name in ("tremor", "offset"):
            assert run("score", "--input", FIXTURES / f"decoupling_{name}.csv", "--truth", FIXTURES / "decoupling_truth.csv",
                       "--report", tmp_path / f"{name}.txt")[0] == 0
        tremor, offset = read_report(tmp_path / "tremor.txt"), read_report(tmp_path / "offset.txt")
        assert tremor["mse"] < offset["mse"] and tremor["jm"] > offset["jm"]

    def test_length_mismatch(self, tmp_path):
        code, _, err = run("score", "--input", FIXTURES / "short_truth.csv", "--truth", FIXTURES / "blink_truth.csv",
                           "--report", tmp_path / "r.txt")
        assert code == 2 and "samples" in err
        assert not (tmp_path / "r.txt").exists()

    def test_thresholds_flag(self, tmp_path):
        run("score", "--input", FIXTURES / "blink_raw.csv", "--truth", FIXTURES / "blink_truth.csv",
            "--report", tmp_path / "r.txt", "--thresholds", "2,0.5")
        r = read_report(tmp_path / "r.txt")
        assert "p2" in r and "p0.5" in r and "p10" not in r
        assert r["param.thresholds"] == "2,0.5"


class TestPerturb:
    def test_reproduces_blink_fixture(self, tmp_path):
        code, out, _ = run("perturb", "--input", FIXTURES / "blink_truth.csv", "--output", tmp_path / "o.csv",
                           "--perturbations", "blink:100,3,30", "--seed", 0)
        assert code == 0 and "seed=0" in out
        assert (tmp_path / "o.csv").read_bytes() == (FIXTURES / "blink_raw.csv").read_bytes()

    def test_reproduces_decoupling_fixtures(self, tmp_path):
        for name, spec, seed in (("tremor", "tremor:100,2;noise:0.2", 7), ("offset", "shift:0,3,3;noise:0.2", 11)):
            run("perturb", "--input", FIXTURES / "decoupling_truth.csv", "--output", tmp_path / "o.csv",
                "--perturbations", spec, "--seed", seed)
            assert (tmp_path / "o.csv").read_bytes() == (FIXTURES / f"decoupling_{name}.csv").read_bytes()

    def test_out_of_bounds(self, tmp_path):
        code, _, _ = run("perturb", "--input", FIXTURES / "blink_truth.csv", "--output", tmp_path / "o.csv",
                         "--perturbations", "blink:255,3,30")
        assert code == 2

    def test_requires_spec(self, tmp_path):
        code, _, err = run("perturb", "--input", FIXTURES / "blink_truth.csv", "--output", tmp_path / "o.csv")
        assert code == 2 and "perturbations" in err


class TestConfig:
    def test_flag_overrides_file(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("# comment\ntau = 6  # trailing\nlambda=0.5\nw-max=15\n")
        code, _, _ = run("pipeline", "--config", cfg, *COMPOSITE, "--output-dir", tmp_path, "--tau", "9")
        assert code == 0
        r = read_report(tmp_path / "report.txt")
        assert r["param.tau"] == "9.0" and r["param.lambda"] == "0.5" and r["param.w_max"] == "15"

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("tua=6\n")
        code, _, err = run("filter", "--config", cfg)
        assert code == 2 and "tua" in err

    def test_invalid_lambda(self, tmp_path):
        code, _, err = run("pipeline", *COMPOSITE, "--output-dir", tmp_path, "--lambda", "1.5")
        assert code == 2 and "lambda" in err
        assert list(tmp_path.iterdir()) == []

    @pytest.mark.parametrize("flag,value", [("--w-min", "1"), ("--tau", "0"), ("--bins", "x"),
                                            ("--method", "jerk"), ("--thresholds", "5,-1"), ("--seed", "-3")])
    def test_invalid_values(self, tmp_path, flag, value):
        assert run("filter", "--input", "x", "--output", "y", flag, value)[0] == 2

    def test_defaults(self):
        cfg = cli.PipelineConfig({})
        assert cfg.echo() == {
            "w_base": "5", "w_min": "5", "w_max": "20", "percentile": "75.0", "method": "covariance",
            "tau": "8.0", "c": "5", "gamma": "2.0", "lambda": "0.75", "epsilon": "1e-08", "bins": "32",
            "bandwidth": "1.0", "eps_floor": "1e-09", "thresholds": "10,5,1"}

    def test_example_config_is_defaults(self, tmp_path):
        values = cli.read_config_file(FIXTURES / "pipeline.cfg")
        assert cli.PipelineConfig(values).echo() == cli.PipelineConfig({}).echo()


def manual_composition(out_dir, extra=()):
    raw, truth, events = (str(p) for p in COMPOSITE[1::2])
    assert run("filter", "--input", raw, "--output", out_dir / "filtered.csv", *extra)[0] == 0
    assert run("refine", "--input", out_dir / "filtered.csv", "--events", events,
               "--output", out_dir / "refined.csv", *extra)[0] == 0
    assert run("score", "--input", out_dir / "refined.csv", "--truth", truth, "--report", out_dir / "report.txt",
               "--plot-data", out_dir / "plot.csv", "--raw", raw, *extra)[0] == 0


class TestPipeline:
    @pytest.mark.parametrize("extra", [(), ("--method", "frequency", "--tau", "4", "--lambda", "0.3")])
    def test_matches_manual_composition(self, tmp_path, extra):
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir()
        b.mkdir()
        assert run("pipeline", *COMPOSITE, "--output-dir", a, *extra)[0] == 0
        manual_composition(b, extra)
        for name in ("filtered.csv", "refined.csv", "report.txt", "plot.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_outputs_and_ordering(self, tmp_path):
        assert run("pipeline", *COMPOSITE, "--output-dir", tmp_path)[0] == 0
        names = {p.name for p in tmp_path.iterdir()}
        assert names == {"raw.csv", "filtered.csv", "refined.csv", "report_raw.txt", "report_filtered.txt",
                         "report.txt", "plot.csv"}
        l2 = [read_report(tmp_path / f)["l2"] for f in ("report_raw.txt", "report_filtered.txt", "report.txt")]
        assert l2[2] <= l2[1] <= l2[0]
        assert (tmp_path / "raw.csv").read_bytes() == (FIXTURES / "composite_raw.csv").read_bytes()

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir()
        b.mkdir()
        run("pipeline", *COMPOSITE, "--output-dir", a)
        run("pipeline", *COMPOSITE, "--output-dir", b)
        for p in a.iterdir():
            assert p.read_bytes() == (b / p.name).read_bytes()

    def test_missing_output_dir(self, tmp_path):
        code, _, err = run("pipeline", *COMPOSITE, "--output-dir", tmp_path / "gone")
        assert code == 1 and "gone" in err


class TestExitCodes:
    def test_invariant_breach(self, tmp_path, monkeypatch):
        def broken(traj, params):
            return traj, np.full(len(traj), 4)

        monkeypatch.setattr(cli, "filter_with_windows", broken)
        code, _, err = run("filter", "--input", FIXTURES / "constant.csv", "--output", tmp_path / "o.csv")
        assert code == 3 and "window length" in err
        assert not (tmp_path / "o.csv").exists()

    def test_unexpected_exception(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise RuntimeError("boom")

        monkeypatch.setattr(cli, "evaluate", boom)
        code, _, err = run("score", "--input", FIXTURES / "constant.csv", "--truth", FIXTURES / "constant.csv",
                           "--report", tmp_path / "r.txt")
        assert code == 3 and "boom" in err

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "pupilpost", "filter", "--input", str(tmp_path / "none.csv"),
                               "--output", str(tmp_path / "o.csv")], capture_output=True, text=True)
        assert proc.returncode == 1 and "none.csv" in proc.stderr


def test_slot_length_matches_fixture_period():
    assert read_trajectory(FIXTURES / "composite_raw.csv").sample_period == SLOT_US
