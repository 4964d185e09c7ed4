import csv
import io
import json

import numpy as np
import pytest

from macfusion import __version__
from macfusion.cli import fmt, main, read_counts_csv
from macfusion.config import ConfigError

FOOT = ["--pd-list", "0.5,0.4,0.3", "--pf-list", "0.05,0.1,0.4"]


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestFormatting:
    def test_round_trip_digits(self):
        v = 0.1 + 0.2
        assert float(fmt(v)) == v
        assert fmt(3) == "3" and fmt(None) == "" and fmt(True) == "1"


class TestPmf:
    def test_three_sensor(self, capsys):
        code, out, _ = run(capsys, "pmf", *FOOT)
        assert code == 0
        rows = rows_of(out)
        assert rows[0] == ["ell", "prob_h0", "prob_h1"]
        np.testing.assert_allclose([float(r[2]) for r in rows[1:]], [0.21, 0.44, 0.29, 0.06], atol=1e-15)

    def test_sidecar(self, tmp_path, capsys):
        target = tmp_path / "pmf.csv"
        code, out, _ = run(capsys, "pmf", "--k", "4", "--pd", "0.5", "--pf", "0.05", "-o", str(target))
        assert code == 0 and out == ""
        meta = json.loads((tmp_path / "pmf.csv.meta.json").read_text())
        assert meta["version"] == __version__ and meta["subcommand"] == "pmf"
        assert meta["config"]["ensemble"]["k"] == 4
        assert "seed" in meta
        assert target.read_text().startswith("ell,prob_h0,prob_h1\n")


class TestCheckOptimality:
    def test_three_sensor_certified(self, capsys):
        code, out, err = run(capsys, "check-optimality", *FOOT)
        assert code == 0
        assert "lambda(l)" in err
        lam = [float(r[3]) for r in rows_of(out)[1:]]
        np.testing.assert_allclose(lam, [-0.893, 0.032, 1.592, 3.401], atol=5e-4)

    def test_reversed_sensor(self, capsys):
        code, _, err = run(capsys, "check-optimality", "--k", "1", "--pd", "0.3", "--pf", "0.4")
        assert code == 2
        assert "not certified" in err

    def test_config_error(self, capsys):
        code, _, err = run(capsys, "check-optimality", "--k", "2", "--pd", "1.0", "--pf", "0.1")
        assert code == 1 and "config error" in err

    def test_both_ensemble_forms(self, capsys):
        code, _, _ = run(capsys, "pmf", "--k", "2", "--pd", "0.5", "--pf", "0.1", *FOOT)
        assert code == 1

    def test_singular_counts(self, tmp_path, capsys):
        p = tmp_path / "counts.csv"
        p.write_text("ell,prob_h0,prob_h1\n0,1.0,0.5\n1,0.0,0.5\n")
        code, _, err = run(capsys, "check-optimality", "--counts", str(p))
        assert code == 3 and "numerical" in err

    def test_counts_file(self, tmp_path, capsys):
        p = tmp_path / "counts.csv"
        p.write_text("ell,prob_h0,prob_h1\n0,0.9,0.4\n1,0.05,0.0\n2,0.04,0.0\n3,0.01,0.6\n")
        code, _, err = run(capsys, "check-optimality", "--counts", str(p))
        assert code == 2 and "failing l: [1, 2]" in err

    def test_counts_round_trip(self, tmp_path, capsys):
        target = tmp_path / "pmf.csv"
        assert main(["pmf", *FOOT, "-o", str(target)]) == 0
        d1, d0 = read_counts_csv(str(target))
        np.testing.assert_allclose(d1.p, [0.21, 0.44, 0.29, 0.06], atol=1e-15)
        code, _, _ = run(capsys, "check-optimality", "--counts", str(target))
        assert code == 0

    def test_bad_counts_file(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("ell,prob_h0,prob_h1\n0,0.5,0.5\n2,0.5,0.5\n")
        with pytest.raises(ConfigError):
            read_counts_csv(str(p))
        with pytest.raises(ConfigError):
            read_counts_csv(str(tmp_path / "missing.csv"))


class TestCurves:
    def test_llr_curve(self, capsys):
        code, out, _ = run(capsys, "llr-curve", *FOOT, "--n-div", "2", "--gamma-points", "50")
        assert code == 0
        vals = np.array([[float(v) for v in r] for r in rows_of(out)[1:]])
        assert vals.shape == (50, 2)
        assert np.all(np.diff(vals[:, 1]) > 0)

    def test_sample(self, capsys):
        code, out, _ = run(capsys, "sample", "--k", "5", "--pd", "0.5", "--pf", "0.05", "--trials", "7")
        assert code == 0
        rows = rows_of(out)
        assert rows[0] == ["trial", "hypothesis", "ell", "psi"]
        assert len(rows) == 15
        assert {r[1] for r in rows[1:]} == {"H0", "H1"}

    def test_roc_mc(self, capsys):
        code, out, _ = run(capsys, "roc-mc", "--k", "10", "--pd", "0.5", "--pf", "0.05", "--trials", "500", "--power-mode", "ipc", "--snr-db", "15")
        assert code == 0
        rows = rows_of(out)
        assert rows[0] == ["threshold", "pf0", "pd0", "pf0_stderr", "pd0_stderr"]
        assert len(rows) == 513

    def test_roc_asymptotic(self, capsys):
        code, out, _ = run(capsys, "roc-asymptotic", "--k", "1", "--pd", "0.5", "--pf", "0.05", "--power-mode", "ipc", "--gamma", "0,0.6931471805599453")
        assert code == 0
        rows = rows_of(out)
        assert rows[0] == ["gamma", "pf0", "pd0"]
        assert float(rows[1][1]) == 1.0
        assert float(rows[2][1]) == pytest.approx(0.5, abs=1e-15)
        assert float(rows[2][2]) == pytest.approx(2**-0.1, rel=1e-14)

    def test_raw_mode_uses_sweep_mode(self, tmp_path, capsys):
        code, out, _ = run(capsys, "roc-asymptotic", "--k", "1", "--pd", "0.5", "--pf", "0.05", "--gamma", "1")
        assert code == 0 and float(rows_of(out)[1][1]) == pytest.approx(np.exp(-1.0))
        cfg = tmp_path / "raw.json"
        cfg.write_text(json.dumps({"ensemble": {"k": 1, "pd": 0.5, "pf": 0.05}, "sweep": {"mode": "raw"}}))
        code, _, _ = run(capsys, "roc-asymptotic", "--config", str(cfg))
        assert code == 1
        code, _, _ = run(capsys, "roc-asymptotic", "--k", "1", "--pd", "0.5", "--pf", "0.05", "--mode", "tpc", "--snr-db", "15", "--gamma-points", "10")
        assert code == 0

    def test_jdiv(self, capsys):
        code, out, _ = run(capsys, "jdiv", "--k", "1", "--pd", "0.5", "--pf", "0.05", "--power-mode", "ipc")
        assert code == 0
        assert abs(float(out.strip()) - 8.1) <= 1e-12

    def test_jdiv_needs_iid(self, capsys):
        code, _, _ = run(capsys, "jdiv", *FOOT, "--power-mode", "ipc")
        assert code == 1


class TestConfigPrecedence:
    def test_file_env_flags(self, tmp_path, monkeypatch, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"ensemble": {"k": 3, "pd": 0.5, "pf": 0.05}, "mc": {"trials": 20, "seed": 1}}))
        out_cfg = tmp_path / "a.csv"
        monkeypatch.setenv("MACFUSION_SEED", "77")
        assert main(["sample", "--config", str(cfg), "-o", str(out_cfg)]) == 0
        meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
        assert meta["seed"] == 77
        assert main(["sample", "--config", str(cfg), "--seed", "5", "-o", str(out_cfg)]) == 0
        meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
        assert meta["seed"] == 5 and meta["config"]["mc"]["trials"] == 20

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        code, _, _ = run(capsys, "pmf", "--config", str(cfg))
        assert code == 1


class TestReproducibility:
    ARGS = ["roc-mc", "--k", "20", "--pd", "0.5", "--pf", "0.05", "--trials", "3000", "--power-mode", "tpc", "--snr-db", "15", "--seed", "13"]

    def test_byte_identical_across_workers(self, tmp_path):
        bodies = []
        for w in (1, 2, 4):
            target = tmp_path / f"w{w}.csv"
            assert main([*self.ARGS, "--workers", str(w), "-o", str(target)]) == 0
            bodies.append(target.read_bytes())
        assert bodies[0] == bodies[1] == bodies[2]

    def test_env_worker_override(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main([*self.ARGS, "-o", str(a)]) == 0
        monkeypatch.setenv("MACFUSION_WORKERS", "3")
        assert main([*self.ARGS, "-o", str(b)]) == 0
        assert json.loads((tmp_path / "b.csv.meta.json").read_text())["workers"] == 3
        assert a.read_bytes() == b.read_bytes()


class TestReproduce:
    def test_fig1(self, tmp_path, capsys):
        target = tmp_path / "fig1.csv"
        code, _, _ = run(capsys, "reproduce", "fig1", "--gamma-points", "20", "-o", str(target))
        assert code == 0
        rows = rows_of(target.read_text())
        assert rows[0] == ["mode", "n_div", "gamma", "pf0", "pd0"]
        keys = {(r[0], int(r[1])) for r in rows[1:]}
        assert keys == {(m, n) for m in ("ipc", "tpc") for n in (1, 2, 4, 8)}

    def test_fig2_small(self, tmp_path, capsys):
        target = tmp_path / "fig2.csv"
        code, _, err = run(capsys, "reproduce", "fig2", "--trials", "2000", "--k-list", "10,20", "--n-list", "1", "-o", str(target))
        assert code == 0
        assert "K=10 N=1" in err and "K=20 N=1" in err
        rows = rows_of(target.read_text())
        assert {r[0] for r in rows[1:]} == {"mc", "large_system"}
        meta = json.loads((tmp_path / "fig2.csv.meta.json").read_text())
        assert set(meta["results"]) == {"K=10,N=1", "K=20,N=1", "figure_parameters"}
        assert meta["results"]["figure_parameters"]["k_list"] == [10, 20]
