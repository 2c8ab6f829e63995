import json

import numpy as np
import pytest

from ofdmloc import config_to_dict
from ofdmloc.cli import main
from conftest import tiny_config


@pytest.fixture
def cfg_path(tmp_path):
    cfg = tiny_config(Q=8, D=2, N=3, n_grid_per_axis=4, alpha_oversample=1,
                      r_srx=150.0, r_s=60.0, delta_f=480e3,
                      snr_db=(10.0, 20.0), n_mc=3, base_seed=11)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config_to_dict(cfg)))
    return path


class TestSweepCommand:
    def test_csv_schema_and_filtering(self, cfg_path, tmp_path, capsys):
        out = tmp_path / "res.csv"
        assert main(["sweep", str(cfg_path), "--estimators", "P", "--out", str(out),
                     "--threads", "1"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "estimator,snr_db,rmse_m,rmse_lambda,ser,mae,n_trials,tx_scalars_per_node"
        body = [l.split(",") for l in lines[1:]]
        assert {row[0] for row in body} == {"P"}
        assert len(body) == 2  # one row per SNR point
        # pilot-only rows carry no SER/MAE
        assert all(row[4] == "" and row[5] == "" for row in body)
        # floats round-trip
        assert all(float(row[2]) > 0 for row in body)

    def test_manifest_rerun_is_byte_identical(self, cfg_path, tmp_path):
        out1 = tmp_path / "a.csv"
        assert main(["sweep", str(cfg_path), "--estimators", "P,HDD-centr",
                     "--out", str(out1), "--threads", "1"]) == 0
        manifest = tmp_path / "a.manifest.json"
        assert manifest.exists()
        meta = json.loads(manifest.read_text())
        assert meta["estimators"] == ["P", "HDD-centr"]
        out2 = tmp_path / "b.csv"
        assert main(["sweep", str(manifest), "--out", str(out2), "--threads", "2"]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_config_names_path(self, tmp_path, capsys):
        assert main(["sweep", str(tmp_path / "missing.json"), "--out",
                     str(tmp_path / "x.csv")]) == 2
        assert "missing.json" in capsys.readouterr().err

    def test_unknown_estimator_is_usage_error(self, cfg_path, tmp_path, capsys):
        assert main(["sweep", str(cfg_path), "--estimators", "WACKY",
                     "--out", str(tmp_path / "x.csv")]) == 2
        assert "WACKY" in capsys.readouterr().err

    def test_invalid_config_field_message(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"Q": 0}))
        assert main(["sweep", str(path), "--out", str(tmp_path / "x.csv")]) == 2
        assert "Q" in capsys.readouterr().err


class TestAfCommand:
    def test_peak_normalized_at_truth(self, cfg_path, tmp_path, capsys):
        out = tmp_path / "af.csv"
        assert main(["af", str(cfg_path), "--samples", "201", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x_m,af_coh_norm,af_noncoh_norm"
        rows = np.array([[float(v) for v in l.split(",")] for l in lines[1:]])
        mid = rows[len(rows) // 2]  # odd sample count puts x=0 in the middle
        assert mid[0] == 0.0 and mid[1] == 1.0 and mid[2] == 1.0
        assert rows[:, 1].max() == 1.0

    def test_single_subcarrier_flat_noncoherent(self, tmp_path):
        cfg = tiny_config(Q=1, N=3, r_srx=150.0, r_s=60.0)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config_to_dict(cfg)))
        out = tmp_path / "af.csv"
        assert main(["af", str(path), "--samples", "11", "--out", str(out)]) == 0
        rows = [l.split(",") for l in out.read_text().splitlines()[1:]]
        assert all(float(r[2]) == pytest.approx(1.0, rel=1e-12) for r in rows)

    def test_too_few_samples_rejected(self, cfg_path, tmp_path, capsys):
        assert main(["af", str(cfg_path), "--samples", "1",
                     "--out", str(tmp_path / "x.csv")]) == 2


class TestOracleCheckCommand:
    def test_default_run_passes(self, capsys):
        assert main(["oracle-check", "--instances", "10", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 2

    def test_zero_instances_vacuous_pass(self, capsys):
        assert main(["oracle-check", "--instances", "0"]) == 0
        assert "0 comparisons" in capsys.readouterr().out

    def test_seeded_runs_identical(self, capsys):
        main(["oracle-check", "--instances", "5", "--seed", "9"])
        first = capsys.readouterr().out
        main(["oracle-check", "--instances", "5", "--seed", "9"])
        assert capsys.readouterr().out == first


class TestComplexityCommand:
    def test_rows_and_dashes(self, cfg_path, tmp_path):
        out = tmp_path / "cx.csv"
        assert main(["complexity", str(cfg_path), "--estimators", "P,MML-fast",
                     "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "estimator,step,measured_ops,asymptotic_formula,instantiated_value"
        rows = [l.split(",") for l in lines[1:]]
        p_steps = {r[1] for r in rows if r[0] == "P"}
        assert "channel_estimation" not in p_steps
        mml_steps = {r[1] for r in rows if r[0] == "MML-fast"}
        assert len(mml_steps) >= 3
