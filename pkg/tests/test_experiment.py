import math

import numpy as np
import pytest

from ofdmloc import (account_complexity, account_transmission, ambiguity_function,
                     build_scene, main_lobe_width, make_grid, run_sweep, run_trial)
from conftest import table1_config, tiny_config


def loc_cfg(**overrides):
    """Localization-capable small config: fine enough grid to be meaningful."""
    base = dict(Q=16, D=4, N=4, delta_f=480e3, r_srx=150.0, r_s=60.0,
                n_grid_per_axis=8, alpha_oversample=1, data_constellation=4,
                snr_db=(5.0, 20.0), n_mc=2, base_seed=3)
    base.update(overrides)
    return tiny_config(**base)


class TestRunTrial:
    def test_deterministic(self):
        cfg = loc_cfg()
        a = run_trial(cfg, 10.0, ["P", "HDD-centr", "MML-fast"], seed=5)
        b = run_trial(cfg, 10.0, ["P", "HDD-centr", "MML-fast"], seed=5)
        assert a.sq_errors == b.sq_errors
        assert a.ser_centr == b.ser_centr and a.mae_centr == b.mae_centr
        for k in a.estimates:
            np.testing.assert_array_equal(a.estimates[k], b.estimates[k])
        np.testing.assert_array_equal(a.ue_position, b.ue_position)

    def test_pilot_only_has_no_demod_metrics(self):
        res = run_trial(loc_cfg(), 10.0, ["P"], seed=1)
        assert res.ser_centr is None and res.mae_centr is None
        assert set(res.estimates) == {"P"}

    def test_noise_free_peak_at_truth(self):
        cfg = loc_cfg(Q=32, n_grid_per_axis=16)
        res = run_trial(cfg, math.inf, ["P", "PD", "HDD-centr", "MML-fast"], seed=2)
        assert res.sigma2 == 0.0
        cell = make_grid(cfg).cell
        for est, sq in res.sq_errors.items():
            assert math.sqrt(sq) <= cell, f"{est} off by {math.sqrt(sq):.3f} m"

    def test_unknown_estimator_rejected(self):
        with pytest.raises(ValueError, match="bogus"):
            run_trial(loc_cfg(), 10.0, ["bogus"], seed=0)

    def test_mml_opt_cap_enforced(self):
        cfg = loc_cfg(Q=16, D=4, data_constellation=4)  # 4^64 hypotheses
        with pytest.raises(ValueError, match="cap"):
            run_trial(cfg, 10.0, ["MML-opt"], seed=0)

    def test_mml_opt_runs_at_toy_scale(self):
        cfg = loc_cfg(Q=2, D=1, N=2, n_grid_per_axis=4, data_constellation=4)
        res = run_trial(cfg, 20.0, ["MML-opt", "MML-approx"], seed=4)
        assert {"MML-opt", "MML-approx"} <= set(res.estimates)

    def test_demod_only_mode(self):
        res = run_trial(loc_cfg(), 15.0, [], seed=6, with_demod=True)
        assert res.estimates == {}
        assert res.ser_centr is not None and res.mae_distr is not None
        assert res.ser_per_node.shape == (4,)


class TestRunSweep:
    def test_single_trial_rmse_is_error_norm(self):
        cfg = loc_cfg(n_mc=1, snr_db=(10.0,))
        res = run_sweep(cfg, ["P"], threads=1)
        trial = run_trial(cfg, 10.0, ["P"], seed=cfg.base_seed)
        assert res.row("P", 10.0).rmse_m == pytest.approx(math.sqrt(trial.sq_errors["P"]))
        assert res.row("P", 10.0).rmse_lambda == pytest.approx(
            res.row("P", 10.0).rmse_m / cfg.lambda_c)

    def test_sweep_determinism_and_thread_independence(self):
        cfg = loc_cfg(n_mc=4, snr_db=(5.0, 15.0))
        a = run_sweep(cfg, ["P", "HDD-centr"], threads=1)
        b = run_sweep(cfg, ["P", "HDD-centr"], threads=2)
        assert a.rows == b.rows

    def test_row_metadata(self):
        cfg = loc_cfg(n_mc=2, snr_db=(10.0,))
        res = run_sweep(cfg, ["SDD-centr"], threads=1)
        row = res.row("SDD-centr", 10.0)
        assert row.n_trials == 2
        assert row.ser is None          # soft decisions carry no SER
        assert row.mae is not None
        assert row.tx_scalars_per_node == account_transmission(cfg, "SDD-centr").total_scalars


class TestDemodStatistics:
    n_trials = 250

    def _metrics(self, cfg, snr):
        sers_c, sers_d, maes_c = [], [], []
        for t in range(self.n_trials):
            res = run_trial(cfg, snr, [], seed=cfg.base_seed + t, with_demod=True)
            sers_c.append(res.ser_centr)
            sers_d.append(res.ser_distr)
            maes_c.append(res.mae_centr)
        return float(np.mean(sers_c)), float(np.mean(sers_d)), float(np.mean(maes_c))

    def test_centralized_beats_distributed_ser(self):
        cfg = loc_cfg(data_constellation=16)
        for snr in (10.0, 15.0):
            ser_c, ser_d, _ = self._metrics(cfg, snr)
            assert ser_c <= ser_d * 1.05 + 1e-4, (ser_c, ser_d)

    def test_ser_monotone_in_snr_and_order(self):
        cfg16 = loc_cfg(data_constellation=16)
        curve = [self._metrics(cfg16, snr)[0] for snr in (5.0, 10.0, 15.0, 20.0)]
        assert all(a >= b - 1e-3 for a, b in zip(curve, curve[1:])), curve
        cfg64 = loc_cfg(data_constellation=64)
        assert self._metrics(cfg64, 15.0)[0] >= self._metrics(cfg16, 15.0)[0]

    def test_mae_constellation_independent(self):
        maes = {}
        for M in (16, 256):
            cfg = loc_cfg(data_constellation=M, D=8)
            maes[M] = self._metrics(cfg, 12.0)[2]
        assert abs(maes[16] - maes[256]) <= 0.10 * maes[16], maes


class TestRmseOrdering:
    def test_paired_orderings_small_scale(self):
        cfg = loc_cfg(Q=16, D=4, N=4, n_grid_per_axis=12, data_constellation=16,
                      n_mc=60, snr_db=(10.0, 20.0))
        res = run_sweep(cfg, ["P", "PD", "HDD-centr", "MML-fast"], threads=2)
        for snr in cfg.snr_db:
            pd = res.row("PD", snr).rmse_m
            assert pd <= 1.05 * res.row("MML-fast", snr).rmse_m
            assert pd <= 1.05 * res.row("HDD-centr", snr).rmse_m
            assert res.row("MML-fast", snr).rmse_m <= 1.05 * res.row("P", snr).rmse_m


class TestAmbiguityFunction:
    def test_peak_values(self, rng):
        cfg = tiny_config(Q=32, N=5)
        scene = build_scene(cfg, rng)
        p = np.zeros(2)
        cut = ambiguity_function(scene, cfg, p, axis="x", coords=np.array([-10.0, 0.0, 10.0]))
        assert cut.af_coh[1] == pytest.approx(cfg.N * cfg.Q, rel=1e-9)
        assert cut.af_noncoh[1] == pytest.approx(cfg.N * cfg.Q ** 2, rel=1e-9)

    def test_noncoherent_peak_dominates(self, rng):
        cfg = tiny_config(Q=64, N=5, r_s=60.0)
        scene = build_scene(cfg, rng)
        cut = ambiguity_function(scene, cfg, np.zeros(2), n_samples=501)
        assert np.all(cut.af_noncoh <= cfg.N * cfg.Q ** 2 * (1 + 1e-12))

    def test_single_subcarrier_is_flat(self, rng):
        cfg = tiny_config(Q=1, N=4)
        scene = build_scene(cfg, rng)
        cut = ambiguity_function(scene, cfg, np.zeros(2), n_samples=101)
        np.testing.assert_allclose(cut.af_noncoh, cfg.N, rtol=1e-12)

    def test_main_lobe_width_halves_when_q_doubles(self):
        rng = np.random.default_rng(0)
        cfg32 = tiny_config(Q=32, N=5, delta_f=240e3, r_s=200.0, r_srx=250.0)
        cfg64 = tiny_config(Q=64, N=5, delta_f=240e3, r_s=200.0, r_srx=250.0)
        scene = build_scene(cfg32, rng)
        coords = np.linspace(-50, 50, 4001)
        w = {}
        for cfg in (cfg32, cfg64):
            cut = ambiguity_function(scene, cfg, np.zeros(2), coords=coords)
            w[cfg.Q] = main_lobe_width(coords, cut.af_coh, 1 / math.sqrt(2))
        ratio = w[64] / w[32]
        assert 0.5 * 0.75 <= ratio <= 0.5 * 1.25, w

    def test_y_axis_cut(self, rng):
        cfg = tiny_config(Q=16, N=3)
        scene = build_scene(cfg, rng)
        cut = ambiguity_function(scene, cfg, np.array([5.0, -3.0]), axis="y", n_samples=21)
        np.testing.assert_allclose(cut.points[:, 0], 5.0)


class TestTransmissionAccounting:
    def test_full_scale_worked_comparison(self):
        cfg = table1_config()  # Q=128, D=35, 40^2 nominal grid
        assert account_transmission(cfg, "P").grid_scalars == 1600
        assert account_transmission(cfg, "HDD-distr").grid_scalars == 1600
        assert account_transmission(cfg, "P").data_coeffs == 0
        for est in ("MML-fast", "HDD-centr", "SDD-centr"):
            assert account_transmission(cfg, est).data_coeffs == 4480

    def test_no_data_degenerates_to_pilot_tally(self):
        cfg = tiny_config(D=0)
        for est in ("P", "MML-fast", "HDD-centr", "HDD-distr"):
            tally = account_transmission(cfg, est)
            assert tally.data_coeffs == 0
            assert tally.total_scalars == cfg.n_grid_per_axis ** 2

    def test_grid_scaling(self):
        cfg = table1_config()
        base = account_transmission(cfg, "P", n_grid_points=1600)
        doubled = account_transmission(cfg, "P", n_grid_points=3200)
        assert doubled.total_scalars == 2 * base.total_scalars
        mml = account_transmission(cfg, "MML-fast", n_grid_points=1600)
        mml2 = account_transmission(cfg, "MML-fast", n_grid_points=3200)
        assert mml2.data_scalars == mml.data_scalars


class TestComplexityAccounting:
    def test_fast_data_ops_scale_with_sqrt_order(self):
        counts = {}
        for M in (64, 256):
            cfg = loc_cfg(data_constellation=M, n_grid_per_axis=6)
            rows = {r.step: r for r in account_complexity(cfg, "MML-fast")}
            counts[M] = rows["localization_data_symbol"].measured_ops
        assert counts[256] / counts[64] == pytest.approx(2.0, rel=0.10)

    def test_plain_data_ops_scale_with_order(self):
        counts = {}
        for M in (64, 256):
            cfg = loc_cfg(data_constellation=M, n_grid_per_axis=6)
            rows = {r.step: r for r in account_complexity(cfg, "MML-approx")}
            counts[M] = rows["localization_data_symbol"].measured_ops
        assert counts[256] / counts[64] == pytest.approx(4.0, rel=0.10)

    def test_hdd_localization_matches_pilot_only(self):
        cfg = loc_cfg(n_grid_per_axis=6)
        p_rows = {r.step: r for r in account_complexity(cfg, "P")}
        hdd_rows = {r.step: r for r in account_complexity(cfg, "HDD-centr")}
        assert p_rows["localization_pilot"].measured_ops == \
            hdd_rows["localization_pilot"].measured_ops
        assert "channel_estimation" not in p_rows
        assert "soft_data_estimation" not in p_rows

    def test_mml_fast_step_rows(self):
        cfg = loc_cfg(n_grid_per_axis=6)
        rows = account_complexity(cfg, "MML-fast")
        steps = [r.step for r in rows]
        assert {"symbol_equalization", "localization_pilot",
                "localization_data_combine", "localization_data_symbol"} <= set(steps)
        for r in rows:
            assert r.measured_ops == r.instantiated

    def test_equalization_scales_with_q(self):
        a = {r.step: r for r in account_complexity(loc_cfg(Q=16, n_grid_per_axis=6), "P")}
        b = {r.step: r for r in account_complexity(loc_cfg(Q=32, n_grid_per_axis=6), "P")}
        assert b["symbol_equalization"].measured_ops == \
            2 * a["symbol_equalization"].measured_ops
