"""Monte Carlo harness, metrics, ambiguity functions, and cost accounting.

A trial is a deterministic function of (config, SNR, seed): one scene,
channel, frame, and noise realization shared by every requested estimator,
so estimator comparisons are paired. A sweep is a parallel map over
(SNR, trial) pairs followed by an order-independent reduction.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import equalize as eq
from .channel import observe, steering_phases, synthesize_channel
from .estimators import (ObjectiveContext, objective_equalized, objective_mml_approx,
                         objective_mml_fast, objective_mml_optimal, objective_pilot)
from .model import C_LIGHT, Scene, SystemConfig, build_resource_grid, build_scene, config_to_dict
from .ops import OpCounter
from .search import grid_search, make_grid, nelder_mead_refine

ESTIMATOR_NAMES = ("P", "PD", "HDD-centr", "HDD-distr", "SDD-centr", "SDD-distr",
                   "MML-fast", "MML-approx", "MML-opt")

_DD_NAMES = ("HDD-centr", "HDD-distr", "SDD-centr", "SDD-distr")
_MML_APPROX_NAMES = ("MML-fast", "MML-approx")
_CENTRAL_DATA_FORWARDING = ("MML-fast", "MML-approx", "MML-opt", "HDD-centr", "SDD-centr")

# marginal-likelihood objectives need sigma2 > 0; noise-free trials clamp the
# estimator's noise-variance input to this floor (observations stay exact)
MML_SIGMA2_FLOOR = 1e-12

_EQ_KEY = {"PD": "genie", "HDD-centr": "hdd_centr", "HDD-distr": "hdd_distr",
           "SDD-centr": "sdd_centr", "SDD-distr": "sdd_distr"}


@dataclass(frozen=True)
class TransmissionTally:
    """Per-node forwarding cost of one estimator, following the per-grid-point
    correlation accounting: every node ships its pilot-path correlation table
    (one real scalar per nominal grid point); centralized data processing
    additionally ships the raw data cells (one complex coefficient each)."""

    estimator: str
    grid_scalars: int
    data_coeffs: int

    @property
    def data_scalars(self) -> int:
        return 2 * self.data_coeffs

    @property
    def total_scalars(self) -> int:
        return self.grid_scalars + self.data_scalars


def account_transmission(cfg: SystemConfig, estimator: str,
                         n_grid_points: int | None = None) -> TransmissionTally:
    """Scalars each node forwards to the fusion center for one estimator.

    Uses the nominal configured grid (n_grid_per_axis^2) unless overridden;
    with D = 0 every estimator degenerates to the pilot-only tally.
    """
    _check_estimators([estimator])
    if n_grid_points is None:
        n_grid_points = cfg.n_grid_per_axis ** 2
    data = cfg.Q * cfg.D if (estimator in _CENTRAL_DATA_FORWARDING and cfg.D > 0) else 0
    return TransmissionTally(estimator=estimator, grid_scalars=int(n_grid_points),
                             data_coeffs=int(data))


@dataclass
class TrialResult:
    seed: int
    snr_db: float
    sigma2: float
    ue_position: np.ndarray
    estimates: dict[str, np.ndarray]
    sq_errors: dict[str, float]
    ser_centr: float | None = None
    ser_distr: float | None = None
    ser_per_node: np.ndarray | None = None
    mae_centr: float | None = None
    mae_distr: float | None = None
    tx: dict[str, TransmissionTally] = field(default_factory=dict)
    op_counts: dict[str, dict[str, int]] | None = None


def _check_estimators(names):
    unknown = [n for n in names if n not in ESTIMATOR_NAMES]
    if unknown:
        raise ValueError(f"unknown estimator(s) {unknown}; valid names: {list(ESTIMATOR_NAMES)}")


def _trial_rngs(seed: int):
    # independent child streams so realizations pair across constellations
    # and estimator sets (noise draws never shift when the frame changes)
    return [np.random.default_rng([int(seed), k]) for k in range(4)]


def run_trial(cfg: SystemConfig, snr_db: float, estimator_set, seed: int,
              with_demod: bool | None = None, count_ops: bool = False,
              mml_opt_cap: int = 65536) -> TrialResult:
    """One full pipeline pass; all estimators share the identical realization."""
    estimators = [n for n in ESTIMATOR_NAMES if n in set(estimator_set)]
    _check_estimators(estimator_set)
    sigma2 = cfg.sigma2_for(snr_db) if math.isfinite(snr_db) else 0.0

    rng_scene, rng_chan, rng_frame, rng_noise = _trial_rngs(seed)
    scene = build_scene(cfg, rng_scene)
    chan = synthesize_channel(scene, cfg, rng_chan)
    frame = build_resource_grid(cfg, rng_frame)
    obs = observe(chan, frame, sigma2, rng_noise)

    want_demod = with_demod if with_demod is not None else any(n in _DD_NAMES for n in estimators)
    result = TrialResult(seed=seed, snr_db=snr_db, sigma2=sigma2,
                         ue_position=scene.ue_position.copy(), estimates={}, sq_errors={})

    equalized = {"pilot": eq.pilot_equalize(obs.Y_P, frame.X)}
    if "PD" in estimators:
        equalized["genie"] = eq.genie_equalize(equalized["pilot"], obs.Y_D, frame.S)
    if want_demod and cfg.D > 0:
        _demodulate(cfg, frame, obs, sigma2, equalized, estimators, result)
    elif want_demod:
        for name in _DD_NAMES:
            if name in estimators:
                equalized[_EQ_KEY[name]] = equalized["pilot"]
        result.ser_centr = result.ser_distr = 0.0
        result.mae_centr = result.mae_distr = 0.0

    mml_sigma2 = max(sigma2, MML_SIGMA2_FLOOR)
    counters = {name: OpCounter() for name in estimators} if count_ops else {}

    grid = make_grid(cfg)
    for name in estimators:
        objective = _build_objective(name, cfg, scene, equalized, frame, obs,
                                     mml_sigma2, counters.get(name), mml_opt_cap)
        best_point, _ = grid_search(objective, grid)
        if count_ops:
            # refinement cost depends on the solver, not the estimator; keep
            # the localization counters to the grid phase
            objective = _build_objective(name, cfg, scene, equalized, frame, obs,
                                         mml_sigma2, None, mml_opt_cap)
        p_hat = nelder_mead_refine(objective, best_point, initial_scale=grid.cell)
        result.estimates[name] = p_hat
        result.sq_errors[name] = float(np.sum((p_hat - scene.ue_position) ** 2))
        result.tx[name] = account_transmission(cfg, name)

    if count_ops:
        _count_frontend_ops(cfg, frame, obs, sigma2, estimators, counters)
        result.op_counts = {n: c.as_dict() for n, c in counters.items()}
    return result


def _demodulate(cfg, frame, obs, sigma2, equalized, estimators, result):
    """LMMSE channel + data estimation, hard decisions, DD equalization, metrics."""
    H_hat = eq.estimate_channel_lmmse(obs.Y_P, frame.X, sigma2, cfg.gamma)
    soft_c = eq.soft_data_estimate(H_hat, obs.Y_D, sigma2, "centralized")
    soft_d = eq.soft_data_estimate(H_hat, obs.Y_D, sigma2, "distributed")
    hard_c = eq.hard_decision(soft_c, frame.c_map)
    hard_d = eq.hard_decision(soft_d, frame.c_map)

    result.ser_centr = eq.symbol_error_rate(hard_c, frame.S)
    result.ser_per_node = np.array([eq.symbol_error_rate(hard_d[n], frame.S)
                                    for n in range(cfg.N)])
    result.ser_distr = float(result.ser_per_node.mean())
    result.mae_centr = eq.mean_abs_error(soft_c, frame.S)
    result.mae_distr = eq.mean_abs_error(soft_d, frame.S[None, :, :])

    weights = {"hdd_centr": hard_c, "hdd_distr": hard_d,
               "sdd_centr": soft_c, "sdd_distr": soft_d}
    for name in _DD_NAMES:
        if name in estimators:
            key = _EQ_KEY[name]
            equalized[key] = eq.dd_equalize(equalized["pilot"], obs.Y_D, weights[key])


def _build_objective(name, cfg, scene, equalized, frame, obs, sigma2, counter, cap):
    ctx = ObjectiveContext(cfg=cfg, nodes=scene.node_positions, equalized=equalized,
                           pilot_energy=frame.pilot_energy, data_obs=obs.Y_D,
                           sigma2=sigma2, gamma=cfg.gamma, c_map=frame.c_map,
                           counter=counter)
    if name == "P":
        return lambda pts: objective_pilot(ctx, pts)
    if name in _EQ_KEY:
        key = _EQ_KEY[name]
        return lambda pts: objective_equalized(ctx, pts, key)
    if name == "MML-fast":
        return lambda pts: objective_mml_fast(ctx, pts)
    if name == "MML-approx":
        return lambda pts: objective_mml_approx(ctx, pts)
    if name == "MML-opt":
        Y_full = np.concatenate([obs.Y_P, obs.Y_D], axis=2)

        def opt_objective(pts):
            pts_arr = np.asarray(pts, dtype=float)
            if pts_arr.ndim == 1:
                return objective_mml_optimal(Y_full, frame.X, pts_arr, scene, cfg,
                                             sigma2, cfg.gamma, frame.c_map, cap=cap)
            return np.array([opt_objective(p) for p in pts_arr])

        return opt_objective
    raise ValueError(f"unknown estimator {name!r}")


def _count_frontend_ops(cfg, frame, obs, sigma2, estimators, counters):
    """Re-run each estimator's pre-localization steps against its own counter.

    The shared pipeline computes these artifacts once, but the accounting is
    per estimator (each architecture would run its own front end).
    """
    for name in estimators:
        c = counters[name]
        eq.pilot_equalize(obs.Y_P, frame.X, counter=c)
        if name == "PD":
            eq.genie_equalize(np.zeros((cfg.N, cfg.Q), complex), obs.Y_D, frame.S, counter=c)
        if name in _DD_NAMES and cfg.D > 0:
            H_hat = eq.estimate_channel_lmmse(obs.Y_P, frame.X, sigma2, cfg.gamma, counter=c)
            mode = "centralized" if name.endswith("centr") else "distributed"
            soft = eq.soft_data_estimate(H_hat, obs.Y_D, sigma2, mode, counter=c)
            if name.startswith("HDD"):
                soft = eq.hard_decision(soft, frame.c_map, counter=c)
            eq.dd_equalize(np.zeros((cfg.N, cfg.Q), complex), obs.Y_D, soft, counter=c)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    estimator: str
    snr_db: float
    rmse_m: float
    rmse_lambda: float
    ser: float | None
    mae: float | None
    n_trials: int
    tx_scalars_per_node: int


@dataclass
class SweepResult:
    config: dict
    estimators: tuple[str, ...]
    snr_db: tuple[float, ...]
    n_trials: int
    rows: dict[tuple[str, float], SweepRow]

    def row(self, estimator: str, snr_db: float) -> SweepRow:
        return self.rows[(estimator, float(snr_db))]

    def rmse_curve(self, estimator: str) -> np.ndarray:
        return np.array([self.rows[(estimator, s)].rmse_m for s in self.snr_db])

    def ser_curve(self, estimator: str) -> np.ndarray:
        return np.array([_nan_if_none(self.rows[(estimator, s)].ser) for s in self.snr_db])

    def mae_curve(self, estimator: str) -> np.ndarray:
        return np.array([_nan_if_none(self.rows[(estimator, s)].mae) for s in self.snr_db])

    def iter_rows(self):
        for est in self.estimators:
            for s in self.snr_db:
                yield self.rows[(est, s)]


def _nan_if_none(v):
    return math.nan if v is None else v


def _trial_task(args):
    cfg, snr_db, estimators, seed, with_demod = args
    return run_trial(cfg, snr_db, estimators, seed, with_demod=with_demod)


def default_thread_count() -> int:
    env = os.environ.get("OFDMLOC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(cfg: SystemConfig, estimator_set, threads: int | None = None,
              with_demod: bool | None = None) -> SweepResult:
    """n_mc trials per SNR point; RMSE/SER/MAE aggregated per estimator.

    Trial t uses seed base_seed + t at every SNR point, so curves are paired
    across SNRs and across estimator sets/constellations with the same base
    seed. Aggregation order is fixed, independent of the worker count.
    """
    estimators = tuple(n for n in ESTIMATOR_NAMES if n in set(estimator_set))
    _check_estimators(estimator_set)
    if threads is None:
        threads = default_thread_count()
    tasks = [(cfg, float(snr), estimators, cfg.base_seed + t, with_demod)
             for snr in cfg.snr_db for t in range(cfg.n_mc)]
    if threads <= 1 or len(tasks) == 1:
        results = [_trial_task(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (threads * 16))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_trial_task, tasks, chunksize=chunk))

    by_snr: dict[float, list[TrialResult]] = {float(s): [] for s in cfg.snr_db}
    for res in results:
        by_snr[res.snr_db].append(res)

    rows = {}
    lam = cfg.lambda_c
    for est in estimators:
        tally = account_transmission(cfg, est)
        for snr in cfg.snr_db:
            trials = by_snr[float(snr)]
            sq = np.array([t.sq_errors[est] for t in trials])
            rmse = float(np.sqrt(sq.mean()))
            ser, mae = _demod_metrics_for(est, trials)
            rows[(est, float(snr))] = SweepRow(
                estimator=est, snr_db=float(snr), rmse_m=rmse, rmse_lambda=rmse / lam,
                ser=ser, mae=mae, n_trials=len(trials),
                tx_scalars_per_node=tally.total_scalars)
    return SweepResult(config=config_to_dict(cfg), estimators=estimators,
                       snr_db=cfg.snr_db, n_trials=cfg.n_mc, rows=rows)


def _demod_metrics_for(est: str, trials):
    def mean_of(attr):
        vals = [getattr(t, attr) for t in trials]
        return None if any(v is None for v in vals) else float(np.mean(vals))

    if est.startswith("HDD"):
        which = "centr" if est.endswith("centr") else "distr"
        return mean_of(f"ser_{which}"), mean_of(f"mae_{which}")
    if est.startswith("SDD"):
        which = "centr" if est.endswith("centr") else "distr"
        return None, mean_of(f"mae_{which}")
    return None, None


# ---------------------------------------------------------------------------
# Ambiguity functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmbiguityCut:
    """1-D cut of the matched-filter response versus candidate position."""

    coords: np.ndarray        # varying coordinate along the cut, m
    points: np.ndarray        # (S, 2) candidate positions
    af_coh: np.ndarray        # |AF_coh|
    af_noncoh: np.ndarray     # AF_noncoh (real, >= 0)


def ambiguity_function(scene: Scene, cfg: SystemConfig, p_true, axis: str = "x",
                       coords: np.ndarray | None = None, n_samples: int = 401,
                       normalize: bool = False) -> AmbiguityCut:
    """Noise-free matched-filter response along a 1-D cut through p_true.

    Coherent: sum over nodes and subcarriers of the phase mismatch terms;
    non-coherent: per-node squared magnitude of the subcarrier sum. The peak
    values at the true position are N*Q and N*Q^2 respectively.
    """
    p_true = np.asarray(p_true, dtype=float)
    ax = {"x": 0, "y": 1}[axis]
    if coords is None:
        coords = np.linspace(-cfg.r_s, cfg.r_s, n_samples)
    coords = np.asarray(coords, dtype=float)
    pts = np.tile(p_true, (coords.size, 1))
    pts[:, ax] = coords
    d_true = np.linalg.norm(p_true - scene.node_positions, axis=1)       # (N,)
    d_cand = np.linalg.norm(pts[:, None, :] - scene.node_positions, axis=2)  # (S, N)
    delta = d_true[None, :] - d_cand
    per_q = (2.0 * math.pi * cfg.delta_f / C_LIGHT) * delta
    inner = np.exp(-1j * per_q[:, :, None] * np.arange(cfg.Q)).sum(axis=2)  # (S, N)
    af_coh = np.abs(inner.sum(axis=1))
    af_noncoh = np.sum(np.abs(inner) ** 2, axis=1)
    if normalize:
        af_coh = af_coh / af_coh.max()
        af_noncoh = af_noncoh / af_noncoh.max()
    return AmbiguityCut(coords=coords, points=pts, af_coh=af_coh, af_noncoh=af_noncoh)


def main_lobe_width(coords: np.ndarray, values: np.ndarray, level_ratio: float) -> float:
    """Width of the main lobe where `values` stays above peak * level_ratio.

    Crossings are linearly interpolated; for the 3-dB width of an amplitude
    profile use level_ratio = 1/sqrt(2)."""
    peak = int(np.argmax(values))
    thresh = values[peak] * level_ratio

    def cross(idx_range, fallback):
        prev = peak
        for i in idx_range:
            if values[i] < thresh:
                x0, x1 = coords[i], coords[prev]
                v0, v1 = values[i], values[prev]
                return x0 + (thresh - v0) * (x1 - x0) / (v1 - v0)
            prev = i
        return fallback

    left = cross(range(peak - 1, -1, -1), coords[0])
    right = cross(range(peak + 1, len(values)), coords[-1])
    return float(right - left)


# ---------------------------------------------------------------------------
# Complexity accounting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexityRow:
    estimator: str
    step: str
    measured_ops: int
    formula: str
    instantiated: int


_STEP_FORMULAS = {
    "channel_estimation": ("N*Q*P", lambda cfg, G, M: cfg.N * cfg.Q * cfg.P),
    "soft_data_estimation": ("N*Q*D", lambda cfg, G, M: cfg.N * cfg.Q * cfg.D),
    "hard_data_decision_centr": ("M*Q*D", lambda cfg, G, M: M * cfg.Q * cfg.D),
    "hard_data_decision_distr": ("N*M*Q*D", lambda cfg, G, M: cfg.N * M * cfg.Q * cfg.D),
    "symbol_equalization_pilot": ("N*Q*P", lambda cfg, G, M: cfg.N * cfg.Q * cfg.P),
    "symbol_equalization_frame": ("N*Q*(P+D)", lambda cfg, G, M: cfg.N * cfg.Q * (cfg.P + cfg.D)),
    "localization_pilot": ("G*N*Q", lambda cfg, G, M: G * cfg.N * cfg.Q),
    "localization_data_combine": ("G*Q*D*N", lambda cfg, G, M: G * cfg.Q * cfg.D * cfg.N),
    "localization_data_symbol_approx": ("G*Q*D*M", lambda cfg, G, M: G * cfg.Q * cfg.D * M),
    "localization_data_symbol_fast": ("G*Q*D*sqrt(M)", lambda cfg, G, M: G * cfg.Q * cfg.D * math.isqrt(M)),
}

_ESTIMATOR_STEPS = {
    "P": [("symbol_equalization", "symbol_equalization_pilot"),
          ("localization_pilot", "localization_pilot")],
    "PD": [("symbol_equalization", "symbol_equalization_frame"),
           ("localization_pilot", "localization_pilot")],
    "HDD-centr": [("channel_estimation", "channel_estimation"),
                  ("soft_data_estimation", "soft_data_estimation"),
                  ("hard_data_decision", "hard_data_decision_centr"),
                  ("symbol_equalization", "symbol_equalization_frame"),
                  ("localization_pilot", "localization_pilot")],
    "HDD-distr": [("channel_estimation", "channel_estimation"),
                  ("soft_data_estimation", "soft_data_estimation"),
                  ("hard_data_decision", "hard_data_decision_distr"),
                  ("symbol_equalization", "symbol_equalization_frame"),
                  ("localization_pilot", "localization_pilot")],
    "SDD-centr": [("channel_estimation", "channel_estimation"),
                  ("soft_data_estimation", "soft_data_estimation"),
                  ("symbol_equalization", "symbol_equalization_frame"),
                  ("localization_pilot", "localization_pilot")],
    "SDD-distr": [("channel_estimation", "channel_estimation"),
                  ("soft_data_estimation", "soft_data_estimation"),
                  ("symbol_equalization", "symbol_equalization_frame"),
                  ("localization_pilot", "localization_pilot")],
    "MML-approx": [("symbol_equalization", "symbol_equalization_pilot"),
                   ("localization_pilot", "localization_pilot"),
                   ("localization_data_combine", "localization_data_combine"),
                   ("localization_data_symbol", "localization_data_symbol_approx")],
    "MML-fast": [("symbol_equalization", "symbol_equalization_pilot"),
                 ("localization_pilot", "localization_pilot"),
                 ("localization_data_combine", "localization_data_combine"),
                 ("localization_data_symbol", "localization_data_symbol_fast")],
}


def account_complexity(cfg: SystemConfig, estimator: str, snr_db: float | None = None,
                       seed: int = 0) -> list[ComplexityRow]:
    """Measured per-step operation counts for one estimator on one realization,
    alongside the asymptotic formulas instantiated with the config values.

    Measured counts come from counters incremented by the real code paths
    (grid phase only; refinement depends on the solver, not the estimator).
    """
    if estimator not in _ESTIMATOR_STEPS:
        raise ValueError(f"complexity accounting not defined for {estimator!r}")
    snr = float(cfg.snr_db[0]) if snr_db is None else float(snr_db)
    trial = run_trial(cfg, snr, [estimator], seed=seed, count_ops=True)
    counts = trial.op_counts[estimator]
    grid_pts = make_grid(cfg).points.shape[0]
    M = cfg.constellation_map.max_order()
    rows = []
    for counter_key, formula_key in _ESTIMATOR_STEPS[estimator]:
        formula, instantiate = _STEP_FORMULAS[formula_key]
        rows.append(ComplexityRow(estimator=estimator, step=counter_key,
                                  measured_ops=counts.get(counter_key, 0),
                                  formula=formula,
                                  instantiated=int(instantiate(cfg, grid_pts, M))))
    return rows
