"""Position-objective functions.

All objectives share one calling convention: a candidate position of shape
(2,) returns a scalar score, a batch of shape (G, 2) returns a (G,) score
vector. Higher is better. Every estimator is blind to per-node phase, as
required by the non-phase-synchronized array model.

The marginal-likelihood objectives are evaluated entirely in the log domain
(max-subtraction log-sum-exp, log(2 cosh x) = |x| + log1p(exp(-2|x|))) so
scores stay finite down to vanishing noise variances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .channel import steering_phases
from .model import ConstellationMap, Scene, SystemConfig
from .ops import OpCounter

_STEERING_CACHE: dict[tuple, np.ndarray] = {}
_STEERING_CACHE_SLOTS = 4
_CACHE_MIN_POINTS = 256


@dataclass(frozen=True)
class ObjectiveContext:
    """Per-trial precomputations shared by all objectives.

    ``equalized`` maps a variant name ("pilot", "genie", "hdd_centr",
    "hdd_distr", "sdd_centr", "sdd_distr") to its N x Q equalized matrix;
    only the variants a trial needs are present. ``data_obs`` carries the raw
    data tensor for the marginal-likelihood objectives.
    """

    cfg: SystemConfig
    nodes: np.ndarray                      # (N, 2)
    equalized: dict[str, np.ndarray]
    pilot_energy: float
    data_obs: np.ndarray | None = None     # (N, Q, D)
    sigma2: float | None = None
    gamma: float | None = None
    c_map: ConstellationMap | None = None
    counter: OpCounter | None = None
    chunk: int = 1024


def _as_batch(p_tilde):
    pts = np.asarray(p_tilde, dtype=float)
    if pts.ndim == 1:
        return pts[None, :], True
    return pts, False


def _steering_batch(ctx: ObjectiveContext, pts: np.ndarray) -> np.ndarray:
    """(G, N, Q) steering tensor, cached for repeated large batches (grids)."""
    if pts.shape[0] < _CACHE_MIN_POINTS:
        return steering_phases(pts, ctx.nodes, ctx.cfg)
    key = (pts.tobytes(), ctx.nodes.tobytes(), ctx.cfg.Q, ctx.cfg.delta_f)
    hit = _STEERING_CACHE.get(key)
    if hit is None:
        hit = steering_phases(pts, ctx.nodes, ctx.cfg)
        while len(_STEERING_CACHE) >= _STEERING_CACHE_SLOTS:
            _STEERING_CACHE.pop(next(iter(_STEERING_CACHE)))
        _STEERING_CACHE[key] = hit
    return hit


def _node_correlations(ctx: ObjectiveContext, Y_eq: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """chi[g, n] = sum_q conj(Y_eq[n, q]) * A(p_g)[n, q]."""
    A = _steering_batch(ctx, pts)
    if ctx.counter is not None:
        ctx.counter.add("localization_pilot", pts.shape[0] * Y_eq.size)
    return np.einsum("nq,gnq->gn", np.conj(Y_eq), A, optimize=True)


def objective_pilot(ctx: ObjectiveContext, p_tilde):
    """Non-coherent pilot correlation score sum_n |chi_n(p)|^2."""
    pts, single = _as_batch(p_tilde)
    chi = _node_correlations(ctx, ctx.equalized["pilot"], pts)
    score = np.sum(np.abs(chi) ** 2, axis=1)
    return float(score[0]) if single else score


def objective_equalized(ctx: ObjectiveContext, p_tilde, which: str):
    """Same functional form as the pilot objective on an equalized variant.

    ``which`` selects "genie" or one of the decision-directed matrices
    ("hdd_centr", "hdd_distr", "sdd_centr", "sdd_distr").
    """
    if which not in ctx.equalized or ctx.equalized[which] is None:
        raise KeyError(f"equalized variant {which!r} not present in context")
    pts, single = _as_batch(p_tilde)
    chi = _node_correlations(ctx, ctx.equalized[which], pts)
    score = np.sum(np.abs(chi) ** 2, axis=1)
    return float(score[0]) if single else score


def pilot_channel_coeff(ctx: ObjectiveContext, p_tilde):
    """Pilot-based per-node channel coefficient estimate at a candidate.

    Returns (N,) for a single candidate, (G, N) for a batch. The full
    candidate channel is this coefficient times the steering matrix.
    """
    if ctx.pilot_energy <= 0:
        raise ValueError("pilot energy must be positive")
    pts, single = _as_batch(p_tilde)
    chi = _node_correlations(ctx, ctx.equalized["pilot"], pts)
    hbar = np.conj(chi) / ctx.pilot_energy
    return hbar[0] if single else hbar


def _require_mml_inputs(ctx: ObjectiveContext):
    if ctx.sigma2 is None or ctx.sigma2 <= 0:
        raise ValueError("sigma2 must be positive for marginal-likelihood objectives")
    if ctx.gamma is None or ctx.gamma <= 0:
        raise ValueError("gamma must be positive for marginal-likelihood objectives")
    if ctx.data_obs is None or ctx.c_map is None:
        raise ValueError("context lacks data observations / constellation map")


def _mml_pilot_and_channel(ctx: ObjectiveContext, pts: np.ndarray):
    """Shared pilot term plus candidate channel pieces for the MML objectives.

    Returns (pilot_term (G,), hbar (G, N), A (G, N, Q)).
    """
    s2 = ctx.sigma2
    A = _steering_batch(ctx, pts)
    if ctx.counter is not None:
        ctx.counter.add("localization_pilot", pts.shape[0] * ctx.equalized["pilot"].size)
    chi = np.einsum("nq,gnq->gn", np.conj(ctx.equalized["pilot"]), A, optimize=True)
    coef = 1.0 / (ctx.pilot_energy / s2 + 1.0 / ctx.gamma)
    pilot_term = coef * np.sum(np.abs(chi / s2) ** 2, axis=1)
    hbar = np.conj(chi) / ctx.pilot_energy
    return pilot_term, hbar, A


def _candidate_data_stats(ctx: ObjectiveContext, hbar, A):
    """T[g, qd] = sum_n conj(Y_D)[n, q, d] * hbar[g, n] * A[g, n, q], flattened
    over cells, plus H[g] = sum_n |hbar[g, n]|^2 (q-independent since |A| = 1)."""
    G = hbar.shape[0]
    Yc = np.conj(ctx.data_obs)
    T = np.einsum("gn,gnq,nqd->gqd", hbar, A, Yc, optimize=True)
    if ctx.counter is not None:
        ctx.counter.add("localization_data_combine", G * ctx.data_obs.size)
    H = np.sum(np.abs(hbar) ** 2, axis=1)
    return T.reshape(G, -1), H


def objective_mml_approx(ctx: ObjectiveContext, p_tilde):
    """Pilot term plus per-cell marginalization over every constellation point."""
    _require_mml_inputs(ctx)
    pts, single = _as_batch(p_tilde)
    out = np.empty(pts.shape[0])
    for lo in range(0, pts.shape[0], ctx.chunk):
        out[lo:lo + ctx.chunk] = _mml_approx_chunk(ctx, pts[lo:lo + ctx.chunk])
    return float(out[0]) if single else out


def _mml_approx_chunk(ctx: ObjectiveContext, pts: np.ndarray) -> np.ndarray:
    s2 = ctx.sigma2
    score, hbar, A = _mml_pilot_and_channel(ctx, pts)
    if ctx.data_obs.size == 0:
        return score
    T, H = _candidate_data_stats(ctx, hbar, A)
    for const, mask in ctx.c_map.cell_groups():
        Tg = T[:, mask]
        if ctx.counter is not None:
            ctx.counter.add("localization_data_symbol", Tg.size * const.order)

        def exponent(s):
            return (2.0 / s2) * (s.real * Tg.real - s.imag * Tg.imag) \
                - (abs(s) ** 2 / s2) * H[:, None]

        # two-pass streaming log-sum-exp over the alphabet: memory stays at
        # O(G * cells) instead of O(M * G * cells)
        m = exponent(const.points[0])
        for s in const.points[1:]:
            np.maximum(m, exponent(s), out=m)
        acc = np.zeros_like(m)
        for s in const.points:
            acc += np.exp(exponent(s) - m)
        score = score + np.sum(m + np.log(acc), axis=1)
    return score


def objective_mml_fast(ctx: ObjectiveContext, p_tilde):
    """Square-QAM acceleration of the approximate marginal objective.

    Exactly equal to objective_mml_approx (it regroups the alphabet into
    amplitude levels per axis); requires every data cell to use square QAM.
    """
    _require_mml_inputs(ctx)
    if not ctx.c_map.all_square_qam():
        raise ValueError("objective_mml_fast requires square-QAM cells; "
                         "use objective_mml_approx for other alphabets")
    pts, single = _as_batch(p_tilde)
    out = np.empty(pts.shape[0])
    for lo in range(0, pts.shape[0], ctx.chunk):
        out[lo:lo + ctx.chunk] = _mml_fast_chunk(ctx, pts[lo:lo + ctx.chunk])
    return float(out[0]) if single else out


def _mml_fast_chunk(ctx: ObjectiveContext, pts: np.ndarray) -> np.ndarray:
    s2 = ctx.sigma2
    score, hbar, A = _mml_pilot_and_channel(ctx, pts)
    if ctx.data_obs.size == 0:
        return score
    T, H = _candidate_data_stats(ctx, hbar, A)
    for const, mask in ctx.c_map.cell_groups():
        Tg = T[:, mask]
        if ctx.counter is not None:
            ctx.counter.add("localization_data_symbol", Tg.size * const.side)
        ks = np.arange(1, const.side, 2, dtype=float)        # odd amplitude levels
        amp = 2.0 / (s2 * math.sqrt(const.energy_scale))
        decay = (ks ** 2 / (s2 * const.energy_scale))[:, None] * H[None, :]  # (K, G)
        for F in (Tg.real, Tg.imag):
            x = (amp * ks)[:, None, None] * F[None, :, :]     # (K, G, C)
            t = _log2cosh(x) - decay[:, :, None]
            score = score + np.sum(_logsumexp(t, axis=0), axis=1)
    return score


def _log2cosh(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax))


def _logsumexp(a: np.ndarray, axis: int = 0) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    out = m.squeeze(axis) + np.log(np.sum(np.exp(a - m), axis=axis))
    return out


# ---------------------------------------------------------------------------
# Exact marginal likelihood (toy-scale oracles)
# ---------------------------------------------------------------------------

def marginal_channel_likelihood(Y: np.ndarray, W: np.ndarray, p_tilde, scene: Scene,
                                cfg: SystemConfig, sigma2: float, gamma: float) -> float:
    """Exact log-density of the observations with the per-node channel
    coefficients integrated out against their CN(0, gamma) prior.

    Y is the (N, Q, L) full-frame observation tensor and W the (Q, L) symbol
    matrix (pilots and data concatenated along time).
    """
    _check_pos(sigma2, gamma)
    A = steering_phases(np.asarray(p_tilde, dtype=float), scene.node_positions, cfg)
    return _marginal_loglik_given_steering(Y, W, A, sigma2, gamma)


def _marginal_loglik_given_steering(Y, W, A, sigma2, gamma) -> float:
    N = Y.shape[0]
    K = Y.size
    U = np.einsum("nql,nq,ql->n", np.conj(Y), A, W, optimize=True) / sigma2
    V = np.sum(np.abs(W) ** 2) / sigma2 + 1.0 / gamma
    ll = (-np.sum(np.abs(Y) ** 2) / sigma2
          - K * math.log(math.pi) - K * math.log(sigma2) - N * math.log(gamma)
          - N * math.log(V) + float(np.sum(np.abs(U) ** 2)) / V)
    return float(ll)


def objective_mml_optimal(Y: np.ndarray, X: np.ndarray, p_tilde, scene: Scene,
                          cfg: SystemConfig, sigma2: float, gamma: float,
                          c_map: ConstellationMap, cap: int = 65536) -> float:
    """Log marginal density with the data symbols *also* summed out.

    Enumerates every data matrix hypothesis (uniform prior over each cell's
    alphabet) and log-sum-exps the exact channel-marginalized densities.
    Only usable at toy scale; refuses instances above ``cap`` hypotheses.
    """
    _check_pos(sigma2, gamma)
    Q, P = X.shape
    if c_map.shape[0] != Q:
        raise ValueError("constellation map rows do not match X rows")
    D = c_map.shape[1]
    cells = [(q, d) for q in range(Q) for d in range(D)]
    n_combos = 1
    for q, d in cells:
        n_combos *= c_map.constellation_at(q, d).order
    if n_combos > cap:
        raise ValueError(f"optimal marginal objective needs {n_combos} data hypotheses, "
                         f"above the enumeration cap of {cap}")
    A = steering_phases(np.asarray(p_tilde, dtype=float), scene.node_positions, cfg)
    log_prior = -sum(math.log(c_map.constellation_at(q, d).order) for q, d in cells)
    if not cells:
        return _marginal_loglik_given_steering(Y, X, A, sigma2, gamma)
    W = np.empty((Q, P + D), dtype=complex)
    W[:, :P] = X
    alphabets = [c_map.constellation_at(q, d).points for q, d in cells]
    lls = np.empty(n_combos)
    for i, combo in enumerate(itertools.product(*alphabets)):
        for (q, d), s in zip(cells, combo):
            W[q, P + d] = s
        lls[i] = _marginal_loglik_given_steering(Y, W, A, sigma2, gamma)
    return float(_logsumexp(lls + log_prior, axis=0))


def _check_pos(sigma2, gamma):
    if sigma2 is None or sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    if gamma is None or gamma <= 0:
        raise ValueError("gamma must be positive")
