"""Independent numerical checks of the marginal-likelihood computations.

Two suites, runnable from the CLI and reused by the test suite:

* quadrature: the closed-form channel-marginalized log-density against direct
  tensor-product Gauss-Hermite integration of the likelihood-times-prior
  integrand (no completion of squares anywhere in this path);
* identity: the square-QAM accelerated objective against the plain
  per-constellation-point objective, which must agree to floating-point
  accuracy on every instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import observe, steering_phases, synthesize_channel
from .estimators import (ObjectiveContext, marginal_channel_likelihood,
                         objective_mml_approx, objective_mml_fast)
from .equalize import pilot_equalize
from .model import (ConstellationMap, Scene, SystemConfig, build_resource_grid,
                    make_qam_constellation)


def gauss_hermite_marginal_loglik(Y: np.ndarray, W: np.ndarray, p_tilde, scene: Scene,
                                  cfg: SystemConfig, sigma2: float, gamma: float,
                                  n_nodes: int = 160) -> float:
    """Numerically integrate the channel coefficients out of the likelihood.

    The integrand factorizes over receiver nodes (observations and priors are
    independent across nodes), so each node contributes one 2-D tensor-product
    Gauss-Hermite integral over the real/imaginary parts of its coefficient,
    evaluated with the substitution h = sqrt(gamma) * (u + jv) that matches
    the prior to the Hermite weight. Log-domain throughout.
    """
    u, w = np.polynomial.hermite.hermgauss(n_nodes)
    logw = np.log(w)
    h_grid = math.sqrt(gamma) * (u[:, None] + 1j * u[None, :]).reshape(-1)  # (n^2,)
    logw2 = (logw[:, None] + logw[None, :]).reshape(-1)
    A = steering_phases(np.asarray(p_tilde, dtype=float), scene.node_positions, cfg)
    N, Q, L = Y.shape
    total = 0.0
    for n in range(N):
        mean = (A[n][:, None] * W).reshape(-1)          # (Q*L,) per-cell signal for unit h
        y = Y[n].reshape(-1)
        resid = np.abs(y[None, :] - h_grid[:, None] * mean[None, :]) ** 2
        log_f = -np.sum(resid, axis=1) / sigma2         # (n^2,)
        # prior exp(-|h|^2/gamma) becomes the Hermite weight exactly; the
        # Jacobian gamma cancels the prior normalization 1/(pi*gamma)
        log_terms = logw2 + log_f
        m = np.max(log_terms)
        log_int = m + math.log(np.sum(np.exp(log_terms - m)))
        total += log_int - math.log(math.pi) - Q * L * math.log(math.pi * sigma2)
    return float(total)


# ---------------------------------------------------------------------------
# Random tiny instances
# ---------------------------------------------------------------------------

def _tiny_config(rng: np.random.Generator, Q: int, P: int, D: int, N: int) -> SystemConfig:
    return SystemConfig(f_c=7.2e9, delta_f=float(rng.uniform(30e3, 240e3)),
                        Q=Q, P=P, D=D, N=N,
                        r_srx=float(rng.uniform(50.0, 300.0)), r_s=40.0,
                        snr_db=(10.0,), n_mc=1, base_seed=0,
                        data_constellation=4)


def _random_scene(cfg: SystemConfig, rng: np.random.Generator) -> Scene:
    angles = rng.uniform(0, 2 * math.pi, size=cfg.N)
    nodes = cfg.r_srx * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    r = cfg.r_s * math.sqrt(rng.uniform())
    th = rng.uniform(0, 2 * math.pi)
    return Scene(node_positions=nodes,
                 ue_position=np.array([r * math.cos(th), r * math.sin(th)]))


@dataclass
class SuiteReport:
    name: str
    n_comparisons: int
    max_rel_err: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.n_comparisons == 0 or self.max_rel_err <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: {self.n_comparisons} comparisons, "
                f"max relative error {self.max_rel_err:.3e} (tolerance {self.tolerance:.0e})")


def run_quadrature_suite(n_instances: int = 100, seed: int = 0,
                         n_nodes: int = 160, tolerance: float = 1e-6) -> SuiteReport:
    """Closed-form channel marginalization vs Gauss-Hermite integration."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        N = int(rng.integers(1, 3))
        Q = int(rng.integers(1, 3))
        D = int(rng.integers(0, 2))
        cfg = _tiny_config(rng, Q=Q, P=1, D=D, N=N)
        scene = _random_scene(cfg, rng)
        sigma2 = float(rng.uniform(0.3, 3.0))
        gamma = float(rng.uniform(0.3, 3.0))
        # observations drawn from the model at unit-scale channel magnitudes
        # keep the integrand well inside the quadrature's resolving range
        X = (2.0 * rng.integers(0, 2, size=(Q, 1)) - 1.0).astype(complex)
        qam = make_qam_constellation(4)
        S = qam.points[rng.integers(0, 4, size=(Q, D))]
        W = np.concatenate([X, S], axis=1)
        A_true = steering_phases(scene.ue_position, scene.node_positions, cfg)
        h = math.sqrt(gamma / 2) * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
        noise = math.sqrt(sigma2 / 2) * (rng.standard_normal((N, Q, 1 + D))
                                         + 1j * rng.standard_normal((N, Q, 1 + D)))
        Y = h[:, None, None] * A_true[:, :, None] * W[None, :, :] + noise
        p_test = scene.ue_position + rng.normal(scale=5.0, size=2)
        closed = marginal_channel_likelihood(Y, W, p_test, scene, cfg, sigma2, gamma)
        quad = gauss_hermite_marginal_loglik(Y, W, p_test, scene, cfg, sigma2, gamma,
                                             n_nodes=n_nodes)
        worst = max(worst, abs(closed - quad) / abs(quad))
    return SuiteReport("marginal likelihood vs Gauss-Hermite quadrature",
                       n_instances, worst, tolerance)


def run_identity_suite(n_instances: int = 1000, seed: int = 0,
                       tolerance: float = 1e-9) -> SuiteReport:
    """Accelerated (cosh-form) objective vs plain constellation-sum objective."""
    rng = np.random.default_rng(seed)
    orders = (4, 16, 64, 256)
    worst = 0.0
    for _ in range(n_instances):
        N = int(rng.integers(1, 4))
        Q = int(rng.integers(1, 5))
        D = int(rng.integers(1, 4))
        M = int(rng.choice(orders))
        cfg = _tiny_config(rng, Q=Q, P=1, D=D, N=N)
        scene = _random_scene(cfg, rng)
        sigma2 = float(10.0 ** rng.uniform(-6.0, 0.0))
        gamma = float(rng.uniform(0.1, 10.0))
        c_map = ConstellationMap.uniform(make_qam_constellation(M), Q, D)
        grid = build_resource_grid(cfg, rng, c_map=c_map)
        chan = synthesize_channel(scene, cfg, rng)
        # scale the channel to O(1) so scores exercise both signs of the exponent
        chan_scale = 1.0 / np.mean(np.abs(chan.h_bar))
        obs = observe(chan, grid, sigma2 / chan_scale ** 2, rng)
        Y_P = obs.Y_P * chan_scale
        Y_D = obs.Y_D * chan_scale
        ctx = ObjectiveContext(cfg=cfg, nodes=scene.node_positions,
                               equalized={"pilot": pilot_equalize(Y_P, grid.X)},
                               pilot_energy=grid.pilot_energy, data_obs=Y_D,
                               sigma2=sigma2, gamma=gamma, c_map=c_map)
        p_test = scene.ue_position + rng.normal(scale=10.0, size=2)
        a = objective_mml_approx(ctx, p_test)
        f = objective_mml_fast(ctx, p_test)
        worst = max(worst, abs(f - a) / abs(a))
    return SuiteReport("QAM-accelerated vs plain marginal objective",
                       n_instances, worst, tolerance)
