"""Steering matrices, physical-optics channel synthesis, and noisy observations.

The model is purely frequency-domain: node n, subcarrier q sees
H[n, q] = h_bar[n] * A(p)[n, q] with unit-modulus steering entries
A(p)[n, q] = exp(-j * kappa * ||p - p_n|| * q * delta_f / f_c).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import C_LIGHT, ResourceGrid, Scene, SystemConfig


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the random per-node coefficients and the full channel matrix."""

    beta: np.ndarray    # (N,) path loss x random phase
    h_bar: np.ndarray   # (N,) beta * carrier-phase term
    H: np.ndarray       # (N, Q)
    phi: np.ndarray     # (N,) phases in [0, 2*pi)


@dataclass(frozen=True)
class Observations:
    """Received pilot and data tensors plus the noise variance used."""

    Y_P: np.ndarray   # (N, Q, P)
    Y_D: np.ndarray   # (N, Q, D)
    sigma2: float


def steering_phases(points: np.ndarray, nodes: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Steering matrices for a batch of candidate positions.

    points: (..., 2) candidate positions; returns (..., N, Q) complex with
    unit-modulus entries. The phase of entry (n, q) is
    -2*pi*q*delta_f*||p - p_n||/c, i.e. -kappa*||p - p_n||*q*delta_f/f_c.
    """
    pts = np.asarray(points, dtype=float)
    dist = np.linalg.norm(pts[..., None, :] - nodes, axis=-1)  # (..., N)
    per_q = (2.0 * np.pi * cfg.delta_f / C_LIGHT) * dist  # phase step per subcarrier
    q_idx = np.arange(cfg.Q)
    return np.exp(-1j * per_q[..., None] * q_idx)


def steering_matrix(p_tilde: np.ndarray, scene: Scene, cfg: SystemConfig) -> np.ndarray:
    """Steering matrix A(p_tilde), shape (N, Q)."""
    return steering_phases(np.asarray(p_tilde, dtype=float), scene.node_positions, cfg)


def synthesize_channel(scene: Scene, cfg: SystemConfig,
                       rng: np.random.Generator) -> ChannelRealization:
    """Physical-optics channel: 1/distance loss, i.i.d. uniform phase per node."""
    diff = scene.ue_position - scene.node_positions
    dist = np.linalg.norm(diff, axis=1)
    if np.any(dist == 0.0):
        raise ValueError("UE coincides with a receiver node; channel gain is singular")
    phi = rng.uniform(0.0, 2.0 * np.pi, size=cfg.N)
    beta = np.exp(1j * phi) / dist
    h_bar = beta * np.exp(-1j * cfg.kappa * dist)
    H = h_bar[:, None] * steering_matrix(scene.ue_position, scene, cfg)
    return ChannelRealization(beta=beta, h_bar=h_bar, H=H, phi=phi)


def observe(chan: ChannelRealization, grid: ResourceGrid, sigma2: float,
            rng: np.random.Generator) -> Observations:
    """Noisy pilot/data observations with circularly-symmetric complex AWGN."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    Y_P = chan.H[:, :, None] * grid.X[None, :, :] + _cn_noise(rng, chan.H.shape + (grid.X.shape[1],), sigma2)
    Y_D = chan.H[:, :, None] * grid.S[None, :, :] + _cn_noise(rng, chan.H.shape + (grid.S.shape[1],), sigma2)
    return Observations(Y_P=Y_P, Y_D=Y_D, sigma2=float(sigma2))


def _cn_noise(rng: np.random.Generator, shape, sigma2: float) -> np.ndarray:
    # CN(0, sigma2): each real dimension has variance sigma2 / 2.
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
