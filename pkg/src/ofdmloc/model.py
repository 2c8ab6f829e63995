"""Scenario geometry, constellations, resource grid, and configuration.

All quantities are SI (meters, Hz, seconds); SNR values are in dB.
Every type here is immutable after construction so instances can be shared
freely across worker processes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from functools import cached_property
from pathlib import Path

import numpy as np

C_LIGHT = 299_792_458.0  # speed of light, m/s


class ConfigError(ValueError):
    """Invalid configuration value; message names the offending field."""


# ---------------------------------------------------------------------------
# Constellations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constellation:
    """A unit-mean-energy symbol alphabet.

    ``points`` are ordered; for square QAM the order is row-major over the
    (real-level, imag-level) index pair, which fixes the hard-decision
    tie-break and makes seeded draws reproducible.
    """

    name: str
    order: int
    points: np.ndarray          # (order,) complex128, read-only
    kind: str                   # "qam" | "bpsk"
    energy_scale: float = 1.0   # 2(M-1)/3 for QAM, 1 for BPSK
    side: int = 0               # sqrt(M) for QAM, 0 otherwise

    def __post_init__(self):
        self.points.setflags(write=False)


def make_qam_constellation(M: int) -> Constellation:
    """Square M-QAM with points ((2r - sqrt(M) + 1) + j(2i - sqrt(M) + 1)) / sqrt(E).

    E = 2(M-1)/3 normalizes the mean symbol energy to 1. Points are listed
    row-major: r (real level) outer, i (imag level) inner.
    """
    if not isinstance(M, (int, np.integer)) or M < 4:
        raise ConfigError(f"QAM order must be an integer >= 4, got {M!r}")
    side = math.isqrt(M)
    if side * side != M or (M & (M - 1)) != 0:
        raise ConfigError(f"QAM order must be an even power of 2 (4, 16, 64, ...), got {M}")
    energy = 2.0 * (M - 1) / 3.0
    levels = 2.0 * np.arange(side) - side + 1
    pts = (levels[:, None] + 1j * levels[None, :]).reshape(-1) / math.sqrt(energy)
    return Constellation(name=f"{M}qam", order=M, points=pts, kind="qam",
                         energy_scale=energy, side=side)


def make_bpsk_constellation() -> Constellation:
    """Binary alphabet {-1, +1} (index order: -1 first)."""
    pts = np.array([-1.0 + 0.0j, 1.0 + 0.0j])
    return Constellation(name="bpsk", order=2, points=pts, kind="bpsk")


@dataclass(frozen=True)
class ConstellationMap:
    """Per-cell constellation assignment for the Q x D data block."""

    constellations: tuple[Constellation, ...]
    indices: np.ndarray  # (Q, D) int, values index into `constellations`

    def __post_init__(self):
        self.indices.setflags(write=False)
        if self.indices.size and (self.indices.min() < 0
                                  or self.indices.max() >= len(self.constellations)):
            raise ConfigError("constellation map index out of range")

    @classmethod
    def uniform(cls, constellation: Constellation, Q: int, D: int) -> "ConstellationMap":
        return cls((constellation,), np.zeros((Q, D), dtype=np.intp))

    @property
    def shape(self) -> tuple[int, int]:
        return self.indices.shape

    def constellation_at(self, q: int, d: int) -> Constellation:
        return self.constellations[self.indices[q, d]]

    def all_square_qam(self) -> bool:
        used = np.unique(self.indices) if self.indices.size else []
        return all(self.constellations[i].kind == "qam" for i in used)

    def max_order(self) -> int:
        used = np.unique(self.indices) if self.indices.size else []
        return max((self.constellations[i].order for i in used), default=1)

    def cell_groups(self):
        """Yield (constellation, flat_cell_mask) for each alphabet in use.

        The mask indexes the row-major flattening of the (Q, D) block.
        """
        flat = self.indices.reshape(-1)
        for ci in np.unique(flat):
            yield self.constellations[ci], flat == ci


# ---------------------------------------------------------------------------
# System configuration
# ---------------------------------------------------------------------------

_PILOT_SCHEMES = ("bpsk_random", "bpsk_ones")


@dataclass(frozen=True)
class SystemConfig:
    """All scenario, waveform, and solver parameters.

    ``snr_db`` lists the per-node average SNR sweep points; the matching
    noise variance is sigma2 = 2 / (R_s^2 * snr_linear). ``gamma`` is the
    prior variance of the per-node channel coefficients; when omitted it
    defaults to 2 / R_s^2, the same disk-averaged power approximation that
    defines the SNR.
    """

    f_c: float = 7.2e9            # carrier frequency, Hz
    delta_f: float = 60e3         # subcarrier spacing, Hz
    Q: int = 128                  # subcarriers
    P: int = 1                    # pilot OFDM symbols
    D: int = 35                   # data OFDM symbols
    N: int = 5                    # receiver nodes
    r_srx: float = 5000 * C_LIGHT / 7.2e9   # array radius, m
    a_srx: float = 2 * math.pi    # array aperture, rad, in (0, 2*pi]
    r_s: float = 4800 * C_LIGHT / 7.2e9     # scene radius, m (< r_srx)
    n_grid_per_axis: int = 40
    alpha_oversample: int = 4
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    gamma: float | None = None
    data_constellation: int = 256  # square QAM order for every data cell
    pilot_scheme: str = "bpsk_random"
    n_mc: int = 3000
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in np.atleast_1d(self.snr_db)))
        if self.gamma is None:
            object.__setattr__(self, "gamma", 2.0 / self.r_s ** 2)
        _require(self.f_c > 0, "f_c must be positive")
        _require(self.delta_f > 0, "delta_f must be positive")
        _require(self.Q >= 1, "Q must be >= 1")
        _require(self.P >= 1, "P must be >= 1")
        _require(self.D >= 0, "D must be >= 0")
        _require(self.N >= 1, "N must be >= 1")
        _require(self.r_srx > 0, "r_srx must be positive")
        _require(0 < self.a_srx <= 2 * math.pi + 1e-12, "a_srx must lie in (0, 2*pi]")
        _require(0 < self.r_s < self.r_srx, "r_s must satisfy 0 < r_s < r_srx")
        _require(self.n_grid_per_axis >= 2, "n_grid_per_axis must be >= 2")
        _require(int(self.alpha_oversample) == self.alpha_oversample
                 and self.alpha_oversample >= 1, "alpha_oversample must be a positive integer")
        _require(len(self.snr_db) >= 1, "snr_db must contain at least one value")
        _require(self.gamma > 0, "gamma must be positive")
        _require(self.pilot_scheme in _PILOT_SCHEMES,
                 f"pilot_scheme must be one of {_PILOT_SCHEMES}")
        _require(self.n_mc >= 1, "n_mc must be >= 1")
        if self.D > 0:
            make_qam_constellation(self.data_constellation)  # validates the order

    # -- derived quantities ------------------------------------------------

    @property
    def lambda_c(self) -> float:
        return C_LIGHT / self.f_c

    @property
    def kappa(self) -> float:
        """Wavenumber 2*pi*f_c/c, rad/m."""
        return 2.0 * math.pi * self.f_c / C_LIGHT

    @property
    def bandwidth(self) -> float:
        return self.Q * self.delta_f

    @property
    def range_resolution(self) -> float:
        """Intrinsic resolving distance c / (2 * Q * delta_f), m."""
        return C_LIGHT / (2.0 * self.bandwidth)

    def snr_linear(self, snr_db: float) -> float:
        return 10.0 ** (snr_db / 10.0)

    def sigma2_for(self, snr_db: float) -> float:
        """Noise variance matching the per-node average SNR definition."""
        return 2.0 / (self.r_s ** 2 * self.snr_linear(snr_db))

    @cached_property
    def constellation_map(self) -> ConstellationMap:
        const = make_qam_constellation(self.data_constellation) if self.D > 0 \
            else make_bpsk_constellation()
        return ConstellationMap.uniform(const, self.Q, self.D)


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


# -- JSON configuration I/O --------------------------------------------------

def config_to_dict(cfg: SystemConfig) -> dict:
    """Plain-JSON snapshot of the configuration (snake_case keys)."""
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def config_from_dict(data: dict) -> SystemConfig:
    known = {f.name for f in fields(SystemConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    kwargs = dict(data)
    if "snr_db" in kwargs:
        kwargs["snr_db"] = _parse_snr(kwargs["snr_db"])
    return SystemConfig(**kwargs)


def _parse_snr(value):
    """SNR spec: a list of dB values, or a {start, stop, step} triple."""
    if isinstance(value, dict):
        try:
            start, stop, step = value["start"], value["stop"], value["step"]
        except KeyError as exc:
            raise ConfigError("snr_db triple needs keys start, stop, step") from exc
        if step <= 0:
            raise ConfigError("snr_db step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + k * step for k in range(max(n, 1)))
    return tuple(float(v) for v in np.atleast_1d(value))


def load_config(path) -> SystemConfig:
    """Load a JSON config file; a sweep manifest (with a "config" key) also works."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# Scene and resource grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scene:
    """Receiver node positions and the true transmitter position, in meters."""

    node_positions: np.ndarray  # (N, 2)
    ue_position: np.ndarray     # (2,)

    def __post_init__(self):
        self.node_positions.setflags(write=False)
        self.ue_position.setflags(write=False)


def build_scene(cfg: SystemConfig, rng: np.random.Generator) -> Scene:
    """Nodes equi-angularly spaced on the radius-r_srx arc; UE uniform on the scene disk.

    The k-th node sits at angle k * a_srx / N (first node at angle 0). The UE
    is drawn with the sqrt-radius polar transform so the distribution is
    uniform in area.
    """
    angles = np.arange(cfg.N) * (cfg.a_srx / cfg.N)
    nodes = cfg.r_srx * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    r = cfg.r_s * math.sqrt(rng.uniform())
    theta = rng.uniform(0.0, 2.0 * math.pi)
    ue = np.array([r * math.cos(theta), r * math.sin(theta)])
    return Scene(node_positions=nodes, ue_position=ue)


@dataclass(frozen=True)
class ResourceGrid:
    """One transmitted frame: pilot matrix X (Q x P) and data matrix S (Q x D)."""

    X: np.ndarray
    S: np.ndarray
    c_map: ConstellationMap
    pilot_energy: float  # ||X||_F^2

    def __post_init__(self):
        self.X.setflags(write=False)
        self.S.setflags(write=False)


def build_resource_grid(cfg: SystemConfig, rng: np.random.Generator,
                        c_map: ConstellationMap | None = None) -> ResourceGrid:
    """Draw BPSK pilots and per-cell uniform data symbols."""
    if cfg.pilot_scheme == "bpsk_ones":
        X = np.ones((cfg.Q, cfg.P), dtype=complex)
    else:
        X = (2.0 * rng.integers(0, 2, size=(cfg.Q, cfg.P)) - 1.0).astype(complex)
    if c_map is None:
        c_map = cfg.constellation_map
    if c_map.shape != (cfg.Q, cfg.D):
        raise ConfigError(f"constellation map shape {c_map.shape} != (Q, D) = {(cfg.Q, cfg.D)}")
    S = np.empty((cfg.Q, cfg.D), dtype=complex)
    flat = S.reshape(-1)
    for const, mask in c_map.cell_groups():
        flat[mask] = const.points[rng.integers(0, const.order, size=int(mask.sum()))]
    return ResourceGrid(X=X, S=S, c_map=c_map, pilot_energy=float(np.sum(np.abs(X) ** 2)))
