"""Symbol equalization, LMMSE channel/data estimation, and hard decisions.

Equalization correlates observations with (known or estimated) symbols to
collapse the time dimension of the frame. The genie variant uses the true
data symbols; the decision-directed (DD) variants use demodulated estimates,
in either a centralized (one sequence at the fusion center) or distributed
(one sequence per node) fashion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ConstellationMap
from .ops import OpCounter


@dataclass(frozen=True)
class EqualizedObs:
    """Equalized N x Q matrices; only the variants an estimator needs are set."""

    pilot: np.ndarray              # pilot-only equalized observations
    genie: np.ndarray | None = None
    dd: np.ndarray | None = None


@dataclass(frozen=True)
class DataEstimates:
    """Soft and hard data-symbol estimates plus the channel estimate behind them."""

    H_hat: np.ndarray                      # (N, Q)
    S_soft_centr: np.ndarray | None = None  # (Q, D)
    S_hard_centr: np.ndarray | None = None
    S_soft_distr: np.ndarray | None = None  # (N, Q, D)
    S_hard_distr: np.ndarray | None = None


def pilot_equalize(Y_P: np.ndarray, X: np.ndarray,
                   counter: OpCounter | None = None) -> np.ndarray:
    """sum_p conj(X[q, p]) * Y_P[n, q, p] -> (N, Q)."""
    if counter is not None:
        counter.add("symbol_equalization", Y_P.size)
    return np.einsum("qp,nqp->nq", np.conj(X), Y_P)


def _fold_data(Yp_eq: np.ndarray, Y_D: np.ndarray, W: np.ndarray,
               counter: OpCounter | None = None) -> np.ndarray:
    """Yp_eq + sum_d conj(W) * Y_D, where W is (Q, D) or per-node (N, Q, D)."""
    if counter is not None:
        counter.add("symbol_equalization", Y_D.size)
    if W.ndim == 2:
        return Yp_eq + np.einsum("qd,nqd->nq", np.conj(W), Y_D)
    return Yp_eq + np.einsum("nqd,nqd->nq", np.conj(W), Y_D)


def genie_equalize(Yp_eq: np.ndarray, Y_D: np.ndarray, S: np.ndarray,
                   counter: OpCounter | None = None) -> np.ndarray:
    """Full-frame equalization with the true data symbols treated as pilots."""
    return _fold_data(Yp_eq, Y_D, S, counter)


def dd_equalize(Yp_eq: np.ndarray, Y_D: np.ndarray, S_hat: np.ndarray,
                counter: OpCounter | None = None) -> np.ndarray:
    """Decision-directed equalization.

    S_hat is (Q, D) for centralized demodulation or (N, Q, D) for distributed;
    with estimates equal to the true symbols this reproduces genie_equalize
    bit for bit (identical summation order).
    """
    return _fold_data(Yp_eq, Y_D, S_hat, counter)


def estimate_channel_lmmse(Y_P: np.ndarray, X: np.ndarray, sigma2: float, gamma: float,
                           counter: OpCounter | None = None) -> np.ndarray:
    """Per-cell Wiener estimate of H[n, q] from pilots, prior CN(0, gamma)."""
    if counter is not None:
        counter.add("channel_estimation", Y_P.size)
    num = np.einsum("qp,nqp->nq", np.conj(X), Y_P)
    den = np.sum(np.abs(X) ** 2, axis=1) + sigma2 / gamma  # (Q,)
    return num / den[None, :]


def soft_data_estimate(H_hat: np.ndarray, Y_D: np.ndarray, sigma2: float,
                       mode: str, counter: OpCounter | None = None) -> np.ndarray:
    """LMMSE soft symbol estimates, unit-variance symbol prior.

    mode "centralized" combines across nodes and returns (Q, D); mode
    "distributed" demodulates per node and returns (N, Q, D).
    """
    if counter is not None:
        counter.add("soft_data_estimation", Y_D.size)
    if mode == "centralized":
        num = np.einsum("nq,nqd->qd", np.conj(H_hat), Y_D)
        den = np.sum(np.abs(H_hat) ** 2, axis=0) + sigma2  # (Q,)
        return num / den[:, None]
    if mode == "distributed":
        num = np.conj(H_hat)[:, :, None] * Y_D
        den = np.abs(H_hat) ** 2 + sigma2  # (N, Q)
        return num / den[:, :, None]
    raise ValueError(f"mode must be 'centralized' or 'distributed', got {mode!r}")


def hard_decision(S_soft: np.ndarray, c_map: ConstellationMap, method: str = "exhaustive",
                  counter: OpCounter | None = None) -> np.ndarray:
    """Map soft estimates to the nearest constellation point.

    Works on (Q, D) or (N, Q, D) input. Ties break to the lowest point index
    (row-major (r, i) order for QAM). The default search is exhaustive over
    the alphabet; method="slicer" uses the O(1) per-cell QAM quantizer and is
    excluded from complexity accounting.
    """
    soft = np.asarray(S_soft)
    out = np.empty_like(soft)
    per_node = soft.ndim == 3
    flat_soft = soft.reshape(soft.shape[0], -1) if per_node else soft.reshape(1, -1)
    flat_out = out.reshape(out.shape[0], -1) if per_node else out.reshape(1, -1)
    for const, mask in c_map.cell_groups():
        vals = flat_soft[:, mask]
        if method == "slicer" and const.kind == "qam":
            flat_out[:, mask] = _qam_slice(vals, const.side, const.energy_scale)
            continue
        if method not in ("exhaustive", "slicer"):
            raise ValueError(f"unknown hard-decision method {method!r}")
        if counter is not None:
            counter.add("hard_data_decision", vals.size * const.order)
        d2 = np.abs(vals[..., None] - const.points) ** 2
        flat_out[:, mask] = const.points[np.argmin(d2, axis=-1)]
    return out


def _qam_slice(vals: np.ndarray, side: int, energy: float) -> np.ndarray:
    scale = np.sqrt(energy)
    lo, hi = -(side - 1), side - 1

    def quant(x):
        # nearest odd level; exact midpoints round up (measure-zero difference
        # from the exhaustive search, which rounds to the lower index)
        return np.clip(2.0 * np.floor(x * scale / 2.0) + 1.0, lo, hi)

    return (quant(vals.real) + 1j * quant(vals.imag)) / scale


def symbol_error_rate(S_hat: np.ndarray, S: np.ndarray) -> float:
    """Fraction of hard decisions differing from the true symbols.

    Accepts (Q, D) or (N, Q, D) decisions against the (Q, D) truth; the
    per-node case averages over nodes (equal cell counts per node).
    """
    if S.size == 0:
        return 0.0
    return float(np.mean(S_hat != S))


def mean_abs_error(S_soft: np.ndarray, S: np.ndarray) -> float:
    """Mean |soft estimate - true symbol| over all cells (and nodes if 3-D)."""
    if S.size == 0:
        return 0.0
    return float(np.mean(np.abs(S_soft - S)))
