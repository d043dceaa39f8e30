"""Pilot-based estimators treating the channels as deterministic unknowns.

mml_estimate is the maximum-likelihood estimator of the serving cascaded
channel for a receiver whose model ignores the non-serving surface; it is
exact when the two surfaces use mutually orthogonal sequences and biased when
they share one.  joint_ml_estimate also treats the cross reflection as an
unknown and removes that bias at the cost of a longer pilot block.
"""

from __future__ import annotations

import numpy as np

from .params import IDENTICAL, ORTHOGONAL
from .sequences import ConfigSequence

# Normal matrices with condition number above this are treated as singular.
COND_LIMIT = 1e12


def mml_estimate(
    y: np.ndarray,
    seq: ConfigSequence,
    h: np.ndarray,
    pilot_power_mw: float,
) -> np.ndarray:
    """Single-surface ML estimate of the UE-to-serving-RIS channel.

    Correlates the observations with the serving sequence and divides out
    the known RIS-to-BS channel:

        g_hat = B^H y / (L * sqrt(P) * h)   (elementwise in h)

    Parameters
    ----------
    y : observations, shape (L,) or (L, T) for T noise realizations.
    seq : serving-surface pilot sequence (L, N).
    h : known serving RIS-to-BS channel, shape (N,), no zero entries.
    pilot_power_mw : pilot transmit power in mW.

    Returns
    -------
    Estimate with shape (N,) or (N, T), matching y.
    """
    proj = seq.matrix.conj().T @ y
    scale = 1.0 / (seq.n_slots * np.sqrt(pilot_power_mw))
    divisor = h if proj.ndim == 1 else h[:, None]
    return scale * proj / divisor


def joint_ml_estimate(
    y: np.ndarray,
    seq_1: ConfigSequence,
    seq_2: ConfigSequence,
    h: np.ndarray,
    pilot_power_mw: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Joint ML estimate of the serving channel and the cross reflection.

    Solves the least-squares problem for the stacked unknown [g; r] against
    the combined regressor [B_serving diag(h), B_crossing].  Requires at
    least 2N pilot slots and sequences that keep the normal matrix well
    conditioned; identical sequences make the problem singular.

    Raises numpy.linalg.LinAlgError when the normal matrix condition number
    exceeds COND_LIMIT.
    """
    regressor = np.hstack([seq_1.matrix * h, seq_2.matrix])
    gram = regressor.conj().T @ regressor
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise np.linalg.LinAlgError(
            f"normal matrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}; "
            "the two sequences do not separate the serving and crossing paths"
        )
    rhs = regressor.conj().T @ y / np.sqrt(pilot_power_mw)
    stacked = np.linalg.solve(gram, rhs)
    n = h.size
    return stacked[:n], stacked[n:]


def contamination_bias(
    h: np.ndarray, q: np.ndarray, p: np.ndarray, mode: str
) -> np.ndarray:
    """Deterministic bias of mml_estimate.

    Shared sequences alias the cross reflection onto the estimate, giving
    q_n * p_n / h_n per element; orthogonal sequences reject it entirely.
    """
    if mode == IDENTICAL:
        return q * p / h
    if mode == ORTHOGONAL:
        return np.zeros_like(h)
    raise ValueError(f"unknown sequence mode {mode!r}")


def mse_trace(
    bias: np.ndarray,
    h: np.ndarray,
    pilot_power_mw: float,
    pilot_len: int,
    noise_power_mw: float,
) -> float:
    """Total estimation MSE of mml_estimate for one channel realization.

    Sum of the squared bias and the noise-induced variance
    sigma^2 / (L * P) * sum_n 1 / |h_n|^2.
    """
    noise_term = (
        noise_power_mw
        / (pilot_len * pilot_power_mw)
        * float(np.sum(1.0 / np.abs(h) ** 2))
    )
    return float(np.sum(np.abs(bias) ** 2)) + noise_term


def bias_floor(bias: np.ndarray) -> float:
    """Residual MSE left once the pilot power grows without bound."""
    return float(np.sum(np.abs(bias) ** 2))


def nmse(mse: float, g: np.ndarray) -> float:
    """MSE normalised by the squared norm of the true channel."""
    denom = float(np.sum(np.abs(g) ** 2))
    if denom == 0.0:
        raise ValueError("cannot normalise by an all-zero channel")
    return mse / denom
