"""Prior-aided channel estimation for spatially correlated Rayleigh fading.

The estimator below is the linear MMSE filter a receiver would build if its
pilot model contained only the serving surface.  When both surfaces share a
sequence the omitted cross reflection leaks into the estimate, which shows up
as an extra error-covariance term that no amount of pilot power removes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequences import ConfigSequence


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True, eq=False)
class BayesCovariances:
    """Pilot model of one BS, with its second-order statistics.

    c_gy      : cross covariance of g with the *modelled* observations (N, L)
    c_yy_model: observation covariance under the single-surface model (L, L)
    c_yy      : true observation covariance including the cross term (L, L)

    The scenario inputs are kept alongside so downstream error analysis can
    use reduced N x N forms instead of re-factorising the L x L blocks.
    """

    c_gy: np.ndarray
    c_yy_model: np.ndarray
    c_yy: np.ndarray
    seq_k: ConfigSequence
    seq_j: ConfigSequence
    h: np.ndarray
    sigma_g: np.ndarray
    sigma_r: np.ndarray
    pilot_power_mw: float
    noise_power_mw: float


def pilot_covariances(
    seq_k: ConfigSequence,
    seq_j: ConfigSequence,
    h: np.ndarray,
    sigma_g: np.ndarray,
    sigma_r: np.ndarray,
    pilot_power_mw: float,
    noise_power_mw: float,
) -> BayesCovariances:
    """Assemble the covariance blocks used by the prior-aided estimator."""
    bk_dh = seq_k.matrix * h  # rows of B_k scaled columnwise by h = B_k diag(h)
    c_gy = np.sqrt(pilot_power_mw) * sigma_g @ bk_dh.conj().T
    c_yy_model = _hermitize(
        pilot_power_mw * bk_dh @ sigma_g @ bk_dh.conj().T
        + noise_power_mw * np.eye(seq_k.n_slots)
    )
    cross = pilot_power_mw * seq_j.matrix @ sigma_r @ seq_j.matrix.conj().T
    return BayesCovariances(
        c_gy=c_gy,
        c_yy_model=c_yy_model,
        c_yy=_hermitize(c_yy_model + cross),
        seq_k=seq_k,
        seq_j=seq_j,
        h=np.asarray(h),
        sigma_g=np.asarray(sigma_g),
        sigma_r=np.asarray(sigma_r),
        pilot_power_mw=float(pilot_power_mw),
        noise_power_mw=float(noise_power_mw),
    )


def mmse_channel_estimate(
    y: np.ndarray,
    seq: ConfigSequence,
    h: np.ndarray,
    sigma_g: np.ndarray,
    pilot_power_mw: float,
    noise_power_mw: float,
) -> np.ndarray:
    """Estimate g from pilots using its prior but a single-surface model.

    g_hat = C_gy C_yy_model^{-1} y, with the covariances of
    pilot_covariances.  Accepts y of shape (L,) or (L, T).
    """
    bk_dh = seq.matrix * h
    c_gy = np.sqrt(pilot_power_mw) * sigma_g @ bk_dh.conj().T
    c_yy_model = _hermitize(
        pilot_power_mw * bk_dh @ sigma_g @ bk_dh.conj().T
        + noise_power_mw * np.eye(seq.n_slots)
    )
    return c_gy @ np.linalg.solve(c_yy_model, y)


def error_covariance_parts(cov: BayesCovariances) -> tuple[np.ndarray, np.ndarray]:
    """Split the estimation error covariance into its two sources.

    Returns (noise_limited, contamination):

      noise_limited = Sigma_g - C_gy C_yy_model^{-1} C_gy^H
      contamination = P * (C_gy C_yy_model^{-1}) B_j Sigma_r B_j^H
                          (C_yy_model^{-1} C_gy^H)

    The first term vanishes as pilot power grows; the second converges to a
    non-zero floor whenever B_j is not orthogonal to the serving sequence.

    Because every config sequence satisfies B_k^H B_k = L I, both terms reduce
    (matrix-inversion lemma) to solves against the N x N matrix

        core = noise I + L P diag(h) Sigma_g diag(h)^H,

    whose conditioning does not degrade as the noise power goes to zero; the
    direct L x L solve loses the orthogonal-sequence cancellation once
    eps * cond(C_yy_model) becomes visible.
    """
    h = cov.h
    pp = cov.pilot_power_mw
    length = cov.seq_k.n_slots
    x = h[:, None] * cov.sigma_g  # diag(h) Sigma_g
    core = cov.noise_power_mw * np.eye(h.size) + length * pp * (x * h.conj()[None, :])
    noise_limited = _hermitize(
        cov.sigma_g - length * pp * x.conj().T @ np.linalg.solve(core, x)
    )
    if cov.seq_k.matrix is cov.seq_j.matrix or np.array_equal(
        cov.seq_k.matrix, cov.seq_j.matrix
    ):
        gram_cross = length * np.eye(h.size, dtype=complex)
    else:
        gram_cross = cov.seq_k.matrix.conj().T @ cov.seq_j.matrix
    t = x.conj().T @ np.linalg.solve(core, gram_cross)  # Sigma_g D^H core^{-1} G
    contamination = _hermitize(pp**2 * t @ cov.sigma_r @ t.conj().T)
    return noise_limited, contamination


def error_covariance(cov: BayesCovariances) -> np.ndarray:
    """Total error covariance of mmse_channel_estimate (sum of both parts)."""
    noise_limited, contamination = error_covariance_parts(cov)
    return noise_limited + contamination


def high_snr_contamination(
    seq_k: ConfigSequence,
    seq_j: ConfigSequence,
    h: np.ndarray,
    sigma_r: np.ndarray,
) -> np.ndarray:
    """Pilot-power limit of the contamination part of the error covariance.

    General form (L = pilot block length):

        (1 / L^2) diag(h)^-1 B_k^H B_j Sigma_r B_j^H B_k diag(h)^-H

    For byte-stable results the two interesting cases short-circuit: equal
    sequences give diag(h)^-1 Sigma_r diag(h)^-H independently of L, and the
    general expression evaluates to ~0 for orthogonal blocks.
    """
    if seq_k.matrix is seq_j.matrix or np.array_equal(seq_k.matrix, seq_j.matrix):
        return sigma_r / np.outer(h, h.conj())
    coupling = seq_k.matrix.conj().T @ seq_j.matrix / seq_k.n_slots
    inner = coupling @ sigma_r @ coupling.conj().T
    return inner / np.outer(h, h.conj())
