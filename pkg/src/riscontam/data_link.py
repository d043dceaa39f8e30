"""Data-phase scalar link model and the misspecified symbol MMSE filter.

During data transmission each surface applies a static phase configuration
matched to its own operator's channel estimate.  BS k then sees the scalar

    m = sqrt(Pd) * (h_k^T Phi_k g_k + q_k^T Phi_j p_k)

but only knows the estimate-based part m_hat = sqrt(Pd) * h_k^T Phi_k g_hat_k,
so its MMSE symbol filter is misspecified whenever epsilon = m - m_hat != 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelSet, complex_normal
from .det_estimation import contamination_bias
from .params import IDENTICAL, ORTHOGONAL, PERFECT_CSI
from .sequences import RisPhaseConfig, phase_align


@dataclass(frozen=True)
class ScalarLink:
    """Effective scalar channel m and the receiver's belief m_hat."""

    m: complex
    m_hat: complex

    @property
    def epsilon(self) -> complex:
        """Part of the true channel the receiver is unaware of."""
        return self.m - self.m_hat


def effective_channels(
    ch: ChannelSet,
    phi_1: RisPhaseConfig,
    phi_2: RisPhaseConfig,
    g_hat: np.ndarray,
    data_power_mw: float,
    k: int,
) -> ScalarLink:
    """Scalar link seen by BS k for given surface configurations.

    phi_1 / phi_2 are the static data-phase configurations of RIS 1 and 2;
    g_hat is operator k's channel estimate used to predict the link gain.
    """
    phi_serving = phi_1 if k == 1 else phi_2
    phi_crossing = phi_2 if k == 1 else phi_1
    amp = np.sqrt(data_power_mw)
    direct = np.sum(ch.h(k) * phi_serving.coefficients * ch.g(k))
    leak = np.sum(ch.q(k) * phi_crossing.coefficients * ch.p(k))
    m = amp * (direct + leak)
    m_hat = amp * np.sum(ch.h(k) * phi_serving.coefficients * g_hat)
    return ScalarLink(m=complex(m), m_hat=complex(m_hat))


def high_pilot_snr_link(
    ch: ChannelSet, mode: str, data_power_mw: float, k: int
) -> ScalarLink:
    """Scalar link in the regime where pilot noise has averaged out.

    The channel estimate collapses onto truth plus the deterministic
    contamination bias; both surfaces phase-align to their operator's own
    estimate.  With mode=PERFECT_CSI the surfaces align to the true channels
    and the receiver knows m exactly.
    """
    if mode == PERFECT_CSI:
        phi_1 = phase_align(ch.h1, ch.g1)
        phi_2 = phase_align(ch.h2, ch.g2)
        link = effective_channels(ch, phi_1, phi_2, ch.g(k), data_power_mw, k)
        return ScalarLink(m=link.m, m_hat=link.m)
    g_hat_1 = ch.g1 + contamination_bias(ch.h1, ch.q1, ch.p1, mode)
    g_hat_2 = ch.g2 + contamination_bias(ch.h2, ch.q2, ch.p2, mode)
    phi_1 = phase_align(ch.h1, g_hat_1)
    phi_2 = phase_align(ch.h2, g_hat_2)
    g_hat_k = g_hat_1 if k == 1 else g_hat_2
    return effective_channels(ch, phi_1, phi_2, g_hat_k, data_power_mw, k)


def mmse_symbol_estimate(
    y: np.ndarray | complex, m_hat: complex, noise_power_mw: float
) -> np.ndarray | complex:
    """Receiver's scalar MMSE filter built from its believed link gain."""
    return np.conj(m_hat) * y / (np.abs(m_hat) ** 2 + noise_power_mw)


def data_mse(link: ScalarLink, noise_power_mw: float) -> float:
    """Closed-form symbol MSE of the misspecified MMSE filter.

    Derived for a unit-power Gaussian symbol through y = m x + w while the
    filter assumes the link gain m_hat = m - epsilon:

        MSE = (|eps|^2 + 2 s) / (|m_hat|^2 + s)
              - s (|m|^2 + s) / (|m_hat|^2 + s)^2,    s = noise power.

    With epsilon = 0 this reduces to the classic s / (|m|^2 + s).
    """
    s = noise_power_mw
    eps2 = np.abs(link.epsilon) ** 2
    mhat2 = np.abs(link.m_hat) ** 2
    m2 = np.abs(link.m) ** 2
    return float((eps2 + 2.0 * s) / (mhat2 + s) - s * (m2 + s) / (mhat2 + s) ** 2)


def data_mse_floor(link: ScalarLink) -> float:
    """Noise-free limit of data_mse: |epsilon|^2 / |m_hat|^2."""
    mhat2 = np.abs(link.m_hat) ** 2
    if mhat2 < 1e-300:
        raise ValueError("believed link gain is numerically zero")
    return float(np.abs(link.epsilon) ** 2 / mhat2)


def symbol_sq_errors(
    link: ScalarLink,
    noise_power_mw: float,
    n_draws: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Squared symbol errors |x - x_hat|^2 of the misspecified filter.

    Draws unit-power Gaussian symbols and noise through y = m x + w and runs
    the filter built from m_hat.
    """
    x = complex_normal(rng, n_draws)
    w = complex_normal(rng, n_draws, np.sqrt(noise_power_mw))
    y = link.m * x + w
    x_hat = mmse_symbol_estimate(y, link.m_hat, noise_power_mw)
    return np.abs(x - x_hat) ** 2


def symbol_mse_mc(
    link: ScalarLink,
    noise_power_mw: float,
    n_draws: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte-Carlo symbol MSE plus its standard error; cross-checks data_mse."""
    sq_err = symbol_sq_errors(link, noise_power_mw, n_draws, rng)
    return float(sq_err.mean()), float(sq_err.std(ddof=1) / np.sqrt(n_draws))
