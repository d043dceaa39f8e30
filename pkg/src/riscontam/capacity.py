"""Ergodic capacity lower bound under residual channel-estimation error.

During data transmission BS k receives y = v_k x + w with the scalar

    v_k = sqrt(Pd) * (phi_k^T diag(h_k) g_k + phi_j^T r_k),

where both surfaces are phase-aligned to their own operator's estimate.  A
standard side-information bound gives, per realization of the estimates and
configurations,

    log2(1 + |E[v | side info]|^2 / (Var(v | side info) + noise power)),

and averaging over estimate realizations lower-bounds the ergodic capacity.
In the high pilot-power regime the estimate is either exact (orthogonal
sequences) or truth plus diag(h)^-1 r (shared sequences), so the conditional
moments follow from jointly Gaussian (g, r) observed through g_hat.

Two cross-moment variants are implemented for E[g r^H | g_hat]: the exact
joint-Gaussian conditioning ("gaussian", default) and an alternative
closed-form chain ("lmmse") kept for comparison; validation reports how far
the two sit apart.  Means and marginal variances of the two variants agree.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import ChannelPriors, ChannelSet, complex_normal, sample_deterministic_fixture, sigma_r
from .params import IDENTICAL, ORTHOGONAL, SystemParams
from .sequences import RisPhaseConfig
from .streams import derive_rng

CROSS_TERM_VARIANTS = ("gaussian", "lmmse")


def csi_error_model(mode: str, ch: ChannelSet, k: int) -> np.ndarray:
    """Channel estimate left after pilot noise has averaged out.

    Orthogonal sequences leave the true channel; shared sequences leave the
    cross reflection folded through the known serving channel on top of it.
    """
    if mode == ORTHOGONAL:
        return ch.g(k).copy()
    if mode == IDENTICAL:
        return ch.g(k) + ch.r(k) / ch.h(k)
    raise ValueError(f"unknown sequence mode {mode!r}")


@dataclass(frozen=True, eq=False)
class ConditionalMoments:
    """First and second moments of (g, r) given the estimate g_hat."""

    mean_g: np.ndarray
    mean_r: np.ndarray
    var_g: np.ndarray
    var_r: np.ndarray
    cross_gr: np.ndarray  # E[g r^H | g_hat]


def _trivial_moments(g_hat: np.ndarray, sigma_r_m: np.ndarray) -> ConditionalMoments:
    n = g_hat.size
    zero = np.zeros((n, n), dtype=complex)
    return ConditionalMoments(
        mean_g=g_hat.astype(complex),
        mean_r=np.zeros(n, dtype=complex),
        var_g=zero,
        var_r=sigma_r_m.astype(complex),
        cross_gr=zero.copy(),
    )


def conditional_moments_lmmse(
    g_hat: np.ndarray,
    h: np.ndarray,
    sigma_g: np.ndarray,
    sigma_r_m: np.ndarray,
    mode: str,
) -> ConditionalMoments:
    """Closed-form conditional moments written as chained LMMSE expressions.

    For shared sequences, with S = Sigma_g + D^-1 Sigma_r D^-H and D=diag(h):

        E[g|g_hat]   = Sigma_g S^-1 g_hat
        E[r|g_hat]   = Sigma_r D^-H S^-1 g_hat
        Var(g|g_hat) = Sigma_g - Sigma_g S^-1 Sigma_g
        Var(r|g_hat) = Sigma_r - Sigma_r D^-H S^-1 D^-1 Sigma_r
        E[g r^H|g_hat] = g_hat g_hat^H S^-1 Sigma_r D^-H - D^-1 Sigma_r

    The cross-moment line is kept verbatim for comparison purposes even
    though it disagrees with exact Gaussian conditioning; see
    conditional_moments_gaussian.
    """
    if mode == ORTHOGONAL:
        return _trivial_moments(g_hat, sigma_r_m)
    if mode != IDENTICAL:
        raise ValueError(f"unknown sequence mode {mode!r}")
    dinv_sr = sigma_r_m / h[:, None]  # D^-1 Sigma_r
    s = sigma_g + dinv_sr / h.conj()[None, :]
    mean_g = sigma_g @ np.linalg.solve(s, g_hat)
    mean_r = dinv_sr.conj().T @ np.linalg.solve(s, g_hat)
    var_g = sigma_g - sigma_g @ np.linalg.solve(s, sigma_g)
    var_r = sigma_r_m - dinv_sr.conj().T @ np.linalg.solve(s, dinv_sr)
    cross = np.outer(g_hat, g_hat.conj()) @ np.linalg.solve(s, dinv_sr.conj().T) - dinv_sr
    return ConditionalMoments(
        mean_g=mean_g, mean_r=mean_r, var_g=var_g, var_r=var_r, cross_gr=cross
    )


def conditional_moments_gaussian(
    g_hat: np.ndarray,
    h: np.ndarray,
    sigma_g: np.ndarray,
    sigma_r_m: np.ndarray,
    mode: str,
) -> ConditionalMoments:
    """Exact conditional moments via joint-Gaussian block conditioning.

    Stacks z = [g; r] with block-diagonal prior covariance, models the
    observation g_hat = g + D^-1 r as a linear map of z and conditions the
    full 2N-dimensional vector on it.  Serves as the reference the chained
    closed forms are checked against.
    """
    if mode == ORTHOGONAL:
        return _trivial_moments(g_hat, sigma_r_m)
    if mode != IDENTICAL:
        raise ValueError(f"unknown sequence mode {mode!r}")
    n = h.size
    prior = np.zeros((2 * n, 2 * n), dtype=complex)
    prior[:n, :n] = sigma_g
    prior[n:, n:] = sigma_r_m
    obs_map = np.hstack([np.eye(n), np.diag(1.0 / h)])
    c_z_obs = prior @ obs_map.conj().T             # (2N, N)
    s = obs_map @ c_z_obs                          # covariance of g_hat
    gain = np.linalg.solve(s.conj().T, c_z_obs.conj().T).conj().T  # C S^-1
    mean_z = gain @ g_hat
    cond_cov = prior - gain @ c_z_obs.conj().T
    mean_g, mean_r = mean_z[:n], mean_z[n:]
    cross = cond_cov[:n, n:] + np.outer(mean_g, mean_r.conj())
    return ConditionalMoments(
        mean_g=mean_g,
        mean_r=mean_r,
        var_g=cond_cov[:n, :n],
        var_r=cond_cov[n:, n:],
        cross_gr=cross,
    )


@dataclass(frozen=True)
class CapacitySample:
    """One realization's contribution to the capacity lower bound."""

    cond_mean_v: complex
    cond_var_v: float
    se_term: float
    v: complex | None = None


def capacity_sample(
    moments: ConditionalMoments,
    phi_k: RisPhaseConfig,
    phi_j: RisPhaseConfig,
    h: np.ndarray,
    data_power_mw: float,
    noise_power_mw: float,
    v: complex | None = None,
) -> CapacitySample:
    """Spectral-efficiency term for one estimate/configuration realization.

    Builds E[v | side info] and Var(v | side info) from the conditional
    moments; the variance decomposes into the two marginal quadratic forms
    plus the cross term 2 Re(a^T Cov(g, r | g_hat) conj(phi_j)) with
    a = diag(h) phi_k, everything scaled by the data power.  Round-off can
    push the variance marginally negative, in which case it is clipped at 0.
    """
    a = h * phi_k.coefficients
    f = phi_j.coefficients
    mean_term_g = a @ moments.mean_g
    mean_term_r = f @ moments.mean_r
    amp = np.sqrt(data_power_mw)
    cond_mean = amp * (mean_term_g + mean_term_r)
    quad_g = np.real(a @ moments.var_g @ a.conj())
    quad_r = np.real(f @ moments.var_r @ f.conj())
    cross = np.real(a @ moments.cross_gr @ f.conj())
    mean_prod = np.real(mean_term_g * np.conj(mean_term_r))
    cond_var = data_power_mw * (quad_g + quad_r + 2.0 * cross - 2.0 * mean_prod)
    cond_var = max(float(cond_var), 0.0)
    sinr = np.abs(cond_mean) ** 2 / (cond_var + noise_power_mw)
    return CapacitySample(
        cond_mean_v=complex(cond_mean),
        cond_var_v=cond_var,
        se_term=float(np.log2(1.0 + sinr)),
        v=v,
    )


class _Conditioner:
    """Precomputed fixed matrices for fast per-trial moment evaluation."""

    def __init__(self, mode: str, h: np.ndarray, sigma_g: np.ndarray, sigma_r_m: np.ndarray):
        self.mode = mode
        self.h = h
        self.sigma_r_m = sigma_r_m
        if mode == ORTHOGONAL:
            return
        dinv_sr = sigma_r_m / h[:, None]
        s = sigma_g + dinv_sr / h.conj()[None, :]
        self.dinv_sr = dinv_sr
        # X = A S^-1 solved as S X^H = A^H for Hermitian S.
        self.mg = np.linalg.solve(s, sigma_g).conj().T
        self.mr = np.linalg.solve(s, dinv_sr).conj().T
        self.var_g = sigma_g - self.mg @ sigma_g
        self.var_r = sigma_r_m - self.mr @ dinv_sr
        self.cond_cross_cov = -self.mg @ dinv_sr          # Cov(g, r | g_hat)
        self.w_lmmse = np.linalg.solve(s, dinv_sr.conj().T)  # S^-1 Sigma_r D^-H

    def mean_pair(self, g_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.mode == ORTHOGONAL:
            return g_hat, np.zeros_like(g_hat)
        return self.mg @ g_hat, self.mr @ g_hat

    def var_terms(
        self, g_hat: np.ndarray, a: np.ndarray, f: np.ndarray, cross_term: str
    ) -> float:
        """Data-power-free conditional variance of v for this trial."""
        if self.mode == ORTHOGONAL:
            return float(np.real(f @ self.sigma_r_m @ f.conj()))
        quad_g = np.real(a @ (self.var_g @ a.conj()))
        quad_r = np.real(f @ (self.var_r @ f.conj()))
        if cross_term == "gaussian":
            cross = np.real(a @ (self.cond_cross_cov @ f.conj()))
            return float(quad_g + quad_r + 2.0 * cross)
        # "lmmse": rank-one cross-moment expression minus the mean product.
        mean_g, mean_r = self.mean_pair(g_hat)
        t1 = (a @ g_hat) * (g_hat.conj() @ (self.w_lmmse @ f.conj()))
        t1 = t1 - a @ (self.dinv_sr @ f.conj())
        t2 = (a @ mean_g) * np.conj(f @ mean_r)
        return float(quad_g + quad_r + 2.0 * np.real(t1) - 2.0 * np.real(t2))


def capacity_mc_components(
    params: SystemParams,
    priors: ChannelPriors,
    trials: int,
    master_seed: int,
    mode: str,
    cross_term: str = "gaussian",
    workers: int = 1,
    ch: ChannelSet | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial conditional means and variances with the data power factored out.

    Returns (mean_nopd, var_nopd) of shapes (2, trials): entry [k-1, t] holds
    E[v_k | side info] / sqrt(Pd) and Var(v_k | side info) / Pd for trial t.
    The spectral-efficiency term at any data power Pd and noise power s is
    then log2(1 + Pd |mean|^2 / (Pd var + s)), which lets one sweep to reuse
    the same trials across a whole power grid.

    Each trial draws its randomness from a counter-derived stream, so the
    output is identical for any `workers` value.
    """
    if cross_term not in CROSS_TERM_VARIANTS:
        raise ValueError(f"cross_term must be one of {CROSS_TERM_VARIANTS}")
    if ch is None:
        ch = sample_deterministic_fixture(params)
    factor_g = priors.sigma_g.sqrt_factor
    factor_p = priors.sigma_p.sqrt_factor
    n = params.n_elements
    conds = {
        k: _Conditioner(mode, ch.h(k), priors.sigma_g.matrix, sigma_r(priors, ch.q(k)).matrix)
        for k in (1, 2)
    }
    label = f"capacity/{mode}"
    mean_nopd = np.zeros((2, trials), dtype=complex)
    var_nopd = np.zeros((2, trials))

    def run_block(start: int, stop: int) -> None:
        for t in range(start, stop):
            rng = derive_rng(master_seed, label, t)
            g = {1: factor_g @ complex_normal(rng, n), 2: None}
            p = {1: factor_p @ complex_normal(rng, n), 2: None}
            g[2] = factor_g @ complex_normal(rng, n)
            p[2] = factor_p @ complex_normal(rng, n)
            r = {k: ch.q(k) * p[k] for k in (1, 2)}
            if mode == ORTHOGONAL:
                g_hat = g
            else:
                g_hat = {k: g[k] + r[k] / ch.h(k) for k in (1, 2)}
            coeff = {
                k: np.exp(-1j * (np.angle(ch.h(k)) + np.angle(g_hat[k])))
                for k in (1, 2)
            }
            for k, j in ((1, 2), (2, 1)):
                a = ch.h(k) * coeff[k]
                f = coeff[j]
                mean_g, mean_r = conds[k].mean_pair(g_hat[k])
                mean_nopd[k - 1, t] = a @ mean_g + f @ mean_r
                var_nopd[k - 1, t] = max(
                    conds[k].var_terms(g_hat[k], a, f, cross_term), 0.0
                )

    block = 256
    spans = [(s, min(s + block, trials)) for s in range(0, trials, block)]
    if workers <= 1:
        for span in spans:
            run_block(*span)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda span: run_block(*span), spans))
    return mean_nopd, var_nopd


def se_terms_at_power(
    mean_nopd: np.ndarray,
    var_nopd: np.ndarray,
    data_power_mw: float,
    noise_power_mw: float,
) -> np.ndarray:
    """Per-trial spectral-efficiency terms at one data power."""
    num = data_power_mw * np.abs(mean_nopd) ** 2
    den = data_power_mw * var_nopd + noise_power_mw
    return np.log2(1.0 + num / den)


def capacity_lower_bound_mc(
    params: SystemParams,
    priors: ChannelPriors,
    trials: int,
    master_seed: int | None = None,
    cross_term: str = "gaussian",
    user: int = 1,
    workers: int = 1,
) -> tuple[float, float]:
    """Monte-Carlo capacity lower bound (bits/use) with its standard error.

    Uses params.config_mode, params.data_power_dBm and, unless master_seed
    is given, params.seed.
    """
    seed = params.seed if master_seed is None else master_seed
    mean_nopd, var_nopd = capacity_mc_components(
        params, priors, trials, seed, params.config_mode, cross_term, workers
    )
    se = se_terms_at_power(
        mean_nopd[user - 1], var_nopd[user - 1], params.data_power_mw, params.noise_power_mw
    )
    return float(se.mean()), float(se.std(ddof=1) / np.sqrt(trials))
