"""Self-validation: every module's key identities re-checked at desk scale.

Each check prints one line `CHECK <name> PASS|FAIL <detail>`.  REPORT lines
carry non-gating diagnostics (currently the gap between the two cross-moment
variants of the capacity module).
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import bayes_estimation as bayes
from . import capacity as cap
from . import data_link
from . import det_estimation as det
from .channels import (
    channel_priors,
    complex_normal,
    received_pilots,
    sample_deterministic_fixture,
    sigma_r,
)
from .experiments import (
    CHANEST_DET,
    CAPACITY,
    SweepSpec,
    mc_bayes_error_samples,
    mc_mml_nmse_samples,
    rows_to_csv,
    run_capacity,
    run_chanest_det,
    synthetic_bayes_setup,
)
from .geometry import (
    SpatialCovariance,
    isotropic_covariance,
    isotropic_covariance_quadrature,
    parse_geometry,
)
from .params import (
    IDENTICAL,
    ORTHOGONAL,
    PERFECT_CSI,
    SystemParams,
    db_to_amplitude,
    dbm_to_linear,
    linear_to_dbm,
)
from .sequences import (
    RisPhaseConfig,
    cascaded_gain,
    make_identical_pair,
    make_orthogonal_pair,
    phase_align,
)
from .streams import derive_rng


def desk_params(mode: str = IDENTICAL, seed: int = 3) -> SystemParams:
    """Small-N parameter set with production-style powers and path losses."""
    return SystemParams(
        n_elements=16,
        pilot_len=32 if mode == IDENTICAL else 64,
        pilot_power_dBm=0.0,
        data_power_dBm=10.0,
        noise_power_dBm=-90.0,
        pathloss_ue_ris_dB=-80.0,
        pathloss_ris_bs_dB=-60.0,
        geometry=parse_geometry("ura:4x4:0.5"),
        config_mode=mode,
        seed=seed,
    )


def covariance_sigma_ratios(errors: np.ndarray, theory: np.ndarray) -> np.ndarray:
    """Entrywise |empirical - theory| in units of the Monte-Carlo stderr.

    errors has one column per trial; real and imaginary parts are compared
    separately and the worse of the two is returned per entry.
    """
    trials = errors.shape[1]
    prods = errors[:, None, :] * errors.conj()[None, :, :]
    emp = prods.mean(axis=2)
    tiny = 1e-12 * float(np.max(np.abs(theory))) + 1e-300

    def part_ratio(emp_p, theory_p, samples_p):
        se = samples_p.std(axis=2, ddof=1) / np.sqrt(trials)
        diff = np.abs(emp_p - theory_p)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff <= tiny, 0.0, np.inf))
        return ratio

    return np.maximum(
        part_ratio(emp.real, theory.real, prods.real),
        part_ratio(emp.imag, theory.imag, prods.imag),
    )


def _rel_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), 1e-300)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / scale


# --------------------------------------------------------------------------
# Individual checks.  Each returns (ok, detail).
# --------------------------------------------------------------------------

def _check_units():
    worst = 0.0
    for v in (-90.0, -80.0, -60.0, -30.0, 0.0, 17.0, 40.0):
        worst = max(worst, abs(linear_to_dbm(dbm_to_linear(v)) - v))
        worst = max(
            worst,
            abs(db_to_amplitude(v) ** 2 - dbm_to_linear(v)) / dbm_to_linear(v),
        )
    fixed = (
        abs(dbm_to_linear(-90.0) - 1e-9) / 1e-9,
        abs(db_to_amplitude(-80.0) - 1e-4) / 1e-4,
        abs(db_to_amplitude(-60.0) - 1e-3) / 1e-3,
    )
    worst = max(worst, *fixed)
    return worst < 1e-12, f"worst_rel_err={worst:.2e}"


def _check_covariance_psd():
    worst_eig = np.inf
    for token, beta in (("ura:4x4:0.5", 1e-8), ("ula:8:0.5", 1.0), ("ura:8x8:0.25", 2.0)):
        cov = isotropic_covariance(parse_geometry(token), beta)
        w = np.linalg.eigvalsh(cov.matrix)
        worst_eig = min(worst_eig, float(w.min()) / beta)
        if abs(np.real(np.trace(cov.matrix)) - cov.n_elements * beta) > 1e-9 * beta * cov.n_elements:
            return False, f"trace mismatch for {token}"
    return worst_eig >= -1e-10, f"min_eig_over_beta={worst_eig:.2e}"


def _check_covariance_quadrature():
    geom = parse_geometry("ura:3x3:0.37")
    closed = isotropic_covariance(geom, 2.5).matrix
    quad = isotropic_covariance_quadrature(geom, 2.5)
    gap = float(np.max(np.abs(closed - quad)))
    return gap < 1e-9, f"max_abs_gap={gap:.2e}"


def _check_covariance_limits():
    dense = isotropic_covariance(parse_geometry("ura:3x3:1e-8"), 3.0).matrix
    gap_dense = float(np.max(np.abs(dense - 3.0)))
    ula = isotropic_covariance(parse_geometry("ula:8:0.5"), 2.0).matrix
    gap_diag = float(np.max(np.abs(ula - 2.0 * np.eye(8))))
    ok = gap_dense < 1e-10 and gap_diag < 1e-12
    return ok, f"dense_gap={gap_dense:.2e} ula_offdiag={gap_diag:.2e}"


def _check_sequences_unitary():
    worst = 0.0
    for n, length in ((2, 4), (2, 5), (16, 32), (64, 128)):
        seq, seq_b = make_identical_pair(n, length)
        if seq_b.matrix is not seq.matrix:
            return False, "identical pair should share one matrix"
        worst = max(worst, float(np.max(np.abs(np.abs(seq.matrix) - 1.0))))
        gram = seq.matrix.conj().T @ seq.matrix
        worst = max(worst, float(np.max(np.abs(gram - length * np.eye(n)))) / length)
    for n, length in ((2, 4), (16, 64), (64, 128)):
        s1, s2 = make_orthogonal_pair(n, length)
        cross = s1.matrix.conj().T @ s2.matrix
        worst = max(worst, float(np.max(np.abs(cross))) / length)
        gram2 = s2.matrix.conj().T @ s2.matrix
        worst = max(worst, float(np.max(np.abs(gram2 - length * np.eye(n)))) / length)
    return worst < 1e-10, f"worst_norm_err={worst:.2e}"


def _check_phase_align():
    rng = np.random.default_rng(11)
    h = complex_normal(rng, 16)
    g = complex_normal(rng, 16)
    cfg = phase_align(h, g)
    val = cascaded_gain(h, cfg, g)
    target = float(np.sum(np.abs(h) * np.abs(g)))
    if abs(val.imag) > 1e-12 * target or abs(val.real - target) > 1e-12 * target:
        return False, f"aligned gain {val} != {target}"
    for _ in range(100):
        other = RisPhaseConfig(phases=rng.uniform(0, 2 * np.pi, 16))
        if cascaded_gain(h, other, g).real > target + 1e-12 * target:
            return False, "random configuration beat the aligned one"
    return True, f"aligned_gain={target:.3e}"


def _check_pilots_slotwise():
    params = desk_params(IDENTICAL)
    ch = sample_deterministic_fixture(params)
    worst = 0.0
    for mode, (s1, s2) in (
        (IDENTICAL, make_identical_pair(16, 32)),
        (ORTHOGONAL, make_orthogonal_pair(16, 64)),
    ):
        for k in (1, 2):
            y = received_pilots(ch, s1, s2, 2.0, k)
            serving = s1 if k == 1 else s2
            crossing = s2 if k == 1 else s1
            y_slots = np.array(
                [
                    np.sqrt(2.0)
                    * (
                        serving.matrix[t] @ (ch.h(k) * ch.g(k))
                        + crossing.matrix[t] @ ch.r(k)
                    )
                    for t in range(serving.n_slots)
                ]
            )
            worst = max(worst, float(np.max(np.abs(y - y_slots)) / np.max(np.abs(y))))
    return worst < 1e-12, f"worst_rel_gap={worst:.2e}"


def _check_pilots_deterministic():
    params = desk_params(IDENTICAL)
    a = sample_deterministic_fixture(params)
    b = sample_deterministic_fixture(params)
    c = sample_deterministic_fixture(params, seed=params.seed + 1)
    same = all(
        np.array_equal(getattr(a, f), getattr(b, f))
        for f in ("h1", "h2", "g1", "g2", "p1", "p2", "q1", "q2")
    )
    differs = not np.array_equal(a.h1, c.h1)
    return same and differs, "same-seed identical, shifted-seed differs"


def _check_mml_joint_agree():
    rng = np.random.default_rng(7)
    s1, s2 = make_orthogonal_pair(8, 16)
    worst = 0.0
    for _ in range(20):
        h = complex_normal(rng, 8)
        y = complex_normal(rng, 16, 2.0)
        g_mml = det.mml_estimate(y, s1, h, 1.7)
        g_joint, _ = det.joint_ml_estimate(y, s1, s2, h, 1.7)
        worst = max(worst, float(np.max(np.abs(g_mml - g_joint))))
    return worst < 1e-10, f"max_abs_gap={worst:.2e}"


def _check_mml_structure():
    params = desk_params(IDENTICAL)
    ch = sample_deterministic_fixture(params)
    s1, s2 = make_identical_pair(16, 32)
    y = received_pilots(ch, s1, s2, 4.0, 1)
    g_hat = det.mml_estimate(y, s1, ch.h1, 4.0)
    bias = det.contamination_bias(ch.h1, ch.q1, ch.p1, IDENTICAL)
    gap_b = float(np.max(np.abs(g_hat - ch.g1 - bias)) / np.max(np.abs(ch.g1)))
    o1, o2 = make_orthogonal_pair(16, 64)
    y2 = received_pilots(ch, o1, o2, 4.0, 1)
    g_hat2 = det.mml_estimate(y2, o1, ch.h1, 4.0)
    gap_o = float(np.max(np.abs(g_hat2 - ch.g1)) / np.max(np.abs(ch.g1)))
    g_j, r_j = det.joint_ml_estimate(y2, o1, o2, ch.h1, 4.0)
    gap_j = max(
        float(np.max(np.abs(g_j - ch.g1)) / np.max(np.abs(ch.g1))),
        float(np.max(np.abs(r_j - ch.r(1))) / np.max(np.abs(ch.r(1)))),
    )
    ok = gap_b < 1e-9 and gap_o < 1e-9 and gap_j < 1e-7
    return ok, f"bias_gap={gap_b:.2e} orth_gap={gap_o:.2e} joint_gap={gap_j:.2e}"


def _check_joint_ml_singular():
    s1, s2 = make_identical_pair(8, 16)
    h = np.exp(1j * np.linspace(0.1, 2.0, 8))
    try:
        det.joint_ml_estimate(np.ones(16, dtype=complex), s1, s2, h, 1.0)
    except np.linalg.LinAlgError:
        return True, "identical sequences correctly rejected"
    return False, "no error raised for a singular joint problem"


def _check_det_error_cov():
    rng = np.random.default_rng(23)
    n, length, trials = 8, 16, 4000
    s1, s2 = make_orthogonal_pair(n, length)
    h = complex_normal(rng, n)
    noise_mw, pp = 0.3, 1.4
    w = complex_normal(rng, (length, trials), np.sqrt(noise_mw))
    g_hat = det.mml_estimate(w, s1, h, pp)  # zero signal: estimate = pure error
    theory = (noise_mw / (length * pp)) * np.diag(1.0 / np.abs(h) ** 2).astype(complex)
    ratios = covariance_sigma_ratios(g_hat, theory)
    return float(ratios.max()) <= 3.5, f"max_sigma_ratio={ratios.max():.2f}"


def _check_det_nmse_mc():
    worst = 0.0
    for mode in (IDENTICAL, ORTHOGONAL):
        params = desk_params(mode)
        ch = sample_deterministic_fixture(params)
        samples = mc_mml_nmse_samples(
            ch, mode, params.pilot_len, 1.0, params.noise_power_mw, 4000, 5
        )
        bias = det.contamination_bias(ch.h1, ch.q1, ch.p1, mode)
        closed = det.nmse(
            det.mse_trace(bias, ch.h1, 1.0, params.pilot_len, params.noise_power_mw),
            ch.g1,
        )
        stderr = samples.std(ddof=1) / np.sqrt(samples.size)
        worst = max(worst, abs(samples.mean() - closed) / stderr)
    return worst <= 3.0, f"max_sigma_ratio={worst:.2f}"


def _check_det_mc_sensitivity():
    params = desk_params(IDENTICAL)
    ch = sample_deterministic_fixture(params)
    samples = mc_mml_nmse_samples(
        ch, IDENTICAL, params.pilot_len, 1.0, params.noise_power_mw, 4000, 5
    )
    bias = det.contamination_bias(ch.h1, ch.q1, ch.p1, IDENTICAL)
    closed = det.nmse(
        det.mse_trace(bias, ch.h1, 1.0, params.pilot_len, params.noise_power_mw),
        ch.g1,
    )
    stderr = samples.std(ddof=1) / np.sqrt(samples.size)
    ratio = abs(samples.mean() - 1.5 * closed) / stderr
    return ratio > 3.0, f"tampered_constant_sigma_ratio={ratio:.1f}"


def _check_det_floor():
    params = desk_params(IDENTICAL)
    ch = sample_deterministic_fixture(params)
    bias = det.contamination_bias(ch.h1, ch.q1, ch.p1, IDENTICAL)
    floor = det.bias_floor(bias)
    huge = det.mse_trace(bias, ch.h1, 1e12, 32, params.noise_power_mw)
    rel = abs(huge - floor) / floor
    grid = [det.mse_trace(bias, ch.h1, dbm_to_linear(p), 32, params.noise_power_mw)
            for p in np.arange(-30.0, 65.0, 5.0)]
    monotone = all(a >= b for a, b in zip(grid, grid[1:]))
    l_free = det.mse_trace(bias, ch.h1, 1e12, 64, params.noise_power_mw)
    ok = rel < 1e-6 and monotone and abs(l_free - floor) / floor < 1e-6
    return ok, f"limit_rel_gap={rel:.2e} monotone={monotone}"


def _check_data_epsilon():
    params = desk_params(IDENTICAL)
    ch = sample_deterministic_fixture(params)
    pd_mw = 3.0
    amp = np.sqrt(pd_mw)
    worst = 0.0
    link_i = data_link.high_pilot_snr_link(ch, IDENTICAL, pd_mw, 1)
    bias1 = det.contamination_bias(ch.h1, ch.q1, ch.p1, IDENTICAL)
    bias2 = det.contamination_bias(ch.h2, ch.q2, ch.p2, IDENTICAL)
    phi_1 = phase_align(ch.h1, ch.g1 + bias1)
    phi_2 = phase_align(ch.h2, ch.g2 + bias2)
    expect_i = amp * np.sum(
        ch.q1 * (phi_2.coefficients - phi_1.coefficients) * ch.p1
    )
    worst = max(worst, abs(link_i.epsilon - expect_i) / abs(expect_i))
    link_o = data_link.high_pilot_snr_link(ch, ORTHOGONAL, pd_mw, 1)
    phi_2o = phase_align(ch.h2, ch.g2)
    expect_o = amp * np.sum(ch.q1 * phi_2o.coefficients * ch.p1)
    worst = max(worst, abs(link_o.epsilon - expect_o) / abs(expect_o))
    link_p = data_link.high_pilot_snr_link(ch, PERFECT_CSI, pd_mw, 1)
    worst = max(worst, abs(link_p.epsilon))
    return worst < 1e-10, f"worst_gap={worst:.2e}"


def _check_data_mse_mc():
    params = desk_params(IDENTICAL)
    ch = sample_deterministic_fixture(params)
    worst = 0.0
    for mode in (IDENTICAL, ORTHOGONAL, PERFECT_CSI):
        link = data_link.high_pilot_snr_link(ch, mode, dbm_to_linear(10.0), 1)
        closed = data_link.data_mse(link, params.noise_power_mw)
        mc, se = data_link.symbol_mse_mc(
            link, params.noise_power_mw, 200_000, derive_rng(9, f"val/{mode}", 0)
        )
        worst = max(worst, abs(mc - closed) / se)
    return worst <= 3.0, f"max_sigma_ratio={worst:.2f}"


def _check_data_mse_floor_limit():
    params = desk_params(IDENTICAL)
    ch = sample_deterministic_fixture(params)
    worst = 0.0
    for mode in (IDENTICAL, ORTHOGONAL):
        link = data_link.high_pilot_snr_link(ch, mode, dbm_to_linear(10.0), 1)
        tiny_noise = 1e-12 * abs(link.m_hat) ** 2
        floor = data_link.data_mse_floor(link)
        worst = max(worst, abs(data_link.data_mse(link, tiny_noise) - floor) / floor)
    link_p = data_link.high_pilot_snr_link(ch, PERFECT_CSI, dbm_to_linear(10.0), 1)
    perfect = data_link.data_mse(link_p, 1e-12 * abs(link_p.m_hat) ** 2)
    ok = worst < 1e-3 and perfect < 1e-9
    return ok, f"worst_rel_gap={worst:.2e} perfect_csi_limit={perfect:.2e}"


def _check_bayes_uncontaminated():
    rng = np.random.default_rng(31)
    n, length, trials = 2, 4, 4000
    s1, s2 = make_identical_pair(n, length)
    h = complex_normal(rng, n)
    a = complex_normal(rng, (n, n))
    sigma_g = SpatialCovariance(
        matrix=a @ a.conj().T + 0.4 * np.eye(n),
        variance_per_element=float(np.real(np.trace(a @ a.conj().T + 0.4 * np.eye(n)))) / n,
    )
    priors_zero = dataclasses.replace(
        channel_priors(desk_params()), sigma_g=sigma_g,
        sigma_p=SpatialCovariance(np.zeros((n, n)), 0.0),
    )
    errors = mc_bayes_error_samples(
        s1, s2, h, np.zeros(n, dtype=complex), priors_zero, 1.3, 0.4, trials, 17
    )
    cov = bayes.pilot_covariances(
        s1, s2, h, sigma_g.matrix, np.zeros((n, n)), 1.3, 0.4
    )
    uncont, contam = bayes.error_covariance_parts(cov)
    if float(np.abs(contam).max()) > 1e-15:
        return False, "contamination term nonzero without a cross channel"
    emp = float(np.mean(np.sum(np.abs(errors) ** 2, axis=0)))
    per_trial = np.sum(np.abs(errors) ** 2, axis=0)
    se = per_trial.std(ddof=1) / np.sqrt(trials)
    ratio = abs(emp - float(np.real(np.trace(uncont)))) / se
    return ratio <= 3.0, f"trace_sigma_ratio={ratio:.2f}"


def _check_bayes_error_cov_mc():
    rng = np.random.default_rng(37)
    n, length, trials = 8, 16, 4000
    s1, s2 = make_identical_pair(n, length)
    h = complex_normal(rng, n)
    q = complex_normal(rng, n)
    params = desk_params()
    base = channel_priors(params)

    def scaled_pd(seed):
        r = np.random.default_rng(seed)
        a = complex_normal(r, (n, n)) / np.sqrt(n)
        m = a @ a.conj().T + 0.5 * np.eye(n)
        return SpatialCovariance(m, float(np.real(np.trace(m))) / n)

    priors = dataclasses.replace(base, sigma_g=scaled_pd(1), sigma_p=scaled_pd(2))
    sr = sigma_r(priors, q)
    pp, noise_mw = 1.0, 0.5
    errors = mc_bayes_error_samples(
        s1, s2, h, q, priors, pp, noise_mw, trials, 19
    )
    cov = bayes.pilot_covariances(
        s1, s2, h, priors.sigma_g.matrix, sr.matrix, pp, noise_mw
    )
    theory = bayes.error_covariance(cov)
    ratios = covariance_sigma_ratios(errors, theory)
    return float(ratios.max()) <= 3.5, f"max_sigma_ratio={ratios.max():.2f}"


def _check_bayes_contamination_invariant():
    h, q, priors, sr = synthetic_bayes_setup(16, 41)
    s1, s2 = make_identical_pair(16, 32)
    noise_mw = 1e-9
    terms = []
    for pp in (1.0, 1e3, 1e6):
        cov = bayes.pilot_covariances(
            s1, s2, h, priors.sigma_g.matrix, sr.matrix, pp, noise_mw
        )
        terms.append(bayes.error_covariance_parts(cov)[1])
    gap = max(_rel_gap(terms[0], terms[1]), _rel_gap(terms[0], terms[2]))
    return gap <= 1e-9, f"max_rel_gap={gap:.2e}"


def _check_bayes_high_snr():
    h, q, priors, sr = synthetic_bayes_setup(16, 43)
    s1, s2 = make_identical_pair(16, 32)
    noise_mw, pp = 1e-12, 1.0
    cov = bayes.pilot_covariances(
        s1, s2, h, priors.sigma_g.matrix, sr.matrix, pp, noise_mw
    )
    total = bayes.error_covariance(cov)
    floor = bayes.high_snr_contamination(s1, s2, h, sr.matrix)
    gap = _rel_gap(total, floor)
    o1, o2 = make_orthogonal_pair(16, 64)
    cov_o = bayes.pilot_covariances(
        o1, o2, h, priors.sigma_g.matrix, sr.matrix, pp, noise_mw
    )
    trace_o = float(np.real(np.trace(bayes.error_covariance(cov_o))))
    f32 = bayes.high_snr_contamination(*make_identical_pair(16, 32), h, sr.matrix)
    f64 = bayes.high_snr_contamination(*make_identical_pair(16, 64), h, sr.matrix)
    bit_equal = np.array_equal(f32, f64)
    ok = gap <= 1e-6 and trace_o <= 1e-12 and bit_equal
    return ok, f"floor_rel_gap={gap:.2e} orth_trace={trace_o:.2e} bit_equal={bit_equal}"


def _check_bayes_psd_monotone():
    h, q, priors, sr = synthetic_bayes_setup(16, 47)
    s1, s2 = make_identical_pair(16, 32)
    o1, o2 = make_orthogonal_pair(16, 64)
    noise_mw = 0.3
    traces, max_eigs = [], []
    min_eig = np.inf
    for pp in (0.1, 1.0, 10.0, 100.0):
        cov_i = bayes.pilot_covariances(
            s1, s2, h, priors.sigma_g.matrix, sr.matrix, pp, noise_mw
        )
        uncont, contam = bayes.error_covariance_parts(cov_i)
        total = uncont + contam
        w = np.linalg.eigvalsh(total)
        min_eig = min(min_eig, float(w.min()))
        if np.real(np.trace(total)) < np.real(np.trace(uncont)) - 1e-12:
            return False, "total trace below the noise-limited part"
        cov_o = bayes.pilot_covariances(
            o1, o2, h, priors.sigma_g.matrix, sr.matrix, pp, noise_mw
        )
        tot_o = bayes.error_covariance(cov_o)
        traces.append(float(np.real(np.trace(tot_o))))
        max_eigs.append(float(np.linalg.eigvalsh(tot_o).max()))
    mono = all(a >= b - 1e-12 for a, b in zip(traces, traces[1:])) and all(
        a >= b - 1e-12 for a, b in zip(max_eigs, max_eigs[1:])
    )
    ok = min_eig >= -1e-10 and mono
    return ok, f"min_eig={min_eig:.2e} orth_monotone={mono}"


def _check_capacity_consistency():
    h, q, priors, sr = synthetic_bayes_setup(16, 53)
    worst = 0.0
    rng = np.random.default_rng(59)
    for _ in range(10):
        g_hat = complex_normal(rng, 16, 2.0)
        for fn in (cap.conditional_moments_gaussian, cap.conditional_moments_lmmse):
            m = fn(g_hat, h, priors.sigma_g.matrix, sr.matrix, IDENTICAL)
            recon = m.mean_g + m.mean_r / h
            worst = max(worst, float(np.max(np.abs(recon - g_hat)) / np.max(np.abs(g_hat))))
    return worst <= 1e-9, f"worst_rel_gap={worst:.2e}"


def _check_capacity_moments_agree():
    h, q, priors, sr = synthetic_bayes_setup(16, 61)
    rng = np.random.default_rng(67)
    worst = 0.0
    for _ in range(20):
        g_hat = complex_normal(rng, 16)
        a = cap.conditional_moments_gaussian(g_hat, h, priors.sigma_g.matrix, sr.matrix, IDENTICAL)
        b = cap.conditional_moments_lmmse(g_hat, h, priors.sigma_g.matrix, sr.matrix, IDENTICAL)
        worst = max(worst, _rel_gap(a.mean_g, b.mean_g), _rel_gap(a.mean_r, b.mean_r))
        worst = max(worst, _rel_gap(a.var_g, b.var_g), _rel_gap(a.var_r, b.var_r))
    return worst <= 1e-9, f"worst_rel_gap={worst:.2e}"


def _check_capacity_residual_mc():
    """Conditioning oracle: v minus E[v|g_hat] must be zero-mean with the
    claimed conditional variance over unconditioned (g, r) draws."""
    h, q, priors, sr = synthetic_bayes_setup(16, 79)
    rng = np.random.default_rng(83)
    phi_j = RisPhaseConfig(phases=rng.uniform(0, 2 * np.pi, 16))
    factor_g = priors.sigma_g.sqrt_factor
    factor_p = priors.sigma_p.sqrt_factor
    pd_mw, noise_mw, trials = 2.0, 0.3, 3000
    res = np.empty(trials, dtype=complex)
    var_claim = np.empty(trials)
    means = np.empty(trials)
    for t in range(trials):
        g = factor_g @ complex_normal(rng, 16)
        p = factor_p @ complex_normal(rng, 16)
        r = q * p
        g_hat = g + r / h
        phi_k = phase_align(h, g_hat)
        moments = cap.conditional_moments_gaussian(
            g_hat, h, priors.sigma_g.matrix, sr.matrix, IDENTICAL
        )
        sample = cap.capacity_sample(moments, phi_k, phi_j, h, pd_mw, noise_mw)
        v = np.sqrt(pd_mw) * (
            (h * phi_k.coefficients) @ g + phi_j.coefficients @ r
        )
        res[t] = v - sample.cond_mean_v
        var_claim[t] = sample.cond_var_v
        means[t] = abs(sample.cond_mean_v)
    mean_res = abs(res.mean())
    mean_limit = 3.0 * np.sqrt(var_claim.mean() / trials)
    ratio = float(np.mean(np.abs(res) ** 2) / var_claim.mean())
    corr = max(
        abs(float(np.corrcoef(res.real, means)[0, 1])),
        abs(float(np.corrcoef(res.imag, means)[0, 1])),
    )
    ok = mean_res <= mean_limit and abs(ratio - 1.0) <= 0.1 and corr <= 5.0 / np.sqrt(trials)
    return ok, f"var_ratio={ratio:.3f} mean_res={mean_res:.2e} corr={corr:.3f}"


def _check_capacity_regularity():
    params = desk_params(IDENTICAL, seed=5)
    priors = channel_priors(params)
    trials = 2000
    mean_nopd, _ = cap.capacity_mc_components(params, priors, trials, 5, IDENTICAL)
    noise = np.array(
        [complex_normal(derive_rng(5, "capacity-noise", t), 1)[0] for t in range(trials)]
    )
    side_info = np.abs(mean_nopd[0])
    limit = 4.0 / np.sqrt(trials)
    worst = max(
        abs(float(np.corrcoef(noise.real, side_info)[0, 1])),
        abs(float(np.corrcoef(noise.imag, side_info)[0, 1])),
    )
    return worst <= limit, f"max_corr={worst:.4f} limit={limit:.4f}"


def _check_capacity_se_behavior():
    params = desk_params(IDENTICAL, seed=5)
    priors = channel_priors(params)
    mean_nopd, var_nopd = cap.capacity_mc_components(params, priors, 500, 5, IDENTICAL)
    if float(var_nopd.min()) < 0:
        return False, "negative conditional variance slipped through"
    powers = [dbm_to_linear(p) for p in (-10.0, 10.0, 30.0, 50.0)]
    means = [
        float(cap.se_terms_at_power(mean_nopd[0], var_nopd[0], p, params.noise_power_mw).mean())
        for p in powers
    ]
    mono_pd = all(b >= a - 1e-12 for a, b in zip(means, means[1:]))
    noises = [1e-9, 1e-6, 1e-3, 1.0]
    curve = [
        float(cap.se_terms_at_power(mean_nopd[0], var_nopd[0], 1.0, s).mean())
        for s in noises
    ]
    mono_noise = all(a >= b - 1e-12 for a, b in zip(curve, curve[1:]))
    nonneg = bool(
        np.all(cap.se_terms_at_power(mean_nopd[0], var_nopd[0], 1.0, 1e-9) >= 0)
    )
    ok = mono_pd and mono_noise and nonneg
    return ok, f"monotone_power={mono_pd} monotone_noise={mono_noise} nonneg={nonneg}"


def _check_csv_reproducible():
    params = desk_params(IDENTICAL, seed=5)
    spec_kwargs = dict(
        experiment=CAPACITY,
        power_grid_dBm=(-10.0, 20.0, 50.0),
        modes=(IDENTICAL, ORTHOGONAL),
        trials=300,
        master_seed=5,
    )
    csv_serial = rows_to_csv(run_capacity(params, SweepSpec(workers=1, **spec_kwargs)))
    csv_threaded = rows_to_csv(run_capacity(params, SweepSpec(workers=3, **spec_kwargs)))
    det_spec = SweepSpec(
        experiment=CHANEST_DET,
        power_grid_dBm=(0.0, 20.0),
        modes=(IDENTICAL, ORTHOGONAL),
        trials=200,
        master_seed=5,
    )
    det_a = rows_to_csv(run_chanest_det(params, det_spec))
    det_b = rows_to_csv(run_chanest_det(params, det_spec))
    ok = csv_serial == csv_threaded and det_a == det_b
    return ok, f"capacity_match={csv_serial == csv_threaded} det_match={det_a == det_b}"


def cross_term_report() -> list[str]:
    """Non-gating REPORT lines on the two cross-moment variants."""
    h, q, priors, sr = synthetic_bayes_setup(16, 71)
    rng = np.random.default_rng(73)
    gaps = []
    for _ in range(20):
        g_hat = complex_normal(rng, 16)
        a = cap.conditional_moments_gaussian(g_hat, h, priors.sigma_g.matrix, sr.matrix, IDENTICAL)
        b = cap.conditional_moments_lmmse(g_hat, h, priors.sigma_g.matrix, sr.matrix, IDENTICAL)
        gaps.append(_rel_gap(a.cross_gr, b.cross_gr))
    params = desk_params(IDENTICAL, seed=5)
    priors_cap = channel_priors(params)
    bounds = {}
    for variant in cap.CROSS_TERM_VARIANTS:
        mean_nopd, var_nopd = cap.capacity_mc_components(
            params, priors_cap, 2000, 5, IDENTICAL, cross_term=variant
        )
        se = cap.se_terms_at_power(
            mean_nopd[0], var_nopd[0], dbm_to_linear(30.0), params.noise_power_mw
        )
        bounds[variant] = float(se.mean())
    return [
        "REPORT cross-moment-variants "
        f"median_rel_gap={np.median(gaps):.3e} max_rel_gap={max(gaps):.3e}",
        "REPORT capacity-bound-variants "
        f"gaussian={bounds['gaussian']:.4f} lmmse={bounds['lmmse']:.4f} "
        f"abs_gap={abs(bounds['gaussian'] - bounds['lmmse']):.4f}",
    ]


CHECKS = (
    ("units-roundtrip", _check_units),
    ("covariance-psd", _check_covariance_psd),
    ("covariance-quadrature", _check_covariance_quadrature),
    ("covariance-limits", _check_covariance_limits),
    ("sequences-unitary", _check_sequences_unitary),
    ("phase-align-optimal", _check_phase_align),
    ("pilots-slotwise", _check_pilots_slotwise),
    ("pilots-deterministic", _check_pilots_deterministic),
    ("mml-joint-agree", _check_mml_joint_agree),
    ("mml-structure", _check_mml_structure),
    ("joint-ml-singular", _check_joint_ml_singular),
    ("det-error-cov", _check_det_error_cov),
    ("det-nmse-mc", _check_det_nmse_mc),
    ("det-mc-sensitivity", _check_det_mc_sensitivity),
    ("det-floor", _check_det_floor),
    ("data-epsilon-structure", _check_data_epsilon),
    ("data-mse-mc", _check_data_mse_mc),
    ("data-mse-floor-limit", _check_data_mse_floor_limit),
    ("bayes-uncontaminated", _check_bayes_uncontaminated),
    ("bayes-error-cov-mc", _check_bayes_error_cov_mc),
    ("bayes-contamination-invariant", _check_bayes_contamination_invariant),
    ("bayes-high-snr", _check_bayes_high_snr),
    ("bayes-psd-monotone", _check_bayes_psd_monotone),
    ("capacity-consistency", _check_capacity_consistency),
    ("capacity-moments-agree", _check_capacity_moments_agree),
    ("capacity-residual-mc", _check_capacity_residual_mc),
    ("capacity-regularity", _check_capacity_regularity),
    ("capacity-se-behavior", _check_capacity_se_behavior),
    ("csv-reproducible", _check_csv_reproducible),
)


def run_validation() -> tuple[list[str], bool]:
    """Run every check; returns the report lines and the overall verdict."""
    lines = []
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        lines.append(f"CHECK {name} {'PASS' if ok else 'FAIL'} {detail}")
        all_ok = all_ok and ok
    try:
        lines.extend(cross_term_report())
    except Exception as exc:
        lines.append(f"REPORT cross-moment-variants unavailable: {exc}")
    return lines, all_ok
