import numpy as np
import pytest

from riscontam.capacity import (
    capacity_lower_bound_mc,
    capacity_mc_components,
    capacity_sample,
    conditional_moments_gaussian,
    conditional_moments_lmmse,
    csi_error_model,
    se_terms_at_power,
)
from riscontam.channels import channel_priors, sample_deterministic_fixture
from riscontam.experiments import synthetic_bayes_setup
from riscontam.geometry import parse_geometry
from riscontam.params import IDENTICAL, ORTHOGONAL, SystemParams
from riscontam.sequences import RisPhaseConfig


def small_params(mode=IDENTICAL, data_dBm=10.0):
    return SystemParams(
        n_elements=4,
        pilot_len=8,
        pilot_power_dBm=0.0,
        data_power_dBm=data_dBm,
        noise_power_dBm=-90.0,
        pathloss_ue_ris_dB=-80.0,
        pathloss_ris_bs_dB=-60.0,
        geometry=parse_geometry("ura:2x2:0.5"),
        config_mode=mode,
        seed=3,
    )


def test_csi_error_model_modes():
    ch = sample_deterministic_fixture(small_params())
    np.testing.assert_array_equal(csi_error_model(ORTHOGONAL, ch, 1), ch.g1)
    ident = csi_error_model(IDENTICAL, ch, 2)
    np.testing.assert_allclose(ident, ch.g2 + ch.q2 * ch.p2 / ch.h2, rtol=1e-14)
    with pytest.raises(ValueError):
        csi_error_model("perfect", ch, 1)


def moments_case(seed=5):
    h, q, priors, sr = synthetic_bayes_setup(6, seed)
    rng = np.random.default_rng(seed + 1)
    g = priors.sigma_g.sqrt_factor @ (
        (rng.standard_normal(6) + 1j * rng.standard_normal(6)) / np.sqrt(2)
    )
    p = priors.sigma_p.sqrt_factor @ (
        (rng.standard_normal(6) + 1j * rng.standard_normal(6)) / np.sqrt(2)
    )
    g_hat = g + q * p / h
    return h, priors.sigma_g.matrix, sr.matrix, g_hat


def test_conditional_estimates_recombine_to_observation():
    h, sg, sr_m, g_hat = moments_case()
    for fn in (conditional_moments_gaussian, conditional_moments_lmmse):
        mom = fn(g_hat, h, sg, sr_m, IDENTICAL)
        np.testing.assert_allclose(
            mom.mean_g + mom.mean_r / h, g_hat, rtol=1e-9, atol=1e-12
        )


def test_variant_means_and_variances_agree():
    h, sg, sr_m, g_hat = moments_case()
    a = conditional_moments_gaussian(g_hat, h, sg, sr_m, IDENTICAL)
    b = conditional_moments_lmmse(g_hat, h, sg, sr_m, IDENTICAL)
    np.testing.assert_allclose(a.mean_g, b.mean_g, rtol=1e-9)
    np.testing.assert_allclose(a.mean_r, b.mean_r, rtol=1e-9)
    np.testing.assert_allclose(a.var_g, b.var_g, rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(a.var_r, b.var_r, rtol=1e-8, atol=1e-12)
    # the cross moments are where the two derivations differ
    assert not np.allclose(a.cross_gr, b.cross_gr, rtol=1e-3)


def test_orthogonal_moments_are_trivial():
    h, sg, sr_m, g_hat = moments_case()
    mom = conditional_moments_gaussian(g_hat, h, sg, sr_m, ORTHOGONAL)
    np.testing.assert_array_equal(mom.mean_g, g_hat)
    assert np.all(mom.mean_r == 0)
    assert np.all(mom.var_g == 0)
    np.testing.assert_array_equal(mom.var_r, sr_m)
    with pytest.raises(ValueError):
        conditional_moments_gaussian(g_hat, h, sg, sr_m, "mixed")


def test_capacity_sample_scalar_hand_computation():
    from riscontam.capacity import ConditionalMoments

    mom = ConditionalMoments(
        mean_g=np.array([2.0 + 0j]),
        mean_r=np.array([0.1 + 0j]),
        var_g=np.array([[0.5 + 0j]]),
        var_r=np.array([[0.25 + 0j]]),
        cross_gr=np.array([[0.1 + 0j]]),
    )
    phi = RisPhaseConfig(phases=np.zeros(1))
    h = np.array([1.0 + 0j])
    pd, s = 2.0, 0.5
    sample = capacity_sample(mom, phi, phi, h, pd, s)
    mean_expected = np.sqrt(pd) * 2.1
    var_expected = pd * (0.5 + 0.25 + 2 * 0.1 - 2 * (2.0 * 0.1))
    assert sample.cond_mean_v == pytest.approx(mean_expected, rel=1e-12)
    assert sample.cond_var_v == pytest.approx(var_expected, rel=1e-12)
    sinr = abs(mean_expected) ** 2 / (var_expected + s)
    assert sample.se_term == pytest.approx(np.log2(1 + sinr), rel=1e-12)


def test_capacity_sample_clips_negative_variance():
    from riscontam.capacity import ConditionalMoments

    mom = ConditionalMoments(
        mean_g=np.array([2.0 + 0j]),
        mean_r=np.array([0.3 + 0j]),
        var_g=np.array([[0.5 + 0j]]),
        var_r=np.array([[0.25 + 0j]]),
        cross_gr=np.array([[0.1 + 0j]]),
    )
    phi = RisPhaseConfig(phases=np.zeros(1))
    sample = capacity_sample(mom, phi, phi, np.array([1.0 + 0j]), 2.0, 0.5)
    assert sample.cond_var_v == 0.0


def test_components_deterministic_and_worker_invariant():
    params = small_params()
    priors = channel_priors(params)
    m1, v1 = capacity_mc_components(params, priors, 600, 7, IDENTICAL)
    m2, v2 = capacity_mc_components(params, priors, 600, 7, IDENTICAL, workers=3)
    np.testing.assert_array_equal(m1, m2)
    np.testing.assert_array_equal(v1, v2)
    m3, _ = capacity_mc_components(params, priors, 600, 8, IDENTICAL)
    assert not np.array_equal(m1, m3)
    assert m1.shape == (2, 600) and v1.shape == (2, 600)
    assert np.all(v1 >= 0)


def test_se_terms_monotone_in_power_per_trial():
    params = small_params()
    priors = channel_priors(params)
    mean, var = capacity_mc_components(params, priors, 200, 1, IDENTICAL)
    noise = params.noise_power_mw
    prev = None
    for p_dbm in (-10.0, 0.0, 10.0, 20.0, 30.0):
        se = se_terms_at_power(mean[0], var[0], 10 ** (p_dbm / 10), noise)
        assert np.all(np.isfinite(se)) and np.all(se >= 0)
        if prev is not None:
            assert np.all(se >= prev - 1e-12)
        prev = se


def test_lower_bound_orthogonal_beats_identical_at_low_power():
    trials = 1500
    id_mean, id_se = capacity_lower_bound_mc(
        small_params(IDENTICAL, data_dBm=0.0), channel_priors(small_params()), trials
    )
    orth_mean, orth_se = capacity_lower_bound_mc(
        small_params(ORTHOGONAL, data_dBm=0.0), channel_priors(small_params()), trials
    )
    assert orth_mean > id_mean + 3 * (id_se + orth_se)
    assert id_se > 0 and orth_se > 0


def test_cross_term_variant_changes_identical_bound_only():
    params = small_params(IDENTICAL, data_dBm=30.0)
    priors = channel_priors(params)
    g_mean, _ = capacity_lower_bound_mc(params, priors, 400, cross_term="gaussian")
    l_mean, _ = capacity_lower_bound_mc(params, priors, 400, cross_term="lmmse")
    assert g_mean != l_mean
    params_o = small_params(ORTHOGONAL, data_dBm=30.0)
    g_o, _ = capacity_lower_bound_mc(params_o, priors, 400, cross_term="gaussian")
    l_o, _ = capacity_lower_bound_mc(params_o, priors, 400, cross_term="lmmse")
    assert g_o == l_o
    with pytest.raises(ValueError):
        capacity_mc_components(params, priors, 10, 1, IDENTICAL, cross_term="exact")
