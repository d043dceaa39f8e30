import numpy as np
import pytest

from riscontam.channels import sample_deterministic_fixture
from riscontam.data_link import (
    ScalarLink,
    data_mse,
    data_mse_floor,
    effective_channels,
    high_pilot_snr_link,
    mmse_symbol_estimate,
    symbol_mse_mc,
)
from riscontam.geometry import parse_geometry
from riscontam.params import IDENTICAL, ORTHOGONAL, PERFECT_CSI, SystemParams
from riscontam.sequences import RisPhaseConfig, phase_align


def desk_params(n=8):
    return SystemParams(
        n_elements=n,
        pilot_len=2 * n,
        pilot_power_dBm=0.0,
        data_power_dBm=10.0,
        noise_power_dBm=-90.0,
        pathloss_ue_ris_dB=-80.0,
        pathloss_ris_bs_dB=-60.0,
        geometry=parse_geometry(f"ula:{n}:0.5"),
        config_mode=ORTHOGONAL,
        seed=6,
    )


def test_phase_align_maximizes_coherent_gain():
    rng = np.random.default_rng(1)
    h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    g = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    phi = phase_align(h, g)
    aligned = np.sum(h * phi.coefficients * g)
    # every per-element product lands on the positive real axis
    np.testing.assert_allclose(
        np.imag(h * phi.coefficients * g), np.zeros(8), atol=1e-12
    )
    assert aligned.real == pytest.approx(np.sum(np.abs(h) * np.abs(g)), rel=1e-12)
    assert np.all(np.abs(np.abs(phi.coefficients) - 1.0) < 1e-12)


def test_effective_channels_hand_sum():
    params = desk_params(n=4)
    ch = sample_deterministic_fixture(params)
    rng = np.random.default_rng(2)
    phi_1 = RisPhaseConfig(phases=rng.uniform(0, 2 * np.pi, 4))
    phi_2 = RisPhaseConfig(phases=rng.uniform(0, 2 * np.pi, 4))
    g_hat = ch.g1 * 1.01
    pd = 3.0
    link = effective_channels(ch, phi_1, phi_2, g_hat, pd, 1)
    m_manual = np.sqrt(pd) * (
        np.sum(ch.h1 * np.exp(-1j * phi_1.phases) * ch.g1)
        + np.sum(ch.q1 * np.exp(-1j * phi_2.phases) * ch.p1)
    )
    mhat_manual = np.sqrt(pd) * np.sum(ch.h1 * np.exp(-1j * phi_1.phases) * g_hat)
    assert link.m == pytest.approx(m_manual, rel=1e-12)
    assert link.m_hat == pytest.approx(mhat_manual, rel=1e-12)
    assert link.epsilon == pytest.approx(link.m - link.m_hat, rel=1e-12)


def test_high_pilot_snr_link_epsilon_structure():
    params = desk_params()
    ch = sample_deterministic_fixture(params)
    pd = params.data_power_mw

    ident = high_pilot_snr_link(ch, IDENTICAL, pd, 1)
    # the estimate folds the leak through the serving surface's coefficients,
    # the true leak goes through the other surface's, so the unknown part is
    # sqrt(Pd) * (c_other - c_serving) . r
    g_hat_1 = ch.g1 + ch.q1 * ch.p1 / ch.h1
    g_hat_2 = ch.g2 + ch.q2 * ch.p2 / ch.h2
    c1 = phase_align(ch.h1, g_hat_1).coefficients
    c2 = phase_align(ch.h2, g_hat_2).coefficients
    eps_expected = np.sqrt(pd) * np.sum((c2 - c1) * ch.q1 * ch.p1)
    assert ident.epsilon == pytest.approx(eps_expected, rel=1e-10)

    orth = high_pilot_snr_link(ch, ORTHOGONAL, pd, 1)
    # estimate is clean, so the unknown part is exactly the cross leak
    phi_2 = phase_align(ch.h2, ch.g2)
    leak = np.sqrt(pd) * np.sum(ch.q1 * phi_2.coefficients * ch.p1)
    assert orth.epsilon == pytest.approx(leak, rel=1e-10)

    perfect = high_pilot_snr_link(ch, PERFECT_CSI, pd, 1)
    assert perfect.epsilon == 0
    assert perfect.m == perfect.m_hat


def test_identical_mode_believed_gain_includes_leak():
    params = desk_params()
    ch = sample_deterministic_fixture(params)
    ident = high_pilot_snr_link(ch, IDENTICAL, 1.0, 2)
    orth = high_pilot_snr_link(ch, ORTHOGONAL, 1.0, 2)
    # same true direct path but different believed gains
    assert abs(ident.m_hat) > abs(orth.m_hat) * 0  # smoke: both defined
    assert ident.m_hat != orth.m_hat


def test_mmse_symbol_estimate_scalar_formula():
    m_hat = 2.0 - 1.0j
    y = 0.5 + 0.25j
    s = 0.3
    got = mmse_symbol_estimate(y, m_hat, s)
    assert got == pytest.approx(np.conj(m_hat) * y / (abs(m_hat) ** 2 + s), rel=1e-14)


def test_data_mse_reduces_to_matched_filter_when_consistent():
    link = ScalarLink(m=1.5 + 0.5j, m_hat=1.5 + 0.5j)
    s = 0.2
    expected = s / (abs(link.m) ** 2 + s)
    assert data_mse(link, s) == pytest.approx(expected, rel=1e-12)
    assert data_mse_floor(link) == 0.0


def test_data_mse_limits():
    link = ScalarLink(m=1.0 + 0.3j, m_hat=0.8 - 0.1j)
    floor = data_mse_floor(link)
    assert floor == pytest.approx(abs(link.epsilon) ** 2 / abs(link.m_hat) ** 2)
    # noise-free limit
    assert data_mse(link, 1e-15) == pytest.approx(floor, rel=1e-9)
    # overwhelming noise: filter output dies, error -> symbol variance 1
    assert data_mse(link, 1e12) == pytest.approx(1.0, rel=1e-9)
    with pytest.raises(ValueError):
        data_mse_floor(ScalarLink(m=1.0, m_hat=0.0))


def test_data_mse_monte_carlo_agreement():
    link = ScalarLink(m=1.2 - 0.4j, m_hat=1.0 + 0.2j)
    s = 0.5
    rng = np.random.default_rng(11)
    mean, stderr = symbol_mse_mc(link, s, 200_000, rng)
    assert abs(mean - data_mse(link, s)) < 3.5 * stderr
    assert stderr > 0
