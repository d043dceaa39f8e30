import numpy as np
import pytest

from riscontam.geometry import (
    RisGeometry,
    SpatialCovariance,
    element_positions,
    isotropic_covariance,
    isotropic_covariance_quadrature,
    parse_geometry,
)


def test_parse_geometry_forms():
    g = parse_geometry("ura:8x8:0.5")
    assert (g.rows, g.cols, g.spacing) == (8, 8, 0.5)
    assert g.n_elements == 64
    ula = parse_geometry("ula:64:0.25")
    assert (ula.rows, ula.cols, ula.spacing) == (1, 64, 0.25)
    assert parse_geometry(ula.label) == ula  # label round-trips
    with pytest.raises(ValueError):
        parse_geometry("ring:8:0.5")
    with pytest.raises(ValueError):
        parse_geometry("ura:8x:0.5")
    with pytest.raises(ValueError):
        parse_geometry("ula:3x3:0.5")  # a ULA has one row
    with pytest.raises(ValueError):
        RisGeometry(kind="ura", rows=2, cols=2, spacing=0.0)


def test_element_positions_row_major_grid():
    pos = element_positions(RisGeometry(kind="ura", rows=2, cols=3, spacing=0.5))
    expected = 0.5 * np.array(
        [[0, 0, 0], [0, 1, 0], [0, 2, 0], [1, 0, 0], [1, 1, 0], [1, 2, 0]],
        dtype=float,
    )
    np.testing.assert_allclose(pos, expected)


def test_isotropic_covariance_closed_form_entries():
    # Half-wavelength ULA: sin(2 pi d)/(2 pi d) vanishes at integer multiples
    # of half a wavelength, so all off-diagonal entries are exactly zero.
    cov = isotropic_covariance(parse_geometry("ula:4:0.5"), beta=2.0)
    np.testing.assert_allclose(cov.matrix, 2.0 * np.eye(4), atol=1e-15)
    assert cov.variance_per_element == 2.0

    # Diagonal neighbours of a square half-wavelength grid sit sqrt(2)/2
    # wavelengths apart.
    cov2 = isotropic_covariance(parse_geometry("ura:2x2:0.5"), beta=1.0)
    assert cov2.matrix[0, 3] == pytest.approx(-0.21695429437747635, abs=1e-14)


def test_covariance_is_psd_and_scales_with_gain():
    g = parse_geometry("ura:3x3:0.37")
    base = isotropic_covariance(g, beta=1.0)
    scaled = isotropic_covariance(g, beta=2.5)
    np.testing.assert_allclose(scaled.matrix, 2.5 * base.matrix, rtol=1e-14)
    eigvals = np.linalg.eigvalsh(base.matrix)
    assert eigvals.min() >= -1e-12
    np.testing.assert_allclose(np.diag(base.matrix), np.ones(9), rtol=1e-14)


def test_quadrature_covariance_matches_closed_form():
    g = parse_geometry("ura:3x3:0.37")
    closed = isotropic_covariance(g, beta=2.5).matrix
    numeric = isotropic_covariance_quadrature(g, beta=2.5)
    assert np.max(np.abs(numeric - closed)) < 1e-9


def test_wide_spacing_approaches_identity():
    cov = isotropic_covariance(parse_geometry("ula:6:50.0"), beta=1.0)
    off = cov.matrix - np.diag(np.diag(cov.matrix))
    assert np.abs(off).max() < 5e-3


def test_sqrt_factor_reconstructs_matrix():
    g = parse_geometry("ura:2x2:0.3")
    cov = isotropic_covariance(g, beta=1.5)
    f = cov.sqrt_factor
    np.testing.assert_allclose(f @ f.conj().T, cov.matrix, atol=1e-12)


def test_spatial_covariance_validation():
    with pytest.raises(ValueError):
        SpatialCovariance(matrix=np.ones((2, 3)), variance_per_element=1.0)
    with pytest.raises(ValueError):
        SpatialCovariance(
            matrix=np.array([[1.0, 2.0], [0.0, 1.0]]), variance_per_element=1.0
        )
    with pytest.raises(ValueError):
        SpatialCovariance(
            matrix=np.array([[1.0, 0.0], [0.0, 1.0]]), variance_per_element=3.0
        )
    ok = SpatialCovariance(matrix=np.eye(2), variance_per_element=1.0)
    assert ok.n_elements == 2
