"""RIS element layouts and spatial covariance matrices for isotropic scattering.

Element positions are expressed in carrier wavelengths, so no carrier
frequency appears anywhere: a pitch of 0.5 means half-wavelength spacing.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Tolerances used when validating covariance matrices at construction time.
_HERMITIAN_TOL = 1e-12
_EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True)
class RisGeometry:
    """Planar grid of reflecting elements.

    kind is "ula" (single row) or "ura" (rows x cols grid); spacing is the
    element pitch in wavelengths along both grid axes.
    """

    kind: str
    rows: int
    cols: int
    spacing: float

    def __post_init__(self):
        if self.kind not in ("ula", "ura"):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("geometry needs at least one row and one column")
        if self.kind == "ula" and self.rows != 1:
            raise ValueError("a ULA has exactly one row")
        if not self.spacing > 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.rows}x{self.cols}:{self.spacing:g}"


def parse_geometry(token: str) -> RisGeometry:
    """Parse a geometry token such as "ura:8x8:0.5" or "ula:64:0.5".

    The grid part is either "RxC" or a bare element count (ULA shorthand).
    """
    parts = token.strip().lower().split(":")
    if len(parts) != 3:
        raise ValueError(f"malformed geometry token {token!r}")
    kind, grid, spacing = parts
    if "x" in grid:
        rows_s, _, cols_s = grid.partition("x")
        rows, cols = int(rows_s), int(cols_s)
    else:
        rows, cols = 1, int(grid)
    return RisGeometry(kind=kind, rows=rows, cols=cols, spacing=float(spacing))


def element_positions(geometry: RisGeometry) -> np.ndarray:
    """Element coordinates in wavelengths, shape (n_elements, 3).

    Row-major ordering: element index n = r * cols + c sits at
    (r * spacing, c * spacing, 0).
    """
    r = np.arange(geometry.rows)
    c = np.arange(geometry.cols)
    rr, cc = np.meshgrid(r, c, indexing="ij")
    pos = np.zeros((geometry.n_elements, 3))
    pos[:, 0] = rr.ravel() * geometry.spacing
    pos[:, 1] = cc.ravel() * geometry.spacing
    return pos


@dataclass(eq=False)
class SpatialCovariance:
    """Covariance matrix of one RIS-side channel vector.

    variance_per_element is the average diagonal entry, i.e. the per-element
    channel gain including path loss.
    """

    matrix: np.ndarray
    variance_per_element: float

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix)
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("covariance matrix must be square")
        scale = max(float(self.variance_per_element), np.finfo(float).tiny)
        if np.max(np.abs(m - m.conj().T)) > _HERMITIAN_TOL * max(scale, 1.0):
            raise ValueError("covariance matrix is not Hermitian")
        w = np.linalg.eigvalsh(m)
        if w.min() < -_EIGENVALUE_TOL * scale:
            raise ValueError(
                f"covariance matrix has negative eigenvalue {w.min():.3e}"
            )
        tr = float(np.real(np.trace(m)))
        if abs(tr - m.shape[0] * self.variance_per_element) > 1e-9 * max(tr, scale):
            raise ValueError("trace does not match n_elements * variance_per_element")

    @property
    def n_elements(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def sqrt_factor(self) -> np.ndarray:
        """Matrix F with F F^H equal to the covariance (eigenvalue based).

        Tiny negative eigenvalues from round-off are clipped at zero.
        """
        w, v = np.linalg.eigh(self.matrix)
        return v * np.sqrt(np.clip(w, 0.0, None))


def isotropic_covariance(geometry: RisGeometry, beta: float) -> SpatialCovariance:
    """Spatial covariance under isotropic scattering, scaled by gain beta.

    For elements separated by d wavelengths the correlation is
    sin(2*pi*d) / (2*pi*d), i.e. the zero-order spherical average of a
    plane-wave phase over all arrival directions.
    """
    pos = element_positions(geometry)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    # np.sinc is the normalised sinc, so sinc(2 d) = sin(2 pi d) / (2 pi d).
    matrix = beta * np.sinc(2.0 * dist)
    return SpatialCovariance(matrix=matrix, variance_per_element=float(beta))


def isotropic_covariance_quadrature(
    geometry: RisGeometry, beta: float, n_polar: int = 96, n_azimuth: int = 192
) -> np.ndarray:
    """Brute-force covariance via numerical integration over the sphere.

    Averages exp(j 2 pi k . (u_m - u_n)) over uniformly distributed arrival
    directions using Gauss-Legendre nodes in cos(polar) and a uniform grid in
    azimuth.  Serves as an independent cross-check of isotropic_covariance;
    too slow for production use.
    """
    pos = element_positions(geometry)
    t, wt = np.polynomial.legendre.leggauss(n_polar)  # t = cos(polar angle)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    sin_pol = np.sqrt(1.0 - t**2)
    # Unit direction vectors for every quadrature node, shape (n_dirs, 3).
    dirs = np.stack(
        [
            np.outer(sin_pol, np.cos(phi)).ravel(),
            np.outer(sin_pol, np.sin(phi)).ravel(),
            np.outer(t, np.ones_like(phi)).ravel(),
        ],
        axis=1,
    )
    weights = np.outer(wt, np.ones_like(phi)).ravel() / (2.0 * n_azimuth)
    steering = np.exp(2j * np.pi * (pos @ dirs.T))  # (N, n_dirs)
    cov = (steering * weights) @ steering.conj().T
    return beta * cov
