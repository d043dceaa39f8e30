"""Pilot-phase RIS configuration sequences and data-phase alignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ConfigSequence:
    """Per-slot RIS phase configurations stacked into an (L, N) matrix.

    Row t holds the unit-modulus reflection coefficients applied during pilot
    slot t; column n tracks element n across the whole pilot block.
    """

    matrix: np.ndarray

    @property
    def n_slots(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_elements(self) -> int:
        return self.matrix.shape[1]


def _dft_columns(n_slots: int, first_col: int, n_cols: int) -> np.ndarray:
    t = np.arange(n_slots)[:, None]
    n = np.arange(first_col, first_col + n_cols)[None, :]
    return np.exp(-2j * np.pi * t * n / n_slots)


def make_identical_pair(
    n_elements: int, n_slots: int
) -> tuple[ConfigSequence, ConfigSequence]:
    """Both surfaces run the same sequence (first n_elements DFT columns).

    Needs n_slots >= n_elements so that each surface's own columns stay
    orthogonal and the per-surface estimator is well posed.
    """
    if n_slots < n_elements:
        raise ValueError("need n_slots >= n_elements")
    seq = ConfigSequence(_dft_columns(n_slots, 0, n_elements))
    return seq, seq


def make_orthogonal_pair(
    n_elements: int, n_slots: int
) -> tuple[ConfigSequence, ConfigSequence]:
    """Surfaces run disjoint DFT column blocks, mutually orthogonal.

    Needs n_slots >= 2 * n_elements so both blocks fit.
    """
    if n_slots < 2 * n_elements:
        raise ValueError("need n_slots >= 2 * n_elements")
    seq_1 = ConfigSequence(_dft_columns(n_slots, 0, n_elements))
    seq_2 = ConfigSequence(_dft_columns(n_slots, n_elements, n_elements))
    return seq_1, seq_2


@dataclass(frozen=True, eq=False)
class RisPhaseConfig:
    """Static RIS configuration used during data transmission.

    phases[n] is the phase the surface compensates at element n; the applied
    reflection coefficient is exp(-1j * phases[n]).
    """

    phases: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        return np.exp(-1j * self.phases)


def phase_align(h: np.ndarray, g_hat: np.ndarray) -> RisPhaseConfig:
    """Configure a surface to co-phase the cascaded channel h_n * g_hat_n.

    With phases arg(h_n) + arg(g_hat_n) every cascaded term becomes
    |h_n| * |g_hat_n|, which maximises the coherent sum.  np.angle maps a
    zero entry to phase 0, so dead elements are left untouched.
    """
    return RisPhaseConfig(phases=np.angle(h) + np.angle(g_hat))


def cascaded_gain(h: np.ndarray, config: RisPhaseConfig, g: np.ndarray) -> complex:
    """Scalar end-to-end channel h^T diag(coefficients) g."""
    return complex(np.sum(h * config.coefficients * g))
