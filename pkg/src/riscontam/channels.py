"""Channel vectors of the two-operator, two-RIS uplink and the pilot model.

Operator k owns RIS k and serves UE k.  Per operator the relevant vectors are

    h_k : serving RIS -> its BS        (known at the BS)
    g_k : UE -> serving RIS            (to be estimated)
    p_k : UE -> the *other* RIS
    q_k : the other RIS -> this BS

and the cross reflection seen by BS k is r_k = diag(q_k) p_k.  Both surfaces
reflect wideband, so each operator's pilots also travel via the non-serving
surface, which is what couples the two otherwise disjoint bands.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields

import numpy as np

from .geometry import SpatialCovariance, isotropic_covariance
from .params import SystemParams
from .sequences import ConfigSequence


def complex_normal(rng: np.random.Generator, size, scale=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian draws with std dev `scale`."""
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return scale * z / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One realization of all eight channel vectors (index = operator)."""

    h1: np.ndarray
    h2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray

    @property
    def n_elements(self) -> int:
        return self.h1.size

    def h(self, k: int) -> np.ndarray:
        return self.h1 if k == 1 else self.h2

    def g(self, k: int) -> np.ndarray:
        return self.g1 if k == 1 else self.g2

    def p(self, k: int) -> np.ndarray:
        return self.p1 if k == 1 else self.p2

    def q(self, k: int) -> np.ndarray:
        return self.q1 if k == 1 else self.q2

    def r(self, k: int) -> np.ndarray:
        """Cross reflection diag(q_k) p_k entering BS k via the other RIS."""
        return self.q(k) * self.p(k)


@dataclass(frozen=True, eq=False)
class ChannelPriors:
    """Prior covariances for the Rayleigh-faded UE-side vectors g and p."""

    sigma_g: SpatialCovariance
    sigma_p: SpatialCovariance


def channel_priors(params: SystemParams) -> ChannelPriors:
    """Priors implied by the configured geometry and UE-RIS path loss.

    Both UE-side vectors see the same surface geometry and hop loss, so they
    share one isotropic-scattering covariance.
    """
    cov = isotropic_covariance(params.geometry, params.ue_ris_gain)
    return ChannelPriors(sigma_g=cov, sigma_p=cov)


def sample_correlated_rayleigh(
    cov: SpatialCovariance, rng: np.random.Generator
) -> np.ndarray:
    """Draw one zero-mean complex Gaussian vector with the given covariance."""
    z = complex_normal(rng, cov.n_elements)
    return cov.sqrt_factor @ z


def sigma_r(priors: ChannelPriors, q: np.ndarray) -> SpatialCovariance:
    """Covariance of the cross reflection r = diag(q) p for fixed q."""
    matrix = priors.sigma_p.matrix * np.outer(q, q.conj())
    per_element = float(np.real(np.trace(matrix))) / q.size
    return SpatialCovariance(matrix=matrix, variance_per_element=per_element)


def sample_deterministic_fixture(
    params: SystemParams, seed: int | None = None
) -> ChannelSet:
    """Draw one frozen channel realization for the deterministic analyses.

    Entries are iid complex Gaussian with per-element power set by the hop
    path loss: RIS-BS legs (h, q) and UE-RIS legs (g, p).  The same seed
    always returns the same fixture.  h entries of exactly zero would make
    the per-element estimator undefined and are redrawn (a measure-zero
    event; guards against degenerate manual seeds).
    """
    rng = np.random.default_rng(params.seed if seed is None else seed)
    n = params.n_elements
    ris_bs_amp = np.sqrt(params.ris_bs_gain)
    ue_ris_amp = np.sqrt(params.ue_ris_gain)

    def draw(scale: float) -> np.ndarray:
        return complex_normal(rng, n, scale)

    h1, h2 = draw(ris_bs_amp), draw(ris_bs_amp)
    for h in (h1, h2):
        dead = h == 0
        while np.any(dead):
            h[dead] = complex_normal(rng, int(dead.sum()), ris_bs_amp)
            dead = h == 0
    g1, g2 = draw(ue_ris_amp), draw(ue_ris_amp)
    p1, p2 = draw(ue_ris_amp), draw(ue_ris_amp)
    q1, q2 = draw(ris_bs_amp), draw(ris_bs_amp)
    return ChannelSet(h1=h1, h2=h2, g1=g1, g2=g2, p1=p1, p2=p2, q1=q1, q2=q2)


def received_pilots(
    ch: ChannelSet,
    seq_1: ConfigSequence,
    seq_2: ConfigSequence,
    pilot_power_mw: float,
    k: int,
    noise_power_mw: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Stacked pilot observations at BS k over the whole pilot block.

    y = sqrt(P) * B_k diag(h_k) g_k + sqrt(P) * B_j diag(q_k) p_k + w,
    where B_k / B_j are the serving / non-serving surface sequences and the
    pilot symbol is fixed to 1.  With rng=None the noise term is omitted.
    """
    serving = seq_1 if k == 1 else seq_2
    crossing = seq_2 if k == 1 else seq_1
    amp = np.sqrt(pilot_power_mw)
    y = amp * (serving.matrix @ (ch.h(k) * ch.g(k)))
    y = y + amp * (crossing.matrix @ ch.r(k))
    if rng is not None and noise_power_mw > 0.0:
        y = y + complex_normal(rng, y.size, np.sqrt(noise_power_mw))
    return y


def dump_channels_csv(ch: ChannelSet, path: str) -> None:
    """Write the fixture to CSV (channel, index, re, im) for inspection."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["channel", "index", "re", "im"])
        for f in fields(ch):
            vec = getattr(ch, f.name)
            for i, v in enumerate(vec):
                writer.writerow([f.name, i, repr(float(v.real)), repr(float(v.imag))])
