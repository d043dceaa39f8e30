"""Experiment sweeps, CSV result rows and the self-validation harness."""

from __future__ import annotations

import dataclasses
import io
from dataclasses import dataclass

import numpy as np

from . import bayes_estimation as bayes
from . import capacity as cap
from . import data_link
from . import det_estimation as det
from .channels import (
    ChannelPriors,
    ChannelSet,
    channel_priors,
    complex_normal,
    received_pilots,
    sample_correlated_rayleigh,
    sample_deterministic_fixture,
    sigma_r,
)
from .geometry import (
    RisGeometry,
    SpatialCovariance,
    isotropic_covariance,
    isotropic_covariance_quadrature,
    parse_geometry,
)
from .params import IDENTICAL, ORTHOGONAL, PERFECT_CSI, SystemParams, dbm_to_linear
from .sequences import (
    ConfigSequence,
    RisPhaseConfig,
    cascaded_gain,
    make_identical_pair,
    make_orthogonal_pair,
    phase_align,
)
from .streams import derive_rng

CHANEST_DET = "chanest-det"
DATA_MSE = "data-mse"
CHANEST_RAYLEIGH = "chanest-rayleigh"
CAPACITY = "capacity"

EXPERIMENTS = (CHANEST_DET, DATA_MSE, CHANEST_RAYLEIGH, CAPACITY)

EXPERIMENT_MODES = {
    CHANEST_DET: (IDENTICAL, ORTHOGONAL),
    DATA_MSE: (IDENTICAL, ORTHOGONAL, PERFECT_CSI),
    CHANEST_RAYLEIGH: (IDENTICAL, ORTHOGONAL),
    CAPACITY: (IDENTICAL, ORTHOGONAL),
}

CSV_HEADER = "experiment,mode,geometry,power_dBm,metric,value,stderr,trials,seed"

RATIO_MODE = "orthogonal/identical"


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep: experiment id, power grid, modes, trials and seed."""

    experiment: str
    power_grid_dBm: tuple[float, ...]
    modes: tuple[str, ...]
    geometries: tuple[RisGeometry, ...] = ()
    trials: int = 0
    master_seed: int = 1
    workers: int = 1
    cross_term: str = "gaussian"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.power_grid_dBm:
            raise ValueError("empty power grid")
        allowed = EXPERIMENT_MODES[self.experiment]
        bad = [m for m in self.modes if m not in allowed]
        if bad or not self.modes:
            raise ValueError(f"modes {bad} not valid for {self.experiment}")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if self.experiment == CAPACITY and self.trials <= 0:
            raise ValueError("the capacity experiment needs trials > 0")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    mode: str
    geometry: str
    power_dBm: float
    metric: str
    value: float
    stderr: float
    trials: int
    seed: int


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse "start:step:stop" (inclusive, dBm) into a power grid."""
    try:
        start_s, step_s, stop_s = text.split(":")
        start, step, stop = float(start_s), float(step_s), float(stop_s)
    except ValueError as exc:
        raise ValueError(f"malformed grid {text!r}, expected start:step:stop") from exc
    if step <= 0 or stop < start:
        raise ValueError(f"grid {text!r} must have step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(count))


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def rows_to_csv(rows: list[ResultRow]) -> str:
    """Render rows in a canonical order so equal results give equal bytes."""
    ordered = sorted(
        rows, key=lambda r: (r.experiment, r.metric, r.mode, r.geometry, r.power_dBm)
    )
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in ordered:
        out.write(
            f"{r.experiment},{r.mode},{r.geometry},{_fmt(r.power_dBm)},{r.metric},"
            f"{_fmt(r.value)},{_fmt(r.stderr)},{r.trials},{r.seed}\n"
        )
    return out.getvalue()


def write_rows(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def _sequence_pair(mode: str, n_elements: int, n_slots: int):
    if mode == IDENTICAL:
        return make_identical_pair(n_elements, n_slots)
    if mode == ORTHOGONAL:
        return make_orthogonal_pair(n_elements, n_slots)
    raise ValueError(f"no pilot sequences for mode {mode!r}")


# ---------------------------------------------------------------------------
# Monte-Carlo helpers shared by experiments, validation and the test suite.
# ---------------------------------------------------------------------------

def mc_mml_noise(
    mode: str, pilot_len: int, noise_power_mw: float, trials: int, master_seed: int
) -> np.ndarray:
    """Pilot-noise draws, one column per trial, from counter-derived streams."""
    label = f"{CHANEST_DET}/{mode}"
    w = np.empty((pilot_len, trials), dtype=complex)
    for t in range(trials):
        rng = derive_rng(master_seed, label, t)
        w[:, t] = complex_normal(rng, pilot_len, np.sqrt(noise_power_mw))
    return w


def mc_mml_nmse_samples(
    ch: ChannelSet,
    mode: str,
    pilot_len: int,
    pilot_power_mw: float,
    noise_power_mw: float,
    trials: int,
    master_seed: int,
    noise: np.ndarray | None = None,
) -> np.ndarray:
    """Per-trial normalised squared error of mml_estimate at BS 1."""
    seq_1, seq_2 = _sequence_pair(mode, ch.n_elements, pilot_len)
    clean = received_pilots(ch, seq_1, seq_2, pilot_power_mw, k=1)
    if noise is None:
        noise = mc_mml_noise(mode, pilot_len, noise_power_mw, trials, master_seed)
    y = clean[:, None] + noise
    g_hat = det.mml_estimate(y, seq_1, ch.h1, pilot_power_mw)
    err = g_hat - ch.g1[:, None]
    return np.sum(np.abs(err) ** 2, axis=0) / float(np.sum(np.abs(ch.g1) ** 2))


def mc_bayes_error_samples(
    seq_k: ConfigSequence,
    seq_j: ConfigSequence,
    h: np.ndarray,
    q: np.ndarray,
    priors: ChannelPriors,
    pilot_power_mw: float,
    noise_power_mw: float,
    trials: int,
    master_seed: int,
    label: str = "bayes-mc",
) -> np.ndarray:
    """Estimation errors g - g_hat of the prior-aided estimator, (N, trials).

    Redraws g, the cross channel p and the noise every trial; h and q stay
    fixed.  Used to verify the closed-form error covariance.
    """
    n = h.size
    length = seq_k.n_slots
    factor_g = priors.sigma_g.sqrt_factor
    factor_p = priors.sigma_p.sqrt_factor
    amp = np.sqrt(pilot_power_mw)
    errors = np.empty((n, trials), dtype=complex)
    block = 512
    for start in range(0, trials, block):
        stop = min(start + block, trials)
        g_blk = np.empty((n, stop - start), dtype=complex)
        y_blk = np.empty((length, stop - start), dtype=complex)
        for t in range(start, stop):
            rng = derive_rng(master_seed, label, t)
            g = factor_g @ complex_normal(rng, n)
            p = factor_p @ complex_normal(rng, n)
            w = complex_normal(rng, length, np.sqrt(noise_power_mw))
            g_blk[:, t - start] = g
            y_blk[:, t - start] = (
                amp * (seq_k.matrix @ (h * g)) + amp * (seq_j.matrix @ (q * p)) + w
            )
        g_hat = bayes.mmse_channel_estimate(
            y_blk, seq_k, h, priors.sigma_g.matrix, pilot_power_mw, noise_power_mw
        )
        errors[:, start:stop] = g_blk - g_hat
    return errors


def synthetic_bayes_setup(n_elements: int, seed: int, unit_modulus_h: bool = True):
    """Well-conditioned unit-scale fixture for asymptotic covariance checks.

    Random positive-definite priors with eigenvalues bounded away from zero
    and |h_n| = 1 keep the high pilot-power limits numerically clean, which
    is what the tight asymptotic tolerances require.
    """
    rng = np.random.default_rng(seed)
    n = n_elements
    if unit_modulus_h:
        h = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
    else:
        h = complex_normal(rng, n)

    def random_pd() -> SpatialCovariance:
        a = complex_normal(rng, (n, n)) / np.sqrt(n)
        m = a @ a.conj().T + 0.5 * np.eye(n)
        return SpatialCovariance(
            matrix=m, variance_per_element=float(np.real(np.trace(m))) / n
        )

    sigma_g = random_pd()
    sigma_p = random_pd()
    q = complex_normal(rng, n)
    priors = ChannelPriors(sigma_g=sigma_g, sigma_p=sigma_p)
    return h, q, priors, sigma_r(priors, q)


# ---------------------------------------------------------------------------
# Experiment runners.
# ---------------------------------------------------------------------------

def run_chanest_det(params: SystemParams, spec: SweepSpec) -> list[ResultRow]:
    """Estimation NMSE of mml_estimate on a frozen channel realization.

    Emits the closed-form curve per mode, the bias floor for the identical
    mode, and (with trials > 0) a Monte-Carlo NMSE curve with standard
    errors reusing the same noise draws across the power grid.
    """
    ch = sample_deterministic_fixture(params)
    geometry = params.geometry.label
    noise_mw = params.noise_power_mw
    rows: list[ResultRow] = []
    g_energy = float(np.sum(np.abs(ch.g1) ** 2))
    for mode in spec.modes:
        bias = det.contamination_bias(ch.h1, ch.q1, ch.p1, mode)
        floor = det.bias_floor(bias) / g_energy
        for power in spec.power_grid_dBm:
            mse = det.mse_trace(
                bias, ch.h1, dbm_to_linear(power), params.pilot_len, noise_mw
            )
            rows.append(
                ResultRow(
                    CHANEST_DET, mode, geometry, power, "nmse",
                    det.nmse(mse, ch.g1), 0.0, 0, spec.master_seed,
                )
            )
            if mode == IDENTICAL:
                rows.append(
                    ResultRow(
                        CHANEST_DET, mode, geometry, power, "nmse_floor",
                        floor, 0.0, 0, spec.master_seed,
                    )
                )
        if spec.trials > 0:
            noise = mc_mml_noise(
                mode, params.pilot_len, noise_mw, spec.trials, spec.master_seed
            )
            for power in spec.power_grid_dBm:
                samples = mc_mml_nmse_samples(
                    ch, mode, params.pilot_len, dbm_to_linear(power), noise_mw,
                    spec.trials, spec.master_seed, noise=noise,
                )
                rows.append(
                    ResultRow(
                        CHANEST_DET, mode, geometry, power, "nmse_mc",
                        float(samples.mean()),
                        float(samples.std(ddof=1) / np.sqrt(spec.trials)),
                        spec.trials, spec.master_seed,
                    )
                )
    return rows


def run_data_mse(params: SystemParams, spec: SweepSpec) -> list[ResultRow]:
    """Symbol MSE of the misspecified MMSE filter versus data power."""
    ch = sample_deterministic_fixture(params)
    geometry = params.geometry.label
    noise_mw = params.noise_power_mw
    rows: list[ResultRow] = []
    block = 100_000
    for mode in spec.modes:
        for power in spec.power_grid_dBm:
            link = data_link.high_pilot_snr_link(ch, mode, dbm_to_linear(power), 1)
            rows.append(
                ResultRow(
                    DATA_MSE, mode, geometry, power, "data_mse",
                    data_link.data_mse(link, noise_mw), 0.0, 0, spec.master_seed,
                )
            )
            rows.append(
                ResultRow(
                    DATA_MSE, mode, geometry, power, "data_mse_floor",
                    data_link.data_mse_floor(link), 0.0, 0, spec.master_seed,
                )
            )
            if spec.trials > 0:
                total = 0.0
                total_sq = 0.0
                done = 0
                n_blocks = (spec.trials + block - 1) // block
                for b in range(n_blocks):
                    size = min(block, spec.trials - done)
                    rng = derive_rng(spec.master_seed, f"{DATA_MSE}/{mode}", b)
                    sq = data_link.symbol_sq_errors(link, noise_mw, size, rng)
                    total += float(sq.sum())
                    total_sq += float((sq**2).sum())
                    done += size
                mean = total / done
                var = max(total_sq / done - mean**2, 0.0) * done / max(done - 1, 1)
                rows.append(
                    ResultRow(
                        DATA_MSE, mode, geometry, power, "data_mse_mc",
                        mean, float(np.sqrt(var / done)), done, spec.master_seed,
                    )
                )
    return rows


def run_chanest_rayleigh(params: SystemParams, spec: SweepSpec) -> list[ResultRow]:
    """Prior-aided estimation NMSE split into noise and contamination parts."""
    rows: list[ResultRow] = []
    noise_mw = params.noise_power_mw
    geometries = spec.geometries or (params.geometry,)
    for geom in geometries:
        params_g = dataclasses.replace(params, n_elements=geom.n_elements, geometry=geom)
        ch = sample_deterministic_fixture(params_g)
        priors = channel_priors(params_g)
        sr = sigma_r(priors, ch.q1)
        trace_g = float(np.real(np.trace(priors.sigma_g.matrix)))
        for mode in spec.modes:
            seq_1, seq_2 = _sequence_pair(mode, params_g.n_elements, params.pilot_len)
            floor = bayes.high_snr_contamination(seq_1, seq_2, ch.h1, sr.matrix)
            floor_nmse = float(np.real(np.trace(floor))) / trace_g
            for power in spec.power_grid_dBm:
                power_mw = dbm_to_linear(power)
                cov = bayes.pilot_covariances(
                    seq_1, seq_2, ch.h1, priors.sigma_g.matrix, sr.matrix,
                    power_mw, noise_mw,
                )
                uncont, contam = bayes.error_covariance_parts(cov)
                for metric, value in (
                    ("nmse_uncontaminated", np.real(np.trace(uncont)) / trace_g),
                    ("nmse_contamination", np.real(np.trace(contam)) / trace_g),
                    ("nmse_total", np.real(np.trace(uncont + contam)) / trace_g),
                    ("nmse_floor", floor_nmse),
                ):
                    rows.append(
                        ResultRow(
                            CHANEST_RAYLEIGH, mode, geom.label, power, metric,
                            float(value), 0.0, 0, spec.master_seed,
                        )
                    )
    return rows


def run_capacity(params: SystemParams, spec: SweepSpec) -> list[ResultRow]:
    """Monte-Carlo capacity lower bound per mode, user and data power."""
    priors = channel_priors(params)
    geometry = params.geometry.label
    noise_mw = params.noise_power_mw
    rows: list[ResultRow] = []
    curves: dict[str, dict[int, list[tuple[float, float]]]] = {}
    for mode in spec.modes:
        mean_nopd, var_nopd = cap.capacity_mc_components(
            params, priors, spec.trials, spec.master_seed, mode,
            spec.cross_term, spec.workers,
        )
        curves[mode] = {1: [], 2: []}
        for power in spec.power_grid_dBm:
            power_mw = dbm_to_linear(power)
            for user in (1, 2):
                se = cap.se_terms_at_power(
                    mean_nopd[user - 1], var_nopd[user - 1], power_mw, noise_mw
                )
                mean = float(se.mean())
                stderr = float(se.std(ddof=1) / np.sqrt(spec.trials))
                curves[mode][user].append((mean, stderr))
                rows.append(
                    ResultRow(
                        CAPACITY, mode, geometry, power, f"capacity_lb_user{user}",
                        mean, stderr, spec.trials, spec.master_seed,
                    )
                )
    if IDENTICAL in curves and ORTHOGONAL in curves:
        for i, power in enumerate(spec.power_grid_dBm):
            for user in (1, 2):
                om, os_ = curves[ORTHOGONAL][user][i]
                im, is_ = curves[IDENTICAL][user][i]
                ratio = om / im
                stderr = abs(ratio) * float(
                    np.sqrt((os_ / om) ** 2 + (is_ / im) ** 2)
                )
                rows.append(
                    ResultRow(
                        CAPACITY, RATIO_MODE, geometry, power,
                        f"capacity_ratio_user{user}", ratio, stderr,
                        spec.trials, spec.master_seed,
                    )
                )
    return rows


RUNNERS = {
    CHANEST_DET: run_chanest_det,
    DATA_MSE: run_data_mse,
    CHANEST_RAYLEIGH: run_chanest_rayleigh,
    CAPACITY: run_capacity,
}


def run_experiment(params: SystemParams, spec: SweepSpec) -> list[ResultRow]:
    return RUNNERS[spec.experiment](params, spec)
