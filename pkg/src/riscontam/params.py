"""Scalar system parameters, unit conversions and the key=value config format."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .geometry import RisGeometry, parse_geometry

IDENTICAL = "identical"
ORTHOGONAL = "orthogonal"
PERFECT_CSI = "perfect_csi"

# Modes accepted in configuration files; PERFECT_CSI is a baseline that only
# exists inside the data-link experiment.
CONFIG_MODES = (IDENTICAL, ORTHOGONAL)


def dbm_to_linear(value_dbm: float) -> float:
    """dBm power to linear milliwatts (also converts dB gains to linear)."""
    return 10.0 ** (value_dbm / 10.0)


def linear_to_dbm(value_mw: float) -> float:
    """Linear milliwatts back to dBm."""
    if value_mw <= 0:
        raise ValueError("power must be positive")
    return 10.0 * math.log10(value_mw)


def db_to_amplitude(gain_db: float) -> float:
    """Amplitude scale factor equivalent to a power gain in dB."""
    return 10.0 ** (gain_db / 20.0)


@dataclass(frozen=True)
class SystemParams:
    """Full scalar parameter set of the two-operator uplink.

    Field names double as the keys of the flat key=value config format.
    Powers are dBm, path losses are (negative) dB gains.
    """

    n_elements: int
    pilot_len: int
    pilot_power_dBm: float
    data_power_dBm: float
    noise_power_dBm: float
    pathloss_ue_ris_dB: float
    pathloss_ris_bs_dB: float
    geometry: RisGeometry
    config_mode: str
    seed: int

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("n_elements must be positive")
        if self.config_mode not in CONFIG_MODES:
            raise ValueError(f"config_mode must be one of {CONFIG_MODES}")
        if self.config_mode == IDENTICAL and self.pilot_len < self.n_elements:
            raise ValueError("identical configurations need pilot_len >= n_elements")
        if self.config_mode == ORTHOGONAL and self.pilot_len < 2 * self.n_elements:
            raise ValueError(
                "orthogonal configurations need pilot_len >= 2 * n_elements"
            )
        for name in (
            "pilot_power_dBm",
            "data_power_dBm",
            "noise_power_dBm",
            "pathloss_ue_ris_dB",
            "pathloss_ris_bs_dB",
        ):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.geometry.n_elements != self.n_elements:
            raise ValueError(
                f"geometry {self.geometry.label} has {self.geometry.n_elements} "
                f"elements, expected {self.n_elements}"
            )

    # -- linear-unit helpers -------------------------------------------------
    @property
    def pilot_power_mw(self) -> float:
        return dbm_to_linear(self.pilot_power_dBm)

    @property
    def data_power_mw(self) -> float:
        return dbm_to_linear(self.data_power_dBm)

    @property
    def noise_power_mw(self) -> float:
        return dbm_to_linear(self.noise_power_dBm)

    @property
    def ue_ris_gain(self) -> float:
        """Linear power gain of the UE-to-RIS hop."""
        return dbm_to_linear(self.pathloss_ue_ris_dB)

    @property
    def ris_bs_gain(self) -> float:
        """Linear power gain of the RIS-to-BS hop."""
        return dbm_to_linear(self.pathloss_ris_bs_dB)

    def with_mode(self, mode: str) -> "SystemParams":
        return replace(self, config_mode=mode)

    def as_mapping(self) -> dict:
        return {
            "n_elements": self.n_elements,
            "pilot_len": self.pilot_len,
            "pilot_power_dBm": self.pilot_power_dBm,
            "data_power_dBm": self.data_power_dBm,
            "noise_power_dBm": self.noise_power_dBm,
            "pathloss_ue_ris_dB": self.pathloss_ue_ris_dB,
            "pathloss_ris_bs_dB": self.pathloss_ris_bs_dB,
            "geometry": self.geometry.label,
            "config_mode": self.config_mode,
            "seed": self.seed,
        }


def params_from_mapping(mapping: dict) -> SystemParams:
    """Build SystemParams from a dict of raw (string or numeric) values."""
    d = dict(mapping)
    try:
        geometry = d["geometry"]
        if isinstance(geometry, str):
            geometry = parse_geometry(geometry)
        return SystemParams(
            n_elements=int(d["n_elements"]),
            pilot_len=int(d["pilot_len"]),
            pilot_power_dBm=float(d["pilot_power_dBm"]),
            data_power_dBm=float(d["data_power_dBm"]),
            noise_power_dBm=float(d["noise_power_dBm"]),
            pathloss_ue_ris_dB=float(d["pathloss_ue_ris_dB"]),
            pathloss_ris_bs_dB=float(d["pathloss_ris_bs_dB"]),
            geometry=geometry,
            config_mode=str(d["config_mode"]).strip().lower(),
            seed=int(d.get("seed", 0)),
        )
    except KeyError as exc:
        raise ValueError(f"missing configuration key {exc.args[0]!r}") from exc


def read_config_file(path: str) -> dict:
    """Read a flat key=value file; '#' starts a comment, blank lines ignored."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def load_params(path: str, overrides: dict | None = None) -> SystemParams:
    """Load SystemParams from a key=value file, with optional overrides."""
    values = read_config_file(path)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return params_from_mapping(values)
