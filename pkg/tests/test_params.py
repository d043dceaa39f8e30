import dataclasses

import numpy as np
import pytest

from riscontam.geometry import parse_geometry
from riscontam.params import (
    IDENTICAL,
    ORTHOGONAL,
    SystemParams,
    db_to_amplitude,
    dbm_to_linear,
    linear_to_dbm,
    load_params,
    params_from_mapping,
    read_config_file,
)


def make_params(**overrides):
    base = dict(
        n_elements=16,
        pilot_len=32,
        pilot_power_dBm=0.0,
        data_power_dBm=10.0,
        noise_power_dBm=-90.0,
        pathloss_ue_ris_dB=-80.0,
        pathloss_ris_bs_dB=-60.0,
        geometry=parse_geometry("ura:4x4:0.5"),
        config_mode=IDENTICAL,
        seed=1,
    )
    base.update(overrides)
    return SystemParams(**base)


def test_unit_conversions_fixed_points():
    assert dbm_to_linear(-90.0) == pytest.approx(1e-9, rel=1e-12)
    assert dbm_to_linear(0.0) == 1.0
    assert dbm_to_linear(30.0) == pytest.approx(1000.0, rel=1e-12)
    assert db_to_amplitude(-80.0) == pytest.approx(1e-4, rel=1e-12)
    assert db_to_amplitude(-60.0) == pytest.approx(1e-3, rel=1e-12)
    for v in (-37.0, 0.0, 12.5):
        assert linear_to_dbm(dbm_to_linear(v)) == pytest.approx(v, abs=1e-12)


def test_derived_power_properties():
    p = make_params()
    assert p.pilot_power_mw == 1.0
    assert p.noise_power_mw == pytest.approx(1e-9, rel=1e-12)
    assert p.ue_ris_gain == pytest.approx(1e-8, rel=1e-12)
    assert p.ris_bs_gain == pytest.approx(1e-6, rel=1e-12)


def test_sequence_length_validation():
    make_params(config_mode=IDENTICAL, pilot_len=16)  # L = N allowed
    with pytest.raises(ValueError):
        make_params(config_mode=IDENTICAL, pilot_len=15)
    make_params(config_mode=ORTHOGONAL, pilot_len=32)  # L = 2N allowed
    with pytest.raises(ValueError):
        make_params(config_mode=ORTHOGONAL, pilot_len=31)
    with pytest.raises(ValueError):
        make_params(n_elements=17)  # geometry mismatch
    with pytest.raises(ValueError):
        make_params(config_mode="simultaneous")


def test_with_mode_switches_only_the_mode():
    p = make_params(pilot_len=64)
    q = p.with_mode(ORTHOGONAL)
    assert q.config_mode == ORTHOGONAL
    assert dataclasses.replace(q, config_mode=IDENTICAL) == p


def test_config_file_roundtrip(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(
        "# comment line\n"
        "n_elements = 16\n"
        "pilot_len = 64\n"
        "pilot_power_dBm = 5\n"
        "data_power_dBm = 10\n"
        "noise_power_dBm = -90\n"
        "pathloss_ue_ris_dB = -80\n"
        "pathloss_ris_bs_dB = -60\n"
        "geometry = ura:4x4:0.5\n"
        "config_mode = orthogonal\n"
        "seed = 7\n"
    )
    loaded = load_params(str(path))
    assert loaded.pilot_len == 64
    assert loaded.config_mode == ORTHOGONAL
    assert loaded.seed == 7
    assert loaded.geometry.rows == 4

    overridden = load_params(str(path), overrides={"seed": 9})
    assert overridden.seed == 9

    mapping = read_config_file(str(path))
    assert params_from_mapping(mapping) == loaded


def test_as_mapping_reconstructs(tmp_path):
    p = make_params()
    assert params_from_mapping(p.as_mapping()) == p
    assert np.isclose(p.data_power_mw, 10.0)
