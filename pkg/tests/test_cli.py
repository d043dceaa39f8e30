import numpy as np
import pytest

from riscontam import cli


CONFIG_TEXT = """
n_elements = 8
pilot_len = 16
pilot_power_dBm = 0
data_power_dBm = 10
noise_power_dBm = -90
pathloss_ue_ris_dB = -80
pathloss_ris_bs_dB = -60
geometry = ura:2x4:0.5
config_mode = identical
seed = 1
"""


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(CONFIG_TEXT)
    return str(path)


def test_chanest_det_writes_csv(config_file, tmp_path):
    out = tmp_path / "det.csv"
    rc = cli.main([
        "chanest-det", "--config", config_file, "--grid=-10:10:10",
        "--out", str(out),
    ])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "experiment,mode,geometry,power_dBm,metric,value,stderr,trials,seed"
    assert any(",nmse," in ln for ln in lines[1:])
    assert all(ln.split(",")[0] == "chanest-det" for ln in lines[1:])


def test_stdout_when_no_out_flag(config_file, capsys):
    rc = cli.main(["chanest-det", "--config", config_file, "--grid", "0:10:0"])
    assert rc == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("experiment,mode,")


def test_mode_restriction_and_seed_override(config_file, tmp_path):
    out = tmp_path / "one_mode.csv"
    rc = cli.main([
        "chanest-det", "--config", config_file, "--grid", "0:10:0",
        "--mode", "orthogonal", "--seed", "17", "--out", str(out),
    ])
    assert rc == 0
    body = out.read_text().strip().splitlines()[1:]
    assert {ln.split(",")[1] for ln in body} == {"orthogonal"}
    assert {ln.split(",")[8] for ln in body} == {"17"}


def test_capacity_rerun_identical_across_workers(config_file, tmp_path):
    args = [
        "capacity", "--config", config_file, "--grid", "0:20:20",
        "--trials", "300",
    ]
    out1 = tmp_path / "w1.csv"
    out4 = tmp_path / "w4.csv"
    assert cli.main(args + ["--workers", "1", "--out", str(out1)]) == 0
    assert cli.main(args + ["--workers", "4", "--out", str(out4)]) == 0
    assert out1.read_bytes() == out4.read_bytes()


def test_capacity_cross_term_flag(config_file, tmp_path):
    out_g = tmp_path / "g.csv"
    out_l = tmp_path / "l.csv"
    base = [
        "capacity", "--config", config_file, "--grid", "20:10:20",
        "--trials", "200",
    ]
    assert cli.main(base + ["--cross-term", "gaussian", "--out", str(out_g)]) == 0
    assert cli.main(base + ["--cross-term", "lmmse", "--out", str(out_l)]) == 0
    assert out_g.read_bytes() != out_l.read_bytes()


def test_chanest_rayleigh_geometry_list(config_file, tmp_path):
    out = tmp_path / "ray.csv"
    rc = cli.main([
        "chanest-rayleigh", "--config", config_file, "--grid", "0:10:0",
        "--geometries", "ura:2x4:0.5,ula:8:0.5", "--out", str(out),
    ])
    assert rc == 0
    geoms = {ln.split(",")[2] for ln in out.read_text().strip().splitlines()[1:]}
    assert geoms == {"ura:2x4:0.5", "ula:1x8:0.5"}


def test_validate_subcommand_reports_and_passes(tmp_path, capsys):
    out = tmp_path / "report.txt"
    rc = cli.main(["validate", "--out", str(out)])
    captured = capsys.readouterr()
    assert rc == 0
    text = out.read_text()
    assert text == captured.out
    lines = [ln for ln in text.strip().splitlines() if ln.startswith("CHECK ")]
    assert len(lines) >= 25
    assert all(" PASS" in ln for ln in lines)
    assert any(ln.startswith("REPORT ") for ln in text.strip().splitlines())


def test_data_mse_defaults_have_floor_rows(config_file, tmp_path):
    out = tmp_path / "mse.csv"
    rc = cli.main([
        "data-mse", "--config", config_file, "--grid", "0:20:20",
        "--out", str(out),
    ])
    assert rc == 0
    metrics = {ln.split(",")[4] for ln in out.read_text().strip().splitlines()[1:]}
    assert {"data_mse", "data_mse_floor"} <= metrics
