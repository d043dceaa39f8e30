"""Command-line front end for the contamination experiments.

Each subcommand sweeps one experiment over a transmit-power grid and writes a
CSV; `validate` runs the built-in self checks instead.

    riscontam chanest-det --out det.csv
    riscontam capacity --trials 10000 --workers 4 --out capacity.csv
    riscontam validate
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (
    CAPACITY,
    CHANEST_DET,
    CHANEST_RAYLEIGH,
    DATA_MSE,
    EXPERIMENT_MODES,
    SweepSpec,
    parse_grid,
    rows_to_csv,
    run_experiment,
    write_rows,
)
from .geometry import parse_geometry
from .params import params_from_mapping, read_config_file

EXPERIMENTS = (CHANEST_DET, DATA_MSE, CHANEST_RAYLEIGH, CAPACITY)

# Baseline scenario per experiment; a --config file and CLI flags overlay this.
_LARGE = {
    "n_elements": 256,
    "pilot_len": 513,
    "pilot_power_dBm": 0.0,
    "data_power_dBm": 0.0,
    "noise_power_dBm": -90.0,
    "pathloss_ue_ris_dB": -80.0,
    "pathloss_ris_bs_dB": -60.0,
    "geometry": "ura:16x16:0.5",
    "config_mode": "identical",
    "seed": 1,
}
_SMALL = dict(_LARGE, n_elements=64, pilot_len=128, geometry="ura:8x8:0.5")

DEFAULT_CONFIGS = {
    CHANEST_DET: _LARGE,
    DATA_MSE: _LARGE,
    CHANEST_RAYLEIGH: _SMALL,
    CAPACITY: _SMALL,
}

DEFAULT_GRIDS = {
    CHANEST_DET: "-30:5:60",
    DATA_MSE: "-30:5:40",
    CHANEST_RAYLEIGH: "-30:5:40",
    CAPACITY: "-10:5:60",
}

DEFAULT_TRIALS = {CHANEST_DET: 0, DATA_MSE: 0, CHANEST_RAYLEIGH: 0, CAPACITY: 10000}

DEFAULT_GEOMETRIES = "ura:8x8:0.5,ura:8x8:0.25,ula:64:0.5"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riscontam",
        description="Pilot-contamination experiments for two-operator RIS uplinks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} sweep")
        p.add_argument("--config", help="key=value scenario file overlaying the defaults")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--grid", default=DEFAULT_GRIDS[name],
                       help="power grid in dBm as start:step:stop")
        p.add_argument("--trials", type=int, default=DEFAULT_TRIALS[name],
                       help="Monte-Carlo trials (0 = closed form only)")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: scenario seed)")
        p.add_argument("--workers", type=int, default=1,
                       help="worker threads for Monte-Carlo blocks")
        p.add_argument("--mode", action="append", choices=EXPERIMENT_MODES[name],
                       help="restrict to one or more configuration modes")
        if name == CHANEST_RAYLEIGH:
            p.add_argument("--geometries", default=DEFAULT_GEOMETRIES,
                           help="comma-separated array layouts, e.g. ura:8x8:0.5,ula:64:0.5")
        if name == CAPACITY:
            p.add_argument("--cross-term", choices=("gaussian", "lmmse"),
                           default="gaussian", dest="cross_term",
                           help="conditional cross-moment variant")

    v = sub.add_parser("validate", help="run the built-in self checks")
    v.add_argument("--out", help="also write the report to this file")
    return parser


def _run_validate(args: argparse.Namespace) -> int:
    from .validation import run_validation

    lines, ok = run_validation()
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return _run_validate(args)

    mapping = dict(DEFAULT_CONFIGS[args.command])
    if args.config:
        mapping.update(read_config_file(args.config))
    if args.seed is not None:
        mapping["seed"] = args.seed
    params = params_from_mapping(mapping)

    modes = tuple(args.mode) if args.mode else EXPERIMENT_MODES[args.command]
    geometries = ()
    if args.command == CHANEST_RAYLEIGH:
        geometries = tuple(
            parse_geometry(tok) for tok in args.geometries.split(",") if tok.strip()
        )
    spec = SweepSpec(
        experiment=args.command,
        power_grid_dBm=parse_grid(args.grid),
        modes=modes,
        geometries=geometries,
        trials=args.trials,
        master_seed=params.seed if args.seed is None else args.seed,
        workers=args.workers,
        cross_term=getattr(args, "cross_term", "gaussian"),
    )
    rows = run_experiment(params, spec)
    if args.out:
        write_rows(rows, args.out)
    else:
        sys.stdout.write(rows_to_csv(rows))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
