"""Command-line front end.

    ebfission simulate    --config exp.toml [--seed N] [--out DIR] [--threads N] [--mc-reps N]
    ebfission figure-data --config exp.toml --g-split F [--seed N] [--out DIR] [--scheme S]
    ebfission fission     --scheme S (--tau F | --g-split F) --input-csv data.csv [--seed N] [--out DIR]

Experiments are declared in TOML; flags override file values. Exit codes:
0 success, 1 usage/config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .errors import ConfigurationError, InputError
from .fission import FissionConfig, fission_arrays, tau_from_info_split
from .harness import (
    EstimatorSpec,
    ExperimentConfig,
    export_figure_data,
    run_experiment,
    write_table_csv,
)
from .model import GAUSSIAN, POISSON, LikelihoodModel, PriorSpec

_EXIT_OK = 0
_EXIT_CONFIG = 1
_EXIT_RUNTIME = 2


def _load_toml(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {p}")
    with open(p, "rb") as fh:
        return tomllib.load(fh)


def _parse_prior(doc: dict) -> PriorSpec:
    try:
        prior = doc["prior"]
        atoms = np.asarray(prior["atoms"], dtype=float)
        weights = np.asarray(prior.get("weights", np.ones(atoms.size)), dtype=float)
    except KeyError as exc:
        raise ConfigurationError(f"config missing prior section/field: {exc}") from exc
    total = weights.sum()
    if not total > 0:
        raise ConfigurationError("prior weights must have positive total")
    return PriorSpec(atoms=atoms, weights=weights / total)


def _parse_estimators(doc: dict) -> tuple[EstimatorSpec, ...]:
    entries = doc.get("estimators")
    if not entries:
        raise ConfigurationError("config must declare at least one [[estimators]] entry")
    specs = []
    for entry in entries:
        entry = dict(entry)
        kind = entry.pop("kind", None)
        if kind is None:
            raise ConfigurationError("estimator entry missing 'kind'")
        try:
            specs.append(EstimatorSpec(kind=kind, **entry))
        except TypeError as exc:
            raise ConfigurationError(f"bad estimator entry {entry!r}: {exc}") from exc
    return tuple(specs)


def _parse_likelihoods(doc: dict) -> list[LikelihoodModel]:
    kinds = doc.get("likelihoods", doc.get("likelihood", GAUSSIAN))
    if isinstance(kinds, str):
        kinds = [kinds]
    sigma2 = float(doc.get("sigma2", 1.0))
    out = []
    for kind in kinds:
        if kind == GAUSSIAN:
            out.append(LikelihoodModel.gaussian(sigma2))
        elif kind == POISSON:
            out.append(LikelihoodModel.poisson())
        else:
            raise ConfigurationError(f"unknown likelihood {kind!r}")
    return out


def _experiment_configs(doc: dict, args) -> list[ExperimentConfig]:
    prior = _parse_prior(doc)
    estimators = _parse_estimators(doc)
    n = int(doc.get("n", 1000))
    mc_reps = int(args.mc_reps if args.mc_reps is not None else doc.get("mc_reps", 100))
    base_seed = int(args.seed if args.seed is not None else doc.get("base_seed", 0))
    return [
        ExperimentConfig(
            prior=prior,
            lik=lik,
            n=n,
            mc_reps=mc_reps,
            estimators=estimators,
            base_seed=base_seed,
        )
        for lik in _parse_likelihoods(doc)
    ]


def cmd_simulate(args) -> int:
    configs = _experiment_configs(_load_toml(args.config), args)
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for cfg in configs:
        print(f"running {cfg.mc_reps} reps: {cfg.lik.kind}, n={cfg.n}", file=sys.stderr)
        reports.append(run_experiment(cfg, n_jobs=threads))
    write_table_csv(out / "table.csv", reports)
    payload = {
        "experiments": [
            {
                "config": r.config,
                "seed": r.seed,
                "wall_clock_s": r.wall_clock_s,
                "dataset_checksums": list(r.dataset_checksums),
                "results": [vars(res) | {"per_rep_mse": list(res.per_rep_mse)} for res in r.results],
            }
            for r in reports
        ]
    }
    with open(out / "report.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    print(f"wrote {out / 'table.csv'} and {out / 'report.json'}", file=sys.stderr)
    return _EXIT_OK


def cmd_figure_data(args) -> int:
    doc = _load_toml(args.config)
    prior = _parse_prior(doc)
    liks = _parse_likelihoods(doc)
    if args.scheme is not None:
        matches = [l for l in liks if l.kind == args.scheme]
        if not matches:
            raise ConfigurationError(f"config has no {args.scheme!r} likelihood")
        lik = matches[0]
    else:
        lik = liks[0]
    n = int(doc.get("n", 1000))
    seed = int(args.seed if args.seed is not None else doc.get("base_seed", 0))
    out = Path(args.out)
    export_figure_data(prior, lik, n, args.g_split, seed, out_dir=out)
    print(f"wrote scatter/knots/curve CSVs to {out}", file=sys.stderr)
    return _EXIT_OK


def _read_x_column(path: str) -> np.ndarray:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"input CSV not found: {p}")
    with open(p, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "x" not in reader.fieldnames:
            raise InputError(f"{p}: expected a numeric column named 'x'")
        vals = []
        for i, row in enumerate(reader, start=2):
            try:
                vals.append(float(row["x"]))
            except (TypeError, ValueError) as exc:
                raise InputError(f"{p}: bad value {row['x']!r} in row {i}") from exc
    if not vals:
        raise InputError(f"{p}: no data rows")
    return np.asarray(vals)


def cmd_fission(args) -> int:
    xs = _read_x_column(args.input_csv)
    if (args.tau is None) == (args.g_split is None):
        raise ConfigurationError("give exactly one of --tau or --g-split")
    tau = args.tau if args.tau is not None else tau_from_info_split(args.scheme, args.g_split)
    if args.scheme == POISSON:
        bad = np.flatnonzero((xs < 0) | (xs != np.floor(xs)))
        if bad.size:
            raise InputError(
                f"Poisson fission needs nonnegative integer x; row {bad[0] + 2} has x={xs[bad[0]]!r}"
            )
    cfg = FissionConfig(tau=float(tau), scheme=args.scheme, sigma2=args.sigma2)
    f, g = fission_arrays(xs, cfg, seed=int(args.seed or 0))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "fissioned.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "f", "g"])
        for xi, fi, gi in zip(xs, f, g):
            w.writerow([f"{xi:.17g}", f"{fi:.17g}", f"{gi:.17g}"])
    print(f"wrote {path}", file=sys.stderr)
    return _EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ebfission", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo comparison, write table.csv + report.json")
    sim.add_argument("--config", required=True, help="TOML experiment file")
    sim.add_argument("--seed", type=int, default=None, help="override base_seed")
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    sim.add_argument("--mc-reps", type=int, default=None, help="override mc_reps")
    sim.set_defaults(func=cmd_simulate)

    fig = sub.add_parser("figure-data", help="export scatter/knots/curve CSVs for one fission draw")
    fig.add_argument("--config", required=True)
    fig.add_argument("--g-split", type=float, required=True, help="Fisher-information fraction for g")
    fig.add_argument("--seed", type=int, default=None)
    fig.add_argument("--out", default=".")
    fig.add_argument("--scheme", choices=[GAUSSIAN, POISSON], default=None,
                     help="likelihood to use when the config lists several")
    fig.set_defaults(func=cmd_figure_data)

    fis = sub.add_parser("fission", help="fission the x column of a CSV into replicate pairs")
    fis.add_argument("--scheme", choices=[GAUSSIAN, POISSON], required=True)
    fis.add_argument("--tau", type=float, default=None)
    fis.add_argument("--g-split", type=float, default=None)
    fis.add_argument("--sigma2", type=float, default=1.0)
    fis.add_argument("--input-csv", required=True)
    fis.add_argument("--seed", type=int, default=0)
    fis.add_argument("--out", default=".")
    fis.set_defaults(func=cmd_fission)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return _EXIT_OK if exc.code in (0, None) else _EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigurationError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except Exception as exc:  # runtime failures (estimator aborts, I/O, numerics)
        print(f"runtime error: {exc}", file=sys.stderr)
        return _EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
