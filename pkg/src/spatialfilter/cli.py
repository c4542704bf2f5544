"""Command line front-end.

    spatialfilter gen    --channels 8 --samples 500 --per-class 100 ... --out d.epo1
    spatialfilter fit    --data d.epo1 --method csp --cprime 6 --out bank.json
    spatialfilter eval   --config config.json --out results/
    spatialfilter report --in results/report.json --format csv

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .covariance import class_covariances
from .data import SynthParams, generate_synthetic, read_epo, write_epo
from .errors import ConfigError, DataError, SpatialFilterError
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    bank_to_json,
    build_bank,
    render_report,
    report_csvs,
    run_experiment,
)

log = logging.getLogger("spatialfilter")


def _gen(args) -> None:
    try:
        params = SynthParams(
            channels=args.channels,
            samples=args.samples,
            epochs_per_class=args.per_class,
            source_std_high=args.std_high,
            source_std_low=args.std_low,
            noise_std=args.noise,
            mixing_condition_max=args.kappa,
            seed=args.seed,
            sample_rate_hz=args.sample_rate,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    dataset, truth = generate_synthetic(params)
    write_epo(dataset, args.out)
    if args.truth:
        Path(args.truth).write_text(json.dumps({"ground_truth_filters": truth.T.tolist()}, indent=2) + "\n")
    log.info("wrote %d epochs to %s", len(dataset), args.out)


def _fit(args) -> None:
    method = args.method.upper()
    if args.lam and method not in ("RCSP", "RSM"):
        raise ConfigError(f"--lambda applies to rcsp/rsm only, not {args.method}")
    dataset = read_epo(args.data)
    s0, s1 = class_covariances(dataset)
    bank = build_bank(method, s0, s1, args.cprime, args.lam)
    Path(args.out).write_text(bank_to_json(bank))


def _eval(args) -> None:
    config = ExperimentConfig.from_json(args.config)
    render_report(run_experiment(config), args.out)


def _report(args) -> None:
    path = Path(args.inp)
    try:
        report = ExperimentReport.from_json(path.read_text())
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc
    if args.format == "csv":
        render_report(report, args.out or path.parent, include_json=False)
    else:
        for name, text in report_csvs(report).items():
            print(f"# {name}")
            print(text, end="")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spatialfilter", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic two-class EPO1 dataset")
    g.add_argument("--channels", type=int, default=8)
    g.add_argument("--samples", type=int, default=500)
    g.add_argument("--per-class", type=int, default=100)
    g.add_argument("--std-high", type=float, default=3.0)
    g.add_argument("--std-low", type=float, default=1.0)
    g.add_argument("--noise", type=float, default=0.5)
    g.add_argument("--kappa", type=float, default=10.0, help="max condition number of the mixing matrix")
    g.add_argument("--sample-rate", type=float, default=250.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--truth", help="optional JSON file for the ground-truth filters")
    g.add_argument("--out", required=True)
    g.set_defaults(func=_gen)

    f = sub.add_parser("fit", help="fit one filter bank on a whole dataset")
    f.add_argument("--data", required=True)
    f.add_argument("--method", required=True, type=str.lower, choices=["csp", "sm", "rcsp", "rsm"])
    f.add_argument("--cprime", type=int, default=6)
    f.add_argument("--lambda", dest="lam", type=float, default=0.0)
    f.add_argument("--out", required=True)
    f.set_defaults(func=_fit)

    e = sub.add_parser("eval", help="run the split/CV/classify protocol")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=_eval)

    r = sub.add_parser("report", help="render CSV tables from report.json")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--format", choices=["csv", "text"], default="csv")
    r.add_argument("--out", help="directory for CSVs (default: next to report.json)")
    r.set_defaults(func=_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except SpatialFilterError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error [FileNotFound]: {exc}", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
