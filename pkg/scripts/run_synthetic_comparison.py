"""Compare CSP, SM, RCSP and RSM on synthetic data for several filter counts.

    python scripts/run_synthetic_comparison.py --cprime 4 6 8 --noise 2.0 --out results/synthetic

Writes one report directory per C' and prints a combined accuracy table.
"""

import argparse
import logging
from pathlib import Path

from spatialfilter.data import SynthParams, generate_synthetic
from spatialfilter.harness import ExperimentConfig, render_report, run_experiment


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cprime", type=int, nargs="+", default=[4, 6, 8])
    p.add_argument("--channels", type=int, default=22)
    p.add_argument("--samples", type=int, default=40)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--std-high", type=float, default=1.5)
    p.add_argument("--noise", type=float, default=2.0)
    p.add_argument("--repetitions", type=int, default=30)
    p.add_argument("--classifiers", nargs="+", default=["LDA", "MDRM"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("results/synthetic"))
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    dataset, _ = generate_synthetic(
        SynthParams(channels=args.channels, samples=args.samples, epochs_per_class=args.per_class,
                    noise_std=args.noise, source_std_high=args.std_high, seed=args.seed)
    )
    print(f"{'C_prime':>7} {'method':>6} {'clf':>5} {'acc':>7} {'std':>7} {'ratio1':>9} {'ratio2':>9} {'corr':>7}")
    for c_prime in args.cprime:
        cfg = ExperimentConfig(c_prime=c_prime, classifiers=args.classifiers, repetitions=args.repetitions,
                               seed=args.seed)
        report = run_experiment(cfg, dataset)
        render_report(report, args.out / f"cprime_{c_prime}")
        diag = {d["method"]: d for d in report.diagnostics}
        for row in report.accuracy:
            d = diag[row["method"]]
            print(f"{c_prime:>7} {row['method']:>6} {row['classifier']:>5} {row['mean']:7.4f} {row['std']:7.4f} "
                  f"{d['ratio1']:9.4g} {d['ratio2']:9.4g} {d['column_correlation']:7.4f}")


if __name__ == "__main__":
    main()
