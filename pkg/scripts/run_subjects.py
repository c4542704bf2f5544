"""Run the comparison protocol on every EPO1 file in a directory.

Each file is treated as one subject. Per-subject reports go to
``OUT/<subject>/`` and three summary tables (accuracy per subject and
method, mean Ratio1/Ratio2, mean column correlation) go to ``OUT/``.

    python scripts/run_subjects.py data/ds2a --out results/ds2a --window 1 3.5 --band 7 30
"""

import argparse
import csv
import logging
from pathlib import Path

import numpy as np

from spatialfilter.data import read_epo
from spatialfilter.harness import ExperimentConfig, render_report, run_experiment

log = logging.getLogger("run_subjects")


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("data_dir", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--cprime", type=int, nargs="+", default=[2, 4, 6, 8])
    p.add_argument("--band", type=float, nargs=2, default=[7.0, 30.0])
    p.add_argument("--window", type=float, nargs=2, default=[1.0, 3.5], help="seconds from epoch start")
    p.add_argument("--taps", type=int, default=129)
    p.add_argument("--repetitions", type=int, default=30)
    p.add_argument("--classifiers", nargs="+", default=["LDA", "MDRM"])
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    files = sorted(args.data_dir.glob("*.epo1"))
    if not files:
        raise SystemExit(f"no .epo1 files in {args.data_dir}")

    acc_rows, ratio_rows, corr = [], [], {}
    for c_prime in args.cprime:
        cfg = ExperimentConfig(c_prime=c_prime, classifiers=args.classifiers, repetitions=args.repetitions,
                               bandpass_hz=list(args.band), window_s=list(args.window), fir_taps=args.taps,
                               seed=args.seed)
        for f in files:
            subject = f.stem
            report = run_experiment(cfg, read_epo(f))
            render_report(report, args.out / f"cprime_{c_prime}" / subject)
            for row in report.accuracy:
                acc_rows.append([subject, c_prime, row["method"], row["classifier"], f"{row['mean']:.6g}",
                                 f"{row['std']:.6g}"])
            for d in report.diagnostics:
                ratio_rows.append([subject, c_prime, d["method"], f"{d['ratio1']:.6g}", f"{d['ratio2']:.6g}"])
                corr.setdefault((c_prime, d["method"]), []).append(d["column_correlation"])
            log.info("C'=%d %s done", c_prime, subject)

    args.out.mkdir(parents=True, exist_ok=True)
    write_table(args.out / "subject_accuracy.csv",
                ["subject", "c_prime", "method", "classifier", "accuracy_mean", "accuracy_std"], acc_rows)
    write_table(args.out / "subject_ratios.csv", ["subject", "c_prime", "method", "ratio1", "ratio2"], ratio_rows)
    write_table(args.out / "column_correlation.csv", ["c_prime", "method", "average"],
                [[c, m, f"{np.mean(v):.4f}"] for (c, m), v in sorted(corr.items())])
    print((args.out / "column_correlation.csv").read_text(), end="")


if __name__ == "__main__":
    main()
