"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL/INFO line that is printed in the pytest
terminal summary, so ``pytest tests/test_acceptance.py`` gives a one-screen
verdict.
"""

import json
import time

import numpy as np
import pytest

from spatialfilter.cli import main
from spatialfilter.covariance import class_covariances
from spatialfilter.csp import csp_approach1, csp_approach2, ratio1, ratio2, whitened_decomposition
from spatialfilter.data import SynthParams, generate_synthetic
from spatialfilter.harness import ExperimentConfig, report_csvs, run_experiment
from spatialfilter.spdgeom import airm_distance, riemannian_mean
from spatialfilter.stiefel import sm_filters, trace_ratio_max

from _util import abs_cos, best_random_ratios, random_spd, random_spd_pair
from conftest import ACCEPTANCE_LINES


def record(n, name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {n}. {name}: {detail}")
    assert ok, detail


def suite_pairs():
    sizes = (4, 8, 22)
    return [(i, sizes[i % 3], *random_spd_pair(i, sizes[i % 3])) for i in range(200)]


def test_1_equivalence():
    t0 = time.perf_counter()
    worst_cos, worst_eig = 1.0, 0.0
    for _, c, s0, s1 in suite_pairs():
        b1, b2 = csp_approach1(s0, s1, c), csp_approach2(s0, s1, c)
        cos = min(abs_cos(b1.filters[:, j], b2.filters[:, j]) for j in range(c))
        worst_cos = min(worst_cos, cos)
        worst_eig = max(worst_eig, np.max(np.abs(np.sort(b1.eigenvalues) - np.sort(b2.eigenvalues))))
    elapsed = time.perf_counter() - t0
    ok = worst_cos > 1 - 1e-6 and worst_eig < 1e-8 and elapsed < 10
    record(1, "approach equivalence", ok,
           f"min |cos|={worst_cos:.16f}, max eig diff={worst_eig:.2e}, {elapsed:.2f}s over 200 pairs")


def test_2_whitening_identities():
    worst_s, worst_l = 0.0, 0.0
    for _, c, s0, s1 in suite_pairs():
        d = whitened_decomposition(s0, s1)
        worst_s = max(worst_s, np.max(np.abs(d.s0_white + d.s1_white - np.eye(c))))
        worst_l = max(worst_l, np.max(np.abs(d.lambda0 + d.lambda1 - 1)))
    ok = worst_s < 1e-8 and worst_l < 1e-8
    record(2, "whitening identities", ok, f"max |S0+S1-I|={worst_s:.2e}, max |L0+L1-1|={worst_l:.2e}")


@pytest.mark.slow
def test_3_trace_ratio_solver():
    t0 = time.perf_counter()
    n_frames = 10**6
    pairs = {3: [random_spd_pair(1000 + i, 3) for i in range(50)],
             6: [random_spd_pair(2000 + i, 6) for i in range(50)]}
    worst_gap, worst_drop, failures = np.inf, 0.0, 0
    for c, items in pairs.items():
        for k in (1, 2, 3):
            oracle = best_random_ratios(items, k, n_frames, seed=10 * c + k)
            for (a, b), best in zip(items, oracle):
                res = trace_ratio_max(a, b, k)
                drop = max(0.0, -np.min(np.diff(res.history))) if len(res.history) > 1 else 0.0
                worst_drop = max(worst_drop, drop)
                gap = res.rho - best
                worst_gap = min(worst_gap, gap)
                failures += drop > 0 or gap < -1e-6
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 120
    record(3, "trace-ratio solver vs 1e6 random frames", ok,
           f"min(rho - best random)={worst_gap:.2e}, max rho decrease={worst_drop:.2e}, "
           f"failures={failures}/300, {elapsed:.1f}s")


def test_4_objective_ordering():
    bad1, bad2, eq_gap = [], [], 0.0
    for seed in range(50):
        s0, s1 = random_spd_pair(seed, 6)
        csp, sm = csp_approach2(s0, s1, 4), sm_filters(s0, s1, 4)
        if ratio1(csp, s0, s1) < ratio1(sm, s0, s1) - 1e-9:
            bad1.append(seed)
        if ratio2(sm, s0, s1) < ratio2(csp, s0, s1) - 1e-9:
            bad2.append(seed)
        for bank in (csp_approach2(s0, s1, 2), sm_filters(s0, s1, 2)):
            eq_gap = max(eq_gap, abs(ratio1(bank, s0, s1) - ratio2(bank, s0, s1)))
    ok = not bad1 and not bad2 and eq_gap <= 1e-10
    record(4, "objective ordering", ok,
           f"ratio1(CSP)<ratio1(SM) on seeds {bad1}, ratio2(SM)<ratio2(CSP) on seeds {bad2}, "
           f"C'=2 max |ratio1-ratio2|={eq_gap:.1e}")


def test_5_regularization():
    ds, _ = generate_synthetic(SynthParams(epochs_per_class=20, noise_std=2.0, seed=5))
    cfg = ExperimentConfig(c_prime=4, repetitions=30, classifiers=["LDA"], seed=5)
    rep = run_experiment(cfg, ds)
    assert rep.repetitions[0]["n_train"] == 20
    acc = {m: rep.mean_accuracy(m, "LDA") for m in cfg.methods}
    ratio_bad = [r["repetition"] for r in rep.repetitions
                 if r["methods"]["RCSP"]["ratio1"] > r["methods"]["CSP"]["ratio1"] + 1e-9]
    lams = [r["methods"]["RCSP"]["lambda"]["LDA"] for r in rep.repetitions]
    ok = acc["RCSP"] >= acc["CSP"] and acc["RSM"] >= acc["SM"] and not ratio_bad
    record(5, "regularization", ok,
           f"acc CSP={acc['CSP']:.4f} RCSP={acc['RCSP']:.4f} SM={acc['SM']:.4f} RSM={acc['RSM']:.4f}; "
           f"RCSP lambda>0 in {sum(l > 0 for l in lams)}/30; Ratio1 violations {ratio_bad}")


def span_cos(w, basis):
    q, _ = np.linalg.qr(basis)
    return np.linalg.norm(q.T @ w) / np.linalg.norm(w)


def test_6_end_to_end():
    t0 = time.perf_counter()
    ds, _ = generate_synthetic(SynthParams())
    cfg = ExperimentConfig(c_prime=4, methods=["CSP"], classifiers=["LDA"], repetitions=30)
    acc = run_experiment(cfg, ds).mean_accuracy("CSP", "LDA")

    clean, truth = generate_synthetic(SynthParams(noise_std=0.1))
    bank = csp_approach2(*class_covariances(clean), 4)
    first, last = bank.filters[:, 0], bank.filters[:, -1]
    aligned = [span_cos(first, truth), span_cos(last, truth), abs_cos(first, truth[:, 0]), abs_cos(last, truth[:, 1])]
    elapsed = time.perf_counter() - t0
    ok = acc >= 0.95 and min(aligned) >= 0.95 and elapsed < 60
    record(6, "end-to-end synthetic decoding", ok,
           f"CSP+LDA mean acc={acc:.4f}; |cos| to truth (span first, span last, src1, src2)="
           f"{', '.join(f'{x:.4f}' for x in aligned)}; {elapsed:.1f}s")


def test_7_riemannian():
    rng = np.random.default_rng(70)
    diags = rng.uniform(0.1, 10, (6, 4))
    gm_err = np.max(np.abs(riemannian_mean([np.diag(d) for d in diags]) - np.diag(np.exp(np.log(diags).mean(0)))))
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    rot = riemannian_mean([q @ np.diag(d) @ q.T for d in diags])
    gm_err = max(gm_err, np.max(np.abs(rot - q @ np.diag(np.exp(np.log(diags).mean(0))) @ q.T)))

    inv_err = 0.0
    for _ in range(50):
        a, b = random_spd(rng, 5), random_spd(rng, 5)
        g = rng.standard_normal((5, 5))
        inv_err = max(inv_err, abs(airm_distance(g @ a @ g.T, g @ b @ g.T) - airm_distance(a, b)))

    ds, _ = generate_synthetic(SynthParams())
    cfg = ExperimentConfig(c_prime=4, methods=["CSP"], classifiers=["LDA", "MDRM"], repetitions=30)
    rep = run_experiment(cfg, ds)
    lda, mdrm = rep.accuracies("CSP", "LDA"), rep.accuracies("CSP", "MDRM")
    below = sum(m <= l for m, l in zip(mdrm, lda))
    hard = gm_err < 1e-8 and inv_err < 1e-8 and np.mean(mdrm) >= 0.90 and below >= 18
    detail = (f"geometric-mean err={gm_err:.1e}, AIRM invariance err={inv_err:.1e}, "
              f"MDRM mean acc={np.mean(mdrm):.4f}, MDRM<=LDA in {below}/30")
    if hard and below < 20:
        ACCEPTANCE_LINES.append(f"[WARN] 7. Riemannian suite: {detail} (soft check short of 20)")
        return
    record(7, "Riemannian suite", hard, detail)


def test_8_determinism(tmp_path):
    data = tmp_path / "d.epo1"
    assert main(["gen", "--channels", "8", "--samples", "200", "--per-class", "20", "--seed", "8",
                 "--out", str(data)]) == 0
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"dataset_path": "d.epo1", "c_prime": 4, "repetitions": 3, "seed": 8}))
    outs = [tmp_path / "run1", tmp_path / "run2"]
    for out in outs:
        assert main(["eval", "--config", str(cfg), "--out", str(out)]) == 0
    a, b = ((o / "report.json").read_bytes() for o in outs)
    record(8, "determinism", a == b, f"report.json {len(a)} bytes, identical={a == b}")


@pytest.mark.slow
def test_9_informational_subjects():
    # stand-ins with the shapes of the two public motor-imagery datasets
    shapes = {"ds1-like": (59, 100, 100.0, 400), "ds2a-like": (22, 72, 250.0, 1000)}
    cfg = ExperimentConfig(c_prime=6, classifiers=["LDA"], repetitions=2, bandpass_hz=[7, 30],
                           window_s=[1.0, 3.5], fir_taps=41)
    lines = []
    for name, (c, n, fs, t) in shapes.items():
        ds, _ = generate_synthetic(SynthParams(channels=c, samples=t, epochs_per_class=n, sample_rate_hz=fs,
                                               noise_std=2.0, seed=9))
        tables = report_csvs(run_experiment(cfg, ds))
        assert set(tables) == {"accuracy.csv", "ratios.csv", "correlations.csv"}
        corr = dict(row.split(",") for row in tables["correlations.csv"].splitlines()[1:])
        lines.append(f"{name}: column correlation CSP={corr['CSP']} SM={corr['SM']}")
    ACCEPTANCE_LINES.append(
        "[INFO] 9. subject-shaped pipeline completed; " + "; ".join(lines)
        + "; reference averages on real recordings: CSP ~ 0.1018, SM ~ 0.0817"
    )
