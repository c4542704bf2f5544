import json
from pathlib import Path

import numpy as np
import pytest

from spatialfilter.covariance import class_covariances
from spatialfilter.data import Dataset, SynthParams, generate_synthetic
from spatialfilter.errors import ConfigError, TooFewTrials
from spatialfilter.harness import (
    ExperimentConfig,
    ExperimentReport,
    bank_from_json,
    bank_to_json,
    build_bank,
    crossval_lambda,
    evaluate,
    preprocess,
    render_report,
    report_csvs,
    run_experiment,
    stratified_folds,
    stratified_split,
)

GOLDEN = Path(__file__).parent / "fixtures" / "golden"
GRID = [0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0]


def golden_dataset():
    return generate_synthetic(
        SynthParams(channels=10, samples=30, epochs_per_class=12, noise_std=2.0, source_std_high=1.5, seed=42)
    )[0]


def golden_config():
    return ExperimentConfig(c_prime=4, repetitions=3, lambda_grid=[0, 0.01, 0.1, 1], cv_folds=3, seed=7)


def noisy(seed, per_class=10):
    return generate_synthetic(
        SynthParams(channels=22, samples=25, epochs_per_class=per_class, noise_std=2.0,
                    source_std_high=1.5, seed=seed)
    )[0]


# -- splits ---------------------------------------------------------------------


def test_split_stratified_and_deterministic():
    labels = np.repeat([0, 1], [11, 7])
    tr, te = stratified_split(labels, 0.5, seed=3)
    assert np.sum(labels[tr] == 0) == 6 and np.sum(labels[tr] == 1) == 4
    assert sorted(np.r_[tr, te]) == list(range(18))
    tr2, te2 = stratified_split(labels, 0.5, seed=3)
    np.testing.assert_array_equal(tr, tr2)
    np.testing.assert_array_equal(te, te2)
    tr3, _ = stratified_split(labels, 0.5, seed=4)
    assert not np.array_equal(tr, tr3)


def test_split_too_few():
    labels = np.repeat([0, 1], 4)
    with pytest.raises(TooFewTrials):
        stratified_split(labels, 0.2, seed=0)  # ceil(0.8) = 1 train trial
    with pytest.raises(TooFewTrials):
        stratified_split(labels, 0.9, seed=0)  # no test trial left


def test_folds_cover_each_label():
    labels = np.repeat([0, 1], [10, 12])
    folds = stratified_folds(labels, 5, seed=0)
    assert sorted(np.concatenate(folds)) == list(range(22))
    for f in folds:
        assert set(labels[f]) == {0, 1}
    with pytest.raises(TooFewTrials):
        stratified_folds(np.repeat([0, 1], 3), 5, seed=0)


# -- crossval -----------------------------------------------------------------


def test_crossval_singleton_grid():
    # no folds are run: the tiny dataset would otherwise be rejected
    ds = Dataset(np.random.default_rng(0).standard_normal((4, 4, 10)), np.array([0, 0, 1, 1]), 1.0)
    assert crossval_lambda(ds, [0.3], 5, "RCSP", "LDA", 2, seed=0) == 0.3


def test_crossval_clean_data_prefers_zero(monkeypatch):
    ds, _ = generate_synthetic(SynthParams(channels=6, samples=200, epochs_per_class=10, seed=1))
    import spatialfilter.harness as h

    scores = []
    real = h.evaluate

    def spy(*args, **kw):
        acc = real(*args, **kw)
        scores.append(acc)
        return acc

    monkeypatch.setattr(h, "evaluate", spy)
    lam = crossval_lambda(ds, GRID, 5, "RCSP", "LDA", 4, seed=0)
    assert lam == 0.0
    assert set(scores) == {1.0}
    assert len(scores) == 5 * len(GRID)


def test_crossval_strong_noise_prefers_regularization():
    chosen = [crossval_lambda(noisy(100 + s), GRID, 5, "RCSP", "LDA", 4, seed=s) for s in range(30)]
    assert sum(lam > 0 for lam in chosen) > 15


def test_crossval_too_few():
    ds = Dataset(np.random.default_rng(0).standard_normal((6, 4, 10)), np.repeat([0, 1], 3), 1.0)
    with pytest.raises(TooFewTrials):
        crossval_lambda(ds, GRID, 5, "RCSP", "LDA", 2, seed=0)


# -- experiment ---------------------------------------------------------------


def test_run_experiment_deterministic():
    a = run_experiment(golden_config(), golden_dataset())
    b = run_experiment(golden_config(), golden_dataset())
    assert a.to_json() == b.to_json()


def test_golden_csvs():
    rep = run_experiment(golden_config(), golden_dataset())
    for name, text in report_csvs(rep).items():
        assert text == (GOLDEN / name).read_text(), name


def test_report_shapes():
    cfg = golden_config()
    rep = run_experiment(cfg, golden_dataset())
    assert len(rep.accuracy) == len(cfg.methods) * len(cfg.classifiers)
    assert len(rep.repetitions) == cfg.repetitions
    for row in rep.accuracy:
        assert 0 <= row["mean"] <= 1 and row["n"] == cfg.repetitions
    for r in rep.repetitions:
        assert r["n_train"] + r["n_test"] == 24
        assert set(r["methods"]["RCSP"]["lambda"]) == {"LDA", "MDRM"}
        assert r["methods"]["CSP"]["lambda"] == {"LDA": 0.0, "MDRM": 0.0}


def test_ordering_and_regularization_on_report():
    cfg = ExperimentConfig(c_prime=4, repetitions=10, classifiers=["LDA"], seed=3)
    rep = run_experiment(cfg, noisy(7, per_class=20))
    assert rep.diagnostic("CSP", "ratio1") >= rep.diagnostic("SM", "ratio1")
    assert rep.diagnostic("SM", "ratio2") >= rep.diagnostic("CSP", "ratio2")
    n_reg = 0
    for r in rep.repetitions:
        m = r["methods"]
        if m["RCSP"]["lambda"]["LDA"] > 0:
            n_reg += 1
            assert m["RCSP"]["ratio1"] <= m["CSP"]["ratio1"] + 1e-9
        if m["RSM"]["lambda"]["LDA"] > 0:
            assert m["RSM"]["ratio2"] <= m["SM"]["ratio2"] + 1e-9
    assert n_reg > 0


def test_too_few_trials():
    ds = Dataset(np.random.default_rng(0).standard_normal((6, 4, 10)), np.repeat([0, 1], 3), 1.0)
    with pytest.raises(TooFewTrials):
        run_experiment(ExperimentConfig(), ds)


def test_preprocess_window_offset():
    fs = 100.0
    ds, _ = generate_synthetic(SynthParams(channels=3, samples=400, epochs_per_class=2, sample_rate_hz=fs))
    cfg = ExperimentConfig(bandpass_hz=[7, 30], fir_taps=41, window_s=[1.0, 3.5])
    out = preprocess(ds, cfg)
    assert out.n_samples == 250
    # same samples as filtering then cutting by hand at the delay-shifted indices
    from spatialfilter.data import bandpass_fir

    full = bandpass_fir(ds, 7, 30, 41).samples
    np.testing.assert_array_equal(out.samples, full[:, :, 100 - 20 : 350 - 20])


# -- config -------------------------------------------------------------------


def test_config_roundtrip_and_validation(tmp_path):
    cfg = ExperimentConfig(dataset_path="d.epo1", methods=["csp", "rsm"], seed=5)
    assert cfg.methods == ["CSP", "RSM"]
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    back = ExperimentConfig.from_json(p)
    assert back.dataset_path == str(tmp_path / "d.epo1")
    assert back.seed == 5
    for bad in (
        {"nope": 1},
        {"methods": ["LDA"]},
        {"train_fraction": 1.0},
        {"repetitions": 0},
        {"lambda_grid": [-1]},
        {"cv_folds": 1},
        {"c_prime": 3},
        {"classifiers": []},
    ):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(p)


# -- report rendering ---------------------------------------------------------


def test_empty_methods_header_only(tmp_path):
    cfg = ExperimentConfig(methods=[], repetitions=2)
    rep = run_experiment(cfg, golden_dataset())
    render_report(rep, tmp_path)
    assert (tmp_path / "accuracy.csv").read_text() == "method,classifier,accuracy_mean,accuracy_std,repetitions\n"
    assert (tmp_path / "ratios.csv").read_text() == "method,ratio1_mean,ratio2_mean\n"
    assert (tmp_path / "correlations.csv").read_text() == "method,column_correlation_mean\n"


def test_report_json_roundtrip(tmp_path):
    rep = run_experiment(golden_config(), golden_dataset())
    render_report(rep, tmp_path)
    back = ExperimentReport.from_json((tmp_path / "report.json").read_text())
    assert back == rep
    assert back.mean_accuracy("CSP", "LDA") == rep.accuracy[0]["mean"]


# -- bank file ----------------------------------------------------------------


def test_bank_json_roundtrip():
    ds = golden_dataset()
    s0, s1 = class_covariances(ds)
    for method, lam in (("CSP", 0), ("RSM", 0.1)):
        bank = build_bank(method, s0, s1, 4, lam)
        text = bank_to_json(bank)
        back = bank_from_json(text)
        np.testing.assert_array_equal(back.filters, bank.filters)
        np.testing.assert_array_equal(back.eigenvalues, bank.eigenvalues)
        assert back.method == bank.method and back.lam == bank.lam
        d = json.loads(text)
        assert d["filters"][:10] == list(bank.filters[:, 0])
        assert all(len(tok.strip().lstrip("-").replace(".", "").split("e")[0].lstrip("0")) <= 17
                   for tok in text.split("[")[1].split("]")[0].split(","))


def test_evaluate_unknown_classifier():
    ds = golden_dataset()
    bank = build_bank("CSP", *class_covariances(ds), 4)
    with pytest.raises(ConfigError):
        evaluate(bank, "SVM", ds, ds)
    with pytest.raises(ConfigError):
        build_bank("PCA", *class_covariances(ds), 4)
