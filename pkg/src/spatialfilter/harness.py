"""Experiment protocol: repeated stratified train/test splits, cross-validated
ridge parameter for the regularized methods, every method x classifier
combination, and report emission (JSON + CSV)."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .classify import lda_fit, lda_predict, logvar_matrix, mdrm_fit, mdrm_predict
from .covariance import class_covariances
from .csp import FilterBank, Method, column_correlation, csp_approach2, ratio1, ratio2, rcsp
from .data import Dataset, bandpass_fir, extract_window, read_epo
from .errors import ConfigError, NumericalError, TooFewTrials
from .stiefel import rsm_filters, sm_filters

log = logging.getLogger(__name__)

METHODS = ("CSP", "SM", "RCSP", "RSM")
REGULARIZED = ("RCSP", "RSM")
CLASSIFIERS = ("LDA", "MDRM")


@dataclass
class ExperimentConfig:
    dataset_path: str = ""
    c_prime: int = 6
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    classifiers: list[str] = field(default_factory=lambda: list(CLASSIFIERS))
    repetitions: int = 30
    train_fraction: float = 0.5
    lambda_grid: list[float] = field(default_factory=lambda: [0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0])
    cv_folds: int = 5
    seed: int = 0
    # optional extras, all off by default
    mdrm_space: str = "filtered"  # or "raw": MDRM on unfiltered trial covariances
    bandpass_hz: list[float] | None = None  # [lo, hi]
    fir_taps: int = 129
    window_s: list[float] | None = None  # [start, end], seconds from epoch start

    def __post_init__(self):
        self.methods = [str(m).upper() for m in self.methods]
        self.classifiers = [str(c).upper() for c in self.classifiers]
        self.lambda_grid = [float(x) for x in self.lambda_grid]
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {list(METHODS)}")
        bad = [c for c in self.classifiers if c not in CLASSIFIERS]
        if bad:
            raise ConfigError(f"unknown classifiers {bad}; choose from {list(CLASSIFIERS)}")
        if not self.classifiers:
            raise ConfigError("at least one classifier is required")
        if len(set(self.methods)) != len(self.methods) or len(set(self.classifiers)) != len(self.classifiers):
            raise ConfigError("methods and classifiers must not repeat")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not self.lambda_grid or any(not (x >= 0 and math.isfinite(x)) for x in self.lambda_grid):
            raise ConfigError("lambda_grid must be a nonempty list of finite values >= 0")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be >= 2")
        if self.c_prime < 2 or self.c_prime % 2:
            raise ConfigError("c_prime must be even and >= 2")
        if not 0 <= self.seed < 2**63:
            raise ConfigError("seed must be a nonnegative 63-bit integer")
        if self.mdrm_space not in ("filtered", "raw"):
            raise ConfigError("mdrm_space must be 'filtered' or 'raw'")
        if self.bandpass_hz is not None and len(self.bandpass_hz) != 2:
            raise ConfigError("bandpass_hz must be [lo, hi]")
        if self.window_s is not None and len(self.window_s) != 2:
            raise ConfigError("window_s must be [start, end]")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        cfg = cls.from_dict(d)
        # relative dataset paths are taken relative to the config file
        if cfg.dataset_path and not Path(cfg.dataset_path).is_absolute():
            cfg.dataset_path = str(path.parent / cfg.dataset_path)
        return cfg

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


# -- building blocks ----------------------------------------------------------


def build_bank(method: str, s0: np.ndarray, s1: np.ndarray, c_prime: int, lam: float = 0.0) -> FilterBank:
    method = method.upper()
    if method == "CSP":
        return csp_approach2(s0, s1, c_prime)
    if method == "SM":
        return sm_filters(s0, s1, c_prime)
    if method == "RCSP":
        return rcsp(s0, s1, c_prime, lam)
    if method == "RSM":
        return rsm_filters(s0, s1, c_prime, lam)
    raise ConfigError(f"unknown method {method!r}")


def evaluate(
    bank: FilterBank, classifier: str, train: Dataset, test: Dataset, mdrm_space: str = "filtered"
) -> float:
    """Fit ``classifier`` on ``train`` features and return test accuracy."""
    if classifier == "LDA":
        model = lda_fit(logvar_matrix(bank, train), train.labels)
        pred = lda_predict(model, logvar_matrix(bank, test))
    elif classifier == "MDRM":
        space = bank if mdrm_space == "filtered" else None
        model = mdrm_fit(space, train)
        pred = np.array([mdrm_predict(model, space, x) for x in test.samples])
    else:
        raise ConfigError(f"unknown classifier {classifier!r}")
    return float(np.mean(pred == test.labels))


def _n_train(fraction: float, n: int) -> int:
    # round() guards against 0.3*10 = 3.0000000000000004
    return math.ceil(round(fraction * n, 9))


def stratified_split(labels: np.ndarray, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Shuffle each label's indices and put the first ceil(f*N_c) in train."""
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in (0, 1):
        idx = rng.permutation(np.flatnonzero(labels == c))
        k = _n_train(train_fraction, idx.size)
        if k < 2 or idx.size - k < 1:
            raise TooFewTrials(
                f"label {c}: {idx.size} trials give {k} train / {idx.size - k} test "
                f"at train_fraction={train_fraction}; need >= 2 train and >= 1 test"
            )
        train.append(idx[:k])
        test.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def stratified_folds(labels: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Validation index sets; each label is dealt round-robin after a shuffle."""
    rng = np.random.default_rng(seed)
    out = [[] for _ in range(folds)]
    for c in (0, 1):
        idx = rng.permutation(np.flatnonzero(labels == c))
        if idx.size < folds or idx.size - math.ceil(idx.size / folds) < 2:
            raise TooFewTrials(f"label {c}: {idx.size} trials are too few for {folds}-fold CV")
        for pos, i in enumerate(idx):
            out[pos % folds].append(i)
    return [np.sort(np.array(f, dtype=np.intp)) for f in out]


def crossval_lambda(
    train: Dataset,
    grid: Sequence[float],
    folds: int,
    method: str,
    classifier: str,
    c_prime: int,
    seed: int,
    mdrm_space: str = "filtered",
) -> float:
    """Grid value with the best mean validation accuracy; ties go to the
    smaller value. Folds that fail numerically score 0."""
    grid = sorted(float(x) for x in grid)
    if len(grid) == 1:
        return grid[0]
    fold_sets = stratified_folds(train.labels, folds, seed)
    everything = np.arange(len(train))
    splits = []
    for val in fold_sets:
        fit = train.subset(np.setdiff1d(everything, val))
        splits.append((fit, train.subset(val), class_covariances(fit)))
    best_lam, best_score = grid[0], -1.0
    for lam in grid:
        scores = []
        for fit, val, (s0, s1) in splits:
            try:
                bank = build_bank(method, s0, s1, c_prime, lam)
                scores.append(evaluate(bank, classifier, fit, val, mdrm_space))
            except NumericalError as exc:
                log.debug("lambda=%g fold failed: %s", lam, exc)
                scores.append(0.0)
        score = float(np.mean(scores))
        log.debug("%s/%s lambda=%g cv accuracy %.4f", method, classifier, lam, score)
        if score > best_score:
            best_lam, best_score = lam, score
    return best_lam


def preprocess(dataset: Dataset, config: ExperimentConfig) -> Dataset:
    """Optional band-pass then time window, as configured.

    The band-pass trims ``(taps-1)/2`` samples from the front of each epoch,
    so the window start/end are shifted to stay relative to the original
    epoch start.
    """
    offset = 0.0
    if config.bandpass_hz is not None:
        lo, hi = config.bandpass_hz
        dataset = bandpass_fir(dataset, lo, hi, config.fir_taps)
        offset = (config.fir_taps - 1) // 2 / dataset.sample_rate_hz
    if config.window_s is not None:
        t0, t1 = config.window_s
        dataset = extract_window(dataset, t0 - offset, t1 - offset)
    return dataset


# -- report -------------------------------------------------------------------


def _std(values: Sequence[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


@dataclass
class ExperimentReport:
    """Aggregates plus the per-repetition records they were computed from.

    ``accuracy`` rows: method, classifier, mean, std, n. ``diagnostics`` rows:
    method, mean ratio1, mean ratio2, mean column correlation (training
    covariances, bank fitted for the first configured classifier).
    """

    config: dict[str, Any]
    accuracy: list[dict[str, Any]]
    diagnostics: list[dict[str, Any]]
    repetitions: list[dict[str, Any]]

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentReport":
        return cls(d["config"], d["accuracy"], d["diagnostics"], d["repetitions"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def accuracies(self, method: str, classifier: str) -> list[float]:
        return [r["methods"][method]["accuracy"][classifier] for r in self.repetitions]

    def mean_accuracy(self, method: str, classifier: str) -> float:
        for row in self.accuracy:
            if row["method"] == method and row["classifier"] == classifier:
                return row["mean"]
        raise KeyError((method, classifier))

    def diagnostic(self, method: str, key: str) -> float:
        for row in self.diagnostics:
            if row["method"] == method:
                return row[key]
        raise KeyError(method)


def _summarise(config: ExperimentConfig, reps: list[dict[str, Any]]) -> ExperimentReport:
    accuracy, diagnostics = [], []
    for m in config.methods:
        for c in config.classifiers:
            vals = [r["methods"][m]["accuracy"][c] for r in reps]
            accuracy.append(
                {"method": m, "classifier": c, "mean": float(np.mean(vals)), "std": _std(vals), "n": len(vals)}
            )
        diagnostics.append(
            {
                "method": m,
                "ratio1": float(np.mean([r["methods"][m]["ratio1"] for r in reps])),
                "ratio2": float(np.mean([r["methods"][m]["ratio2"] for r in reps])),
                "column_correlation": float(np.mean([r["methods"][m]["column_correlation"] for r in reps])),
            }
        )
    return ExperimentReport(config.to_dict(), accuracy, diagnostics, reps)


def run_repetition(config: ExperimentConfig, dataset: Dataset, r: int) -> dict[str, Any]:
    seed = config.seed ^ r
    train_idx, test_idx = stratified_split(dataset.labels, config.train_fraction, seed)
    train, test = dataset.subset(train_idx), dataset.subset(test_idx)
    s0, s1 = class_covariances(train)
    record: dict[str, Any] = {
        "repetition": r,
        "seed": seed,
        "n_train": len(train),
        "n_test": len(test),
        "methods": {},
    }
    for m in config.methods:
        lams, accs, banks = {}, {}, {}
        for c in config.classifiers:
            if m in REGULARIZED:
                lam = crossval_lambda(
                    train, config.lambda_grid, config.cv_folds, m, c, config.c_prime, seed, config.mdrm_space
                )
            else:
                lam = 0.0
            bank = build_bank(m, s0, s1, config.c_prime, lam)
            lams[c], banks[c] = lam, bank
            accs[c] = evaluate(bank, c, train, test, config.mdrm_space)
        bank = banks[config.classifiers[0]]
        record["methods"][m] = {
            "lambda": lams,
            "accuracy": accs,
            "ratio1": ratio1(bank, s0, s1),
            "ratio2": ratio2(bank, s0, s1),
            "column_correlation": column_correlation(bank),
        }
    return record


def run_experiment(config: ExperimentConfig, dataset: Dataset | None = None) -> ExperimentReport:
    """Run the full protocol. ``dataset`` overrides ``config.dataset_path``."""
    if dataset is None:
        dataset = read_epo(config.dataset_path)
    dataset = preprocess(dataset, config)
    n0, n1 = dataset.class_counts()
    if min(n0, n1) < 4:
        raise TooFewTrials(f"need >= 4 trials per label, have {n0} and {n1}")
    reps = []
    for r in range(config.repetitions):
        reps.append(run_repetition(config, dataset, r))
        log.info("repetition %d/%d done", r + 1, config.repetitions)
    return _summarise(config, reps)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def report_csvs(report: ExperimentReport) -> dict[str, str]:
    acc = _csv(
        ["method", "classifier", "accuracy_mean", "accuracy_std", "repetitions"],
        [[r["method"], r["classifier"], _fmt(r["mean"]), _fmt(r["std"]), r["n"]] for r in report.accuracy],
    )
    ratios = _csv(
        ["method", "ratio1_mean", "ratio2_mean"],
        [[r["method"], _fmt(r["ratio1"]), _fmt(r["ratio2"])] for r in report.diagnostics],
    )
    corr = _csv(
        ["method", "column_correlation_mean"],
        [[r["method"], _fmt(r["column_correlation"])] for r in report.diagnostics],
    )
    return {"accuracy.csv": acc, "ratios.csv": ratios, "correlations.csv": corr}


def render_report(report: ExperimentReport, out_dir, include_json: bool = True) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if include_json:
        (out / "report.json").write_text(report.to_json())
    for name, text in report_csvs(report).items():
        (out / name).write_text(text)


# -- filter bank file ---------------------------------------------------------


def bank_to_json(bank: FilterBank) -> str:
    """Serialise a bank; floats carry 17 significant digits, filters are
    flattened column by column."""
    def nums(xs):
        return "[" + ", ".join(f"{float(x):.17g}" for x in xs) + "]"

    return (
        "{\n"
        f'  "method": {json.dumps(bank.method.value)},\n'
        f'  "c_prime": {bank.c_prime},\n'
        f'  "lambda": {bank.lam:.17g},\n'
        f'  "channels": {bank.n_channels},\n'
        f'  "filters": {nums(bank.filters.ravel(order="F"))},\n'
        f'  "eigenvalues": {nums(bank.eigenvalues)}\n'
        "}\n"
    )


def bank_from_json(text: str) -> FilterBank:
    d = json.loads(text)
    c, k = d["channels"], d["c_prime"]
    w = np.array(d["filters"], dtype=float).reshape((c, k), order="F")
    return FilterBank(w, Method(d["method"]), float(d["lambda"]), np.array(d["eigenvalues"]))
