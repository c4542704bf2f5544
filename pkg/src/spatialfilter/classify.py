"""Downstream classifiers: log-variance features + LDA, and minimum distance
to Riemannian mean (MDRM) on spatially filtered trial covariances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .csp import FilterBank
from .data import Dataset, Epoch
from .errors import DegenerateFilter, MissingClass, TooFewTrials
from .spdgeom import airm_distance, riemannian_mean


def _samples(epoch) -> np.ndarray:
    return epoch.samples if isinstance(epoch, Epoch) else np.asarray(epoch, dtype=float)


def logvar_features(bank: FilterBank, epoch: Epoch | np.ndarray) -> np.ndarray:
    """``f_j = log(w_j^T X X^T w_j)`` for every filter column."""
    x = _samples(epoch)
    if x.shape[0] != bank.n_channels:
        raise ValueError(f"epoch has {x.shape[0]} channels, filters expect {bank.n_channels}")
    power = np.sum((bank.filters.T @ x) ** 2, axis=1)
    if np.any(power <= 0):
        raise DegenerateFilter("zero filtered variance; log-variance undefined")
    return np.log(power)


def logvar_matrix(bank: FilterBank, dataset: Dataset) -> np.ndarray:
    """Feature rows for every epoch of ``dataset``."""
    return np.array([logvar_features(bank, x) for x in dataset.samples])


@dataclass(frozen=True)
class LdaModel:
    weight: np.ndarray
    bias: float

    def decision(self, features: np.ndarray) -> np.ndarray:
        return np.asarray(features, dtype=float) @ self.weight + self.bias


def lda_fit(features: Sequence, labels: Sequence[int]) -> LdaModel:
    """Two-class Fisher LDA with a tiny ridge on the pooled scatter.

    ``weight = (S_w + eps I)^{-1} (mu1 - mu0)`` with ``eps = 1e-6 trace(S_w)/d``
    and ``bias = -weight^T (mu0 + mu1) / 2``.
    """
    f = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(labels)
    if f.shape[0] != y.shape[0]:
        raise ValueError("features and labels differ in length")
    n0, n1 = int(np.sum(y == 0)), int(np.sum(y == 1))
    if n0 == 0 or n1 == 0:
        raise MissingClass("LDA needs both labels")
    if n0 < 2 or n1 < 2:
        raise TooFewTrials("LDA needs at least 2 samples per label")
    mu0, mu1 = f[y == 0].mean(axis=0), f[y == 1].mean(axis=0)
    d0, d1 = f[y == 0] - mu0, f[y == 1] - mu1
    sw = (d0.T @ d0 + d1.T @ d1) / (n0 + n1 - 2)
    dim = f.shape[1]
    eps = 1e-6 * np.trace(sw) / dim
    if eps == 0:
        eps = 1e-12
    weight = np.linalg.solve(sw + eps * np.eye(dim), mu1 - mu0)
    if not np.any(weight):
        raise DegenerateFilter("class means coincide; LDA weight is zero")
    return LdaModel(weight, float(-weight @ (mu0 + mu1) / 2))


def lda_predict(model: LdaModel, features) -> int | np.ndarray:
    """Label 1 iff ``weight^T f + bias >= 0``. Accepts one vector or rows."""
    f = np.asarray(features, dtype=float)
    if f.shape[-1] != model.weight.shape[0]:
        raise ValueError(f"expected {model.weight.shape[0]} features, got {f.shape[-1]}")
    out = (model.decision(f) >= 0).astype(int)
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MdrmModel:
    mean0: np.ndarray
    mean1: np.ndarray


def trial_covariance(bank: FilterBank | None, x: np.ndarray) -> np.ndarray:
    """Covariance ``(W^T X)(W^T X)^T / T`` of one trial, lightly ridged.

    ``bank=None`` uses the raw channels.
    """
    z = x if bank is None else bank.filters.T @ x
    cov = z @ z.T / z.shape[1]
    cov = (cov + cov.T) / 2
    return cov + 1e-9 * (np.trace(cov) / cov.shape[0]) * np.eye(cov.shape[0])


def mdrm_fit(bank: FilterBank | None, dataset: Dataset) -> MdrmModel:
    means = []
    for c in (0, 1):
        idx = np.flatnonzero(dataset.labels == c)
        if idx.size == 0:
            raise MissingClass(f"no trials with label {c}")
        if idx.size < 2:
            raise TooFewTrials(f"MDRM needs at least 2 trials with label {c}")
        means.append(riemannian_mean([trial_covariance(bank, dataset.samples[i]) for i in idx]))
    return MdrmModel(*means)


def mdrm_predict(model: MdrmModel, bank: FilterBank | None, epoch: Epoch | np.ndarray) -> int:
    """Nearest class mean under the affine-invariant metric; ties go to 0."""
    cov = trial_covariance(bank, _samples(epoch))
    return mdrm_predict_cov(model, cov)


def mdrm_predict_cov(model: MdrmModel, cov: np.ndarray) -> int:
    d0 = airm_distance(cov, model.mean0)
    d1 = airm_distance(cov, model.mean1)
    return int(d1 < d0)
