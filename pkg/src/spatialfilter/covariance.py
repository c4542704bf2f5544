"""Class mean covariances and ridge regularization."""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .errors import MissingClass


def symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2


def class_covariances(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-class mean of ``X X^T`` over epochs.

    No mean removal and no per-trial normalisation: each class matrix is
    ``(1/N_c) sum_i X_ci X_ci^T``. Epochs are accumulated in file order.
    """
    out = []
    for c in (0, 1):
        idx = np.flatnonzero(dataset.labels == c)
        if idx.size == 0:
            raise MissingClass(f"no epochs with label {c}")
        acc = np.zeros((dataset.n_channels, dataset.n_channels))
        for i in idx:
            x = dataset.samples[i]
            acc += x @ x.T
        out.append(symmetrize(acc / idx.size))
    return out[0], out[1]


def regularize(sigma: np.ndarray, lam: float) -> np.ndarray:
    """Return ``sigma + lam * (trace(sigma)/C) * I``.

    Scaling the ridge by the mean eigenvalue makes ``lam`` dimensionless.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    sigma = np.asarray(sigma, dtype=float)
    if lam == 0:
        return sigma.copy()
    c = sigma.shape[0]
    return sigma + lam * (np.trace(sigma) / c) * np.eye(c)


def composite(s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
    s0, s1 = np.asarray(s0, dtype=float), np.asarray(s1, dtype=float)
    if s0.shape != s1.shape:
        raise ValueError(f"dimension mismatch: {s0.shape} vs {s1.shape}")
    return s0 + s1
