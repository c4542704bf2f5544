"""Symmetric eigendecomposition, whitening and the affine-invariant geometry
of SPD matrices (matrix functions, distance, Riemannian mean)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConvergenceWarning, EigFailed, NotPositiveDefinite, SingularCovariance

# relative eigenvalue floor below which a matrix counts as singular
PD_RTOL = 1e-12


@dataclass(frozen=True)
class EigenPair:
    values: np.ndarray  # descending
    vectors: np.ndarray  # columns are eigenvectors


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive.

    Ties go to the lowest row index.
    """
    v = np.array(vectors, dtype=float, copy=True)
    rows = np.argmax(np.abs(v), axis=0)
    flip = v[rows, np.arange(v.shape[1])] < 0
    v[:, flip] *= -1
    return v


def sym_eig(s: np.ndarray) -> EigenPair:
    s = np.asarray(s, dtype=float)
    try:
        w, u = np.linalg.eigh((s + s.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise EigFailed(str(exc)) from exc
    order = np.argsort(-w, kind="stable")  # ties keep eigh's order
    return EigenPair(w[order], fix_signs(u[:, order]))


def _check_pd(values: np.ndarray, exc=NotPositiveDefinite, what: str = "matrix", hint: str = "") -> None:
    top = values[0]
    if not (top > 0 and values[-1] > PD_RTOL * top):
        raise exc(
            f"{what} is not strictly positive definite "
            f"(eigenvalues in [{values[-1]:.3g}, {top:.3g}]){hint}"
        )


def whitening(sigma: np.ndarray) -> np.ndarray:
    """``P = Lambda^{-1/2} U^T`` so that ``P sigma P^T = I``."""
    eig = sym_eig(sigma)
    _check_pd(eig.values, SingularCovariance, "covariance", "; regularize it first")
    return eig.vectors.T / np.sqrt(eig.values)[:, None]


_FUNCS = {
    "sqrt": np.sqrt,
    "invsqrt": lambda x: 1 / np.sqrt(x),
    "log": np.log,
    "exp": np.exp,
}


def spd_map(s: np.ndarray, f: str) -> np.ndarray:
    """Apply a scalar function to the spectrum: ``U diag(f(Lambda)) U^T``."""
    try:
        func = _FUNCS[f]
    except KeyError:
        raise ValueError(f"unknown matrix function {f!r}; choose from {sorted(_FUNCS)}") from None
    eig = sym_eig(s)
    if f != "exp":
        _check_pd(eig.values)
    u = eig.vectors
    out = (u * func(eig.values)) @ u.T
    return (out + out.T) / 2


def airm_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Affine-invariant distance ``||log(A^{-1/2} B A^{-1/2})||_F``.

    Uses ``L^{-1} B L^{-T}`` with ``A = L L^T``, which has the same spectrum
    and loses less accuracy than the symmetric square root when ``A`` is
    badly conditioned.
    """
    a = np.asarray(a, dtype=float)
    _check_pd(sym_eig(a).values)
    _check_pd(sym_eig(b).values)
    low = np.linalg.cholesky((a + a.T) / 2)
    m = solve_triangular(low, solve_triangular(low, np.asarray(b, dtype=float), lower=True).T, lower=True)
    lam = np.linalg.eigvalsh((m + m.T) / 2)
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))


def riemannian_mean(
    mats: Sequence[np.ndarray], tol: float = 1e-8, max_iter: int = 50
) -> np.ndarray:
    """Fréchet mean under the affine-invariant metric.

    Fixed-point iteration started from the arithmetic mean, unit step. Stops
    once the Frobenius norm of the mean log-map at the current point is below
    ``tol``; warns with :class:`ConvergenceWarning` and returns the last
    iterate if ``max_iter`` updates are not enough.
    """
    mats = [np.asarray(m, dtype=float) for m in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    for m in mats:
        _check_pd(sym_eig(m).values)
    mean = sum(mats) / len(mats)
    for _ in range(max_iter):
        sq = spd_map(mean, "sqrt")
        isq = spd_map(mean, "invsqrt")
        tangent = sum(spd_map(isq @ m @ isq, "log") for m in mats) / len(mats)
        if np.linalg.norm(tangent) < tol:
            return mean
        mean = sq @ spd_map(tangent, "exp") @ sq
        mean = (mean + mean.T) / 2
    warnings.warn(
        f"riemannian_mean did not converge in {max_iter} iterations", ConvergenceWarning, stacklevel=2
    )
    return mean
