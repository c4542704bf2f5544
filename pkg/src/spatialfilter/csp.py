"""Common spatial pattern filters.

Two constructions of the same filters are provided: whitening of the
composite covariance followed by an eigendecomposition of the whitened
class-0 covariance (:func:`csp_approach1`), and a direct solve of the
generalized eigenproblem ``S0 w = lambda S1 w`` (:func:`csp_approach2`).
Column order is fixed throughout: the ``C'/2`` filters with the largest
class-0/class-1 variance ratio first (largest first), then the ``C'/2``
with the smallest ratio, the very smallest last.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .covariance import composite, regularize
from .errors import DegenerateFilter, InvalidCPrime, SingularCovariance
from .spdgeom import PD_RTOL, fix_signs, sym_eig, whitening

log = logging.getLogger(__name__)


class Method(str, enum.Enum):
    CSP1 = "CSP1"
    CSP2 = "CSP2"
    RCSP = "RCSP"
    SM = "SM"
    RSM = "RSM"

    @property
    def is_stiefel(self) -> bool:
        return self in (Method.SM, Method.RSM)


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Spatial filters ``W`` (C x C') plus provenance.

    ``eigenvalues`` holds, per column, the generalized eigenvalue of the
    ``(S0, S1)`` pencil for CSP variants, and the converged trace ratio of the
    column's half for the Stiefel variants.
    """

    filters: np.ndarray
    method: Method
    lam: float
    eigenvalues: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.filters, dtype=float)
        object.__setattr__(self, "filters", w)
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float))
        if w.ndim != 2:
            raise ValueError("filters must be a C x C' matrix")
        check_c_prime(w.shape[1], w.shape[0])
        if not np.all(np.isfinite(w)):
            raise DegenerateFilter("filter entries must be finite")
        if np.any(np.linalg.norm(w, axis=0) == 0):
            raise DegenerateFilter("zero filter column")
        if self.eigenvalues.shape != (w.shape[1],):
            raise ValueError("need one eigenvalue/ratio per filter column")
        if self.method.is_stiefel:
            h = self.half
            for part in (w[:, :h], w[:, h:]):
                if not np.allclose(part.T @ part, np.eye(h), atol=1e-8, rtol=0):
                    raise ValueError("Stiefel filter halves must have orthonormal columns")

    @property
    def n_channels(self) -> int:
        return self.filters.shape[0]

    @property
    def c_prime(self) -> int:
        return self.filters.shape[1]

    @property
    def half(self) -> int:
        return self.filters.shape[1] // 2


def check_c_prime(c_prime: int, n_channels: int) -> None:
    if c_prime % 2 or not 2 <= c_prime <= n_channels:
        raise InvalidCPrime(f"C' must be even with 2 <= C' <= C={n_channels}, got {c_prime}")


def _extremes(c: int, c_prime: int) -> np.ndarray:
    h = c_prime // 2
    return np.r_[0:h, c - h:c]


def _normalize(w: np.ndarray) -> np.ndarray:
    return fix_signs(w / np.linalg.norm(w, axis=0))


@dataclass(frozen=True)
class WhitenedDecomposition:
    """Intermediates of the whitening construction, kept for inspection."""

    whitener: np.ndarray  # P, with P (S0 + S1) P^T = I
    s0_white: np.ndarray  # P S0 P^T
    s1_white: np.ndarray  # P S1 P^T
    rotation: np.ndarray  # U, eigenvectors of P S0 P^T (descending)
    lambda0: np.ndarray  # descending eigenvalues of P S0 P^T
    lambda1: np.ndarray  # diag(U^T P S1 P^T U)


def whitened_decomposition(s0: np.ndarray, s1: np.ndarray) -> WhitenedDecomposition:
    p = whitening(composite(s0, s1))
    w0 = p @ s0 @ p.T
    w1 = p @ s1 @ p.T
    eig = sym_eig(w0)
    u = eig.vectors
    lambda1 = np.einsum("ij,ik,kj->j", u, w1, u)
    return WhitenedDecomposition(p, (w0 + w0.T) / 2, (w1 + w1.T) / 2, u, eig.values, lambda1)


def csp_approach1(s0: np.ndarray, s1: np.ndarray, c_prime: int) -> FilterBank:
    """CSP by whitening the composite covariance.

    ``W = P^T V`` where ``V`` holds the first and last ``C'/2`` eigenvectors of
    the whitened class-0 covariance. The generalized eigenvalue of each column
    is recovered as ``lambda0 / lambda1``.
    """
    s0, s1 = np.asarray(s0, dtype=float), np.asarray(s1, dtype=float)
    check_c_prime(c_prime, s0.shape[0])
    d = whitened_decomposition(s0, s1)
    sel = _extremes(s0.shape[0], c_prime)
    w = d.whitener.T @ d.rotation[:, sel]
    return FilterBank(_normalize(w), Method.CSP1, 0.0, d.lambda0[sel] / d.lambda1[sel])


def _denominator_invsqrt(s1: np.ndarray) -> np.ndarray:
    eig = sym_eig(s1)
    if not (eig.values[0] > 0 and eig.values[-1] > PD_RTOL * eig.values[0]):
        raise SingularCovariance(
            "denominator covariance is singular; regularize it (lambda > 0) first"
        )
    u = eig.vectors
    return (u / np.sqrt(eig.values)) @ u.T


def generalized_eig(s0: np.ndarray, s1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All solutions of ``s0 w = lambda s1 w``, lambda descending.

    Solved through the symmetric matrix ``s1^{-1/2} s0 s1^{-1/2}``; returned
    eigenvectors have unit Euclidean norm and the package sign convention.
    """
    r = _denominator_invsqrt(np.asarray(s1, dtype=float))
    eig = sym_eig(r @ np.asarray(s0, dtype=float) @ r)
    return eig.values, _normalize(r @ eig.vectors)


def csp_approach2(s0: np.ndarray, s1: np.ndarray, c_prime: int) -> FilterBank:
    s0, s1 = np.asarray(s0, dtype=float), np.asarray(s1, dtype=float)
    check_c_prime(c_prime, s0.shape[0])
    values, vectors = generalized_eig(s0, s1)
    sel = _extremes(s0.shape[0], c_prime)
    return FilterBank(vectors[:, sel], Method.CSP2, 0.0, values[sel])


def rcsp(s0: np.ndarray, s1: np.ndarray, c_prime: int, lam: float) -> FilterBank:
    """Ridge-regularized CSP.

    First half: top eigenvectors of ``(S1 + lam s I)^{-1} S0``; second half:
    top eigenvectors of ``(S0 + lam s I)^{-1} S1``, most discriminative last.
    The stored value for a second-half column is the reciprocal of its
    eigenvalue so both halves read as class-0/class-1 ratios.
    """
    s0, s1 = np.asarray(s0, dtype=float), np.asarray(s1, dtype=float)
    check_c_prime(c_prime, s0.shape[0])
    if lam == 0:
        bank = csp_approach2(s0, s1, c_prime)
        return FilterBank(bank.filters, Method.RCSP, 0.0, bank.eigenvalues)
    h = c_prime // 2
    v0, w0 = generalized_eig(s0, regularize(s1, lam))
    v1, w1 = generalized_eig(s1, regularize(s0, lam))
    filters = np.hstack([w0[:, :h], w1[:, :h][:, ::-1]])
    values = np.r_[v0[:h], 1 / v1[:h][::-1]]
    return FilterBank(filters, Method.RCSP, float(lam), values)


def _quadratic_forms(bank: FilterBank, s0, s1) -> tuple[np.ndarray, np.ndarray]:
    w = bank.filters
    s0, s1 = np.asarray(s0, dtype=float), np.asarray(s1, dtype=float)
    if s0.shape != (w.shape[0],) * 2 or s1.shape != s0.shape:
        raise ValueError(f"covariances {s0.shape}/{s1.shape} do not match filters {w.shape}")
    return np.einsum("ij,ik,kj->j", w, s0, w), np.einsum("ij,ik,kj->j", w, s1, w)


def ratio1(bank: FilterBank, s0: np.ndarray, s1: np.ndarray) -> float:
    """Sum of per-filter variance ratios (class 0 over 1 for the first half,
    class 1 over 0 for the second)."""
    q0, q1 = _quadratic_forms(bank, s0, s1)
    h = bank.half
    num = np.r_[q0[:h], q1[h:]]
    den = np.r_[q1[:h], q0[h:]]
    if np.any(den <= 0):
        raise DegenerateFilter("a filter has zero variance in the denominator class")
    return float(np.sum(num / den))


def ratio2(bank: FilterBank, s0: np.ndarray, s1: np.ndarray) -> float:
    """Per-half ratio of summed variances, added over the two halves."""
    q0, q1 = _quadratic_forms(bank, s0, s1)
    h = bank.half
    den0, den1 = q1[:h].sum(), q0[h:].sum()
    if den0 <= 0 or den1 <= 0:
        raise DegenerateFilter("a filter half has zero variance in the denominator class")
    return float(q0[:h].sum() / den0 + q1[h:].sum() / den1)


def column_correlation(bank: FilterBank | np.ndarray) -> float:
    """Mean absolute Pearson correlation over all unordered column pairs.

    Each column is treated as a sample of length C. A constant column has
    correlation 0 with everything.
    """
    w = bank.filters if isinstance(bank, FilterBank) else np.asarray(bank, dtype=float)
    if w.shape[1] < 2:
        raise ValueError("need at least two columns")
    centred = w - w.mean(axis=0)
    norms = np.linalg.norm(centred, axis=0)
    constant = norms <= 1e-15 * np.maximum(np.abs(w).max(axis=0), 1e-300)
    if np.any(constant):
        log.info("constant filter column(s) %s; correlation taken as 0", np.flatnonzero(constant))
    total = 0.0
    pairs = list(itertools.combinations(range(w.shape[1]), 2))
    for i, j in pairs:
        if constant[i] or constant[j]:
            continue
        total += min(1.0, abs(centred[:, i] @ centred[:, j]) / (norms[i] * norms[j]))
    return total / len(pairs)
