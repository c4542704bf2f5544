"""Trace-ratio maximisation over matrices with orthonormal columns, and the
SM / RSM filter banks built from it.

For SPD ``A, B`` and ``1 <= k <= C`` the problem is

    max  trace(V^T A V) / trace(V^T B V)   s.t.  V^T V = I_k.

It is solved with the classical fixed-point iteration: given the current
ratio ``rho``, take ``V`` as the top-k eigenvectors of ``A - rho B`` and
recompute ``rho``. The sequence of ratios is nondecreasing and its limit is
the global maximum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .covariance import regularize
from .csp import FilterBank, Method, check_c_prime, generalized_eig
from .errors import ConvergenceWarning, NotPositiveDefinite
from .spdgeom import PD_RTOL, fix_signs, sym_eig


@dataclass(frozen=True)
class TraceRatioResult:
    frame: np.ndarray  # C x k, orthonormal columns
    rho: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)  # rho of the kept iterate, warm start first


def trace_ratio(frame: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.einsum("ij,ik,kj->", frame, a, frame) / np.einsum("ij,ik,kj->", frame, b, frame))


def _require_pd(m: np.ndarray, name: str) -> None:
    vals = sym_eig(m).values
    if not (vals[0] > 0 and vals[-1] > PD_RTOL * vals[0]):
        raise NotPositiveDefinite(f"{name} must be strictly positive definite")


def trace_ratio_max(
    a: np.ndarray, b: np.ndarray, k: int, tol: float = 1e-10, max_iter: int = 100
) -> TraceRatioResult:
    """Maximise ``trace(V^T A V) / trace(V^T B V)`` over orthonormal ``V``.

    Warm-started from an orthonormal basis of the top-k generalized
    eigenvectors of ``(A, B)``. Iteration stops once ``rho`` grows by less
    than ``tol * max(1, rho)``. If ``max_iter`` is hit, the last iterate is
    returned with ``converged=False`` and a :class:`ConvergenceWarning`.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = a.shape[0]
    if a.shape != (c, c) or b.shape != (c, c):
        raise ValueError(f"A and B must be square and equal-sized, got {a.shape} and {b.shape}")
    if not 1 <= k <= c:
        raise ValueError(f"need 1 <= k <= {c}, got {k}")
    _require_pd(b, "B")

    _, vecs = generalized_eig(a, b)
    frame, _ = np.linalg.qr(vecs[:, :k])
    frame = fix_signs(frame)
    rho = trace_ratio(frame, a, b)
    history = [rho]

    for it in range(1, max_iter + 1):
        cand = sym_eig(a - rho * b).vectors[:, :k]
        rho_new = trace_ratio(cand, a, b)
        gain = rho_new - rho
        if rho_new >= rho:
            frame, rho = cand, rho_new
        history.append(rho)
        if gain < tol * max(1.0, abs(rho)):
            return TraceRatioResult(frame, rho, it, True, history)

    warnings.warn(
        f"trace_ratio_max stopped at max_iter={max_iter} (last gain {gain:.3g})",
        ConvergenceWarning,
        stacklevel=2,
    )
    return TraceRatioResult(frame, rho, max_iter, False, history)


def _stiefel_bank(s0, s1, den0, den1, c_prime: int, method: Method, lam: float) -> FilterBank:
    h = c_prime // 2
    first = trace_ratio_max(s0, den0, h)
    second = trace_ratio_max(s1, den1, h)
    filters = np.hstack([first.frame, second.frame[:, ::-1]])
    rhos = np.r_[np.full(h, first.rho), np.full(h, second.rho)]
    return FilterBank(filters, method, lam, rhos)


def sm_filters(s0: np.ndarray, s1: np.ndarray, c_prime: int) -> FilterBank:
    """Orthonormal-per-half filters maximising the ratio-of-sums objective.

    The first half maximises class-0 over class-1 summed variance, the second
    half the reverse. The two halves are solved independently and are in
    general not orthogonal to each other.
    """
    s0, s1 = np.asarray(s0, dtype=float), np.asarray(s1, dtype=float)
    check_c_prime(c_prime, s0.shape[0])
    _require_pd(s0, "class-0 covariance")
    _require_pd(s1, "class-1 covariance")
    return _stiefel_bank(s0, s1, s1, s0, c_prime, Method.SM, 0.0)


def rsm_filters(s0: np.ndarray, s1: np.ndarray, c_prime: int, lam: float) -> FilterBank:
    """SM with the denominator covariance of each half ridge-regularized."""
    s0, s1 = np.asarray(s0, dtype=float), np.asarray(s1, dtype=float)
    check_c_prime(c_prime, s0.shape[0])
    if lam == 0:
        bank = sm_filters(s0, s1, c_prime)
        return FilterBank(bank.filters, Method.RSM, 0.0, bank.eigenvalues)
    return _stiefel_bank(s0, s1, regularize(s1, lam), regularize(s0, lam), c_prime, Method.RSM, float(lam))
