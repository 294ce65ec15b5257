"""Autocovariance sequences, finite Toeplitz truncations and their inverses.

All matrices are finite truncations ``G_n = (gamma(k - j))_{k,j=1..n}`` of the
infinite hermitian Toeplitz matrix of a :class:`~gafzeros.model.ModelSpec`.
Indices in the closed-form inverse formulas are 1-based, as in the usual
matrix notation; array indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from gafzeros.model import DomainError, ModelSpec, NotPositiveDefiniteError

# relative pivot threshold for the Levinson/Trench path
TRENCH_PIVOT_RTOL = 1e-12


def gamma_of(spec: ModelSpec, k: int) -> complex:
    """Autocovariance ``gamma(k)`` of the family, normalised so gamma(0) = 1."""
    k = int(k)
    fam = spec.family
    if fam == "iid":
        return 1.0 if k == 0 else 0.0
    if fam == "tridiag":
        if k == 0:
            return 1.0
        return spec.q if abs(k) == 1 else 0.0
    if fam == "fgn0":
        if k == 0:
            return 1.0
        return -0.5 if abs(k) == 1 else 0.0
    if fam == "kms":
        q = spec.q
        if k >= 0:
            return q**k
        return np.conj(q) ** (-k)
    if fam == "fgn":
        e = 2.0 * spec.h
        a = abs(k)
        return 0.5 * (a + 1) ** e + 0.5 * abs(a - 1) ** e - a**e
    raise DomainError(f"unknown family {fam!r}")


def gamma_vector(spec: ModelSpec, n: int) -> np.ndarray:
    """``(gamma(0), ..., gamma(n-1))`` as a complex or real array."""
    vals = [gamma_of(spec, k) for k in range(n)]
    dtype = float if spec.is_real else complex
    return np.asarray(vals, dtype=dtype)


@dataclass(frozen=True)
class FiniteToeplitz:
    """Hermitian Toeplitz matrix stored by its first column."""

    first_column: np.ndarray

    @property
    def n(self) -> int:
        return len(self.first_column)

    @property
    def matrix(self) -> np.ndarray:
        c = self.first_column
        return sla.toeplitz(c, np.conj(c))


@dataclass(frozen=True)
class LowerFactor:
    """Lower-triangular ``L`` with positive diagonal and ``L L* = G``."""

    L: np.ndarray

    @property
    def n(self) -> int:
        return self.L.shape[0]


def build_finite(spec: ModelSpec, n: int) -> FiniteToeplitz:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return FiniteToeplitz(gamma_vector(spec, n))


def _as_matrix(T) -> np.ndarray:
    if isinstance(T, FiniteToeplitz):
        return T.matrix
    return np.asarray(T)


def cholesky(T) -> LowerFactor:
    """Cholesky factor of a hermitian positive definite matrix.

    Raises
    ------
    NotPositiveDefiniteError
        With the (0-based) index of the first leading minor that fails.
    """
    M = _as_matrix(T)
    dtype = complex if np.iscomplexobj(M) else float
    (potrf,) = sla.get_lapack_funcs(("potrf",), (M.astype(dtype),))
    L, info = potrf(M.astype(dtype), lower=True, clean=True)
    if info > 0:
        idx = info - 1
        piv = float(np.real(M[idx, idx]))
        if idx:
            # Schur-complement pivot of the failing step
            L11 = np.tril(L[:idx, :idx])
            v = sla.solve_triangular(L11, M[:idx, idx], lower=True)
            piv -= float(np.vdot(v, v).real)
        raise NotPositiveDefiniteError(idx, piv)
    if info < 0:
        raise ValueError(f"potrf argument error {info}")
    return LowerFactor(np.tril(L))


def levinson_first_column(c: np.ndarray, pivot_rtol: float = TRENCH_PIVOT_RTOL):
    """Solve ``T x = e_1`` for hermitian Toeplitz ``T`` with first column ``c``.

    Returns ``None`` when a prediction-error pivot drops below
    ``pivot_rtol * ||c||``, signalling that the caller should fall back to a
    dense factorisation.
    """
    c = np.asarray(c)
    n = len(c)
    tol = pivot_rtol * np.linalg.norm(c)
    dtype = complex if np.iscomplexobj(c) else float
    a = np.zeros(n, dtype=dtype)
    a[0] = 1.0
    sigma = float(np.real(c[0]))
    if not sigma > tol:
        return None
    for m in range(n - 1):
        # row m+1 of T_{m+2} applied to [a; 0]
        delta = np.dot(c[m + 1 : 0 : -1], a[: m + 1])
        kappa = -delta / sigma
        a[1 : m + 2] = a[1 : m + 2] + kappa * np.conj(a[m::-1])
        sigma = sigma * (1.0 - abs(kappa) ** 2)
        if not sigma > tol:
            return None
    return a / sigma


def trench_inverse(c: np.ndarray, pivot_rtol: float = TRENCH_PIVOT_RTOL):
    """O(n^2) inverse of a hermitian Toeplitz matrix (Trench recursion).

    Uses the Gohberg-Semencul structure: with ``x = T^{-1} e_1`` and
    ``u = (0, conj(x_{n-1}), ..., conj(x_1))``, consecutive entries along a
    diagonal differ by ``(x_i conj(x_j) - u_i conj(u_j)) / x_0``.
    Returns ``None`` if the Levinson pivots degenerate.
    """
    x = levinson_first_column(c, pivot_rtol)
    if x is None:
        return None
    n = len(x)
    x0 = np.real(x[0])
    u = np.zeros_like(x)
    u[1:] = np.conj(x[:0:-1])
    B = np.empty((n, n), dtype=x.dtype)
    B[0, :] = np.conj(x)
    for i in range(n - 1):
        B[i + 1, 0] = x[i + 1]
        B[i + 1, 1:] = B[i, :-1] + (x[i + 1] * np.conj(x[1:]) - u[i + 1] * np.conj(u[1:])) / x0
    return B


def cholesky_inverse(T) -> np.ndarray:
    M = _as_matrix(T)
    L = cholesky(M).L
    Linv = sla.solve_triangular(L, np.eye(len(M), dtype=L.dtype), lower=True)
    inv = Linv.conj().T @ Linv
    return 0.5 * (inv + inv.conj().T)


def invert_finite(T, method: str = "auto") -> np.ndarray:
    """Inverse of a finite hermitian positive definite Toeplitz matrix.

    Parameters
    ----------
    T : FiniteToeplitz
    method : {'auto', 'trench', 'cholesky'}
        ``auto`` runs the Trench recursion and falls back to the dense
        Cholesky inverse when a Levinson pivot is relatively below 1e-12.

    Raises
    ------
    NotPositiveDefiniteError
        If the matrix is singular or indefinite.
    """
    if not isinstance(T, FiniteToeplitz):
        raise TypeError("invert_finite expects a FiniteToeplitz")
    if method not in ("auto", "trench", "cholesky"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "trench"):
        B = trench_inverse(T.first_column)
        if B is not None:
            return B
        if method == "trench":
            raise NotPositiveDefiniteError(-1, 0.0)
    return cholesky_inverse(T)


def chebyshev_U(k: int, x: float) -> float:
    """Chebyshev polynomial of the second kind by three-term recurrence."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    u_prev, u = 1.0, 2.0 * x
    if k == 0:
        return u_prev
    for _ in range(k - 1):
        u_prev, u = u, 2.0 * x * u - u_prev
    return u


def chebyshev_U_closed(k: int, x: float) -> float:
    """Closed form of U_k valid for ``|x| > 1``."""
    if not abs(x) > 1:
        raise DomainError("closed form needs |x| > 1")
    r = math.sqrt(x * x - 1.0)
    return ((x + r) ** (k + 1) - (x - r) ** (k + 1)) / (2.0 * r)


def _log_sinh(v):
    # log(sinh(v)) for v > 0 without overflow
    v = np.asarray(v, dtype=float)
    return v + np.log1p(-np.exp(-2.0 * v)) - math.log(2.0)


def _check_tridiag_q(q):
    q = float(q)
    if not abs(q) < 0.5:
        raise DomainError(f"tridiagonal family requires |q| < 1/2, got q={q}")
    return q


def tridiag_inverse_entry(q: float, n: int, k: int, j: int) -> float:
    """Entry (k, j) (1-based) of the inverse of the n x n tridiagonal truncation.

    ``(-1)^(k+j) q^(j-k) / |q|^(j-k+1) * U_{k-1}(a) U_{n-j}(a) / U_n(a)`` with
    ``a = 1/(2|q|)`` for ``k <= j``. The Chebyshev ratio is evaluated as
    ``sinh(k t) sinh((n-j+1) t) / (sinh t sinh((n+1) t))`` with
    ``cosh t = a``, in log space, so large ``n`` does not overflow.
    """
    q = _check_tridiag_q(q)
    if not (1 <= k <= n and 1 <= j <= n):
        raise DomainError(f"indices ({k}, {j}) outside 1..{n}")
    if k > j:
        return np.conj(tridiag_inverse_entry(q, n, j, k))
    if q == 0.0:
        return 1.0 if k == j else 0.0
    t = math.acosh(1.0 / (2.0 * abs(q)))
    logr = _log_sinh(k * t) + _log_sinh((n - j + 1) * t) - _log_sinh(t) - _log_sinh((n + 1) * t)
    sign = (-math.copysign(1.0, q)) ** (j - k)
    return float(sign * math.exp(logr) / abs(q))


def tridiag_inverse_matrix(q: float, n: int) -> np.ndarray:
    """Full n x n inverse; the same formula as :func:`tridiag_inverse_entry`, vectorised."""
    q = _check_tridiag_q(q)
    if q == 0.0:
        return np.eye(n)
    t = math.acosh(1.0 / (2.0 * abs(q)))
    idx = np.arange(1, n + 1)
    k = np.minimum.outer(idx, idx)
    j = np.maximum.outer(idx, idx)
    logr = _log_sinh(k * t) + _log_sinh((n - j + 1) * t) - _log_sinh(t) - _log_sinh((n + 1) * t)
    sign = (-math.copysign(1.0, q)) ** (j - k)
    return sign * np.exp(logr) / abs(q)


def tridiag_infinite_inverse_entry(q: float, k: int, j: int) -> float:
    """Entry (k, j) of the inverse of the infinite tridiagonal matrix.

    For ``k <= j`` this is
    ``(-2q)^(j-k) (1+s)^(-j) ((1+s)^k - (1-s)^k) / s`` with
    ``s = sqrt(1 - 4 q^2)``, rearranged as
    ``(-2q/(1+s))^(j-k) (1 - ((1-s)/(1+s))^k) / s``.
    """
    q = _check_tridiag_q(q)
    if k < 1 or j < 1:
        raise DomainError("indices are 1-based")
    if k > j:
        k, j = j, k
    s = math.sqrt(1.0 - 4.0 * q * q)
    ratio = (1.0 - s) / (1.0 + s)
    return (-2.0 * q / (1.0 + s)) ** (j - k) * (1.0 - ratio**k) / s


def kms_inverse_entry(q: complex, k: int, j: int) -> complex:
    """Entry (k, j) (1-based) of the inverse of the infinite KMS matrix."""
    q = complex(q)
    aq2 = abs(q) ** 2
    if not aq2 < 1:
        raise DomainError(f"KMS requires |q| < 1, got |q|={abs(q)}")
    d = 1.0 - aq2
    out: complex
    if k == j:
        out = 1.0 / d if k == 1 else (1.0 + aq2) / d
    elif k - j == 1:
        out = -q / d
    elif k - j == -1:
        out = -q.conjugate() / d
    else:
        out = 0.0
    return out.real if q.imag == 0 else out
