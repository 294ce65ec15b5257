"""Orthonormal polynomials for the inner product ``<z^a, z^b> = gamma(a - b)``.

With ``G_m = L L*`` the polynomials are ``(P_1, ..., P_m)^T = L^{-1} (1, z, ...,
z^(m-1))^T``; row k of ``L^{-1}`` holds the monomial coefficients of P_k.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from gafzeros.model import DomainError, ModelSpec
from gafzeros.toeplitz import build_finite, cholesky

MAX_DEGREE = 512
COND_WARN = 1e8


@dataclass(frozen=True)
class OrthoBasis:
    spec: ModelSpec
    coeffs: np.ndarray  # lower triangular, row k = coefficients of P_{k+1}

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]


def gram_basis(spec: ModelSpec, m: int) -> OrthoBasis:
    """Orthonormal basis ``P_1..P_m`` via triangular inversion of the Cholesky factor.

    Warns when the spread of ``diag(L)`` suggests ill-conditioning.
    """
    if not 1 <= m <= MAX_DEGREE:
        raise DomainError(f"basis size must be in 1..{MAX_DEGREE}, got {m}")
    L = cholesky(build_finite(spec, m)).L
    d = np.real(np.diag(L))
    spread = (d.max() / d.min()) ** 2
    if spread > COND_WARN:
        warnings.warn(f"Cholesky diagonal spread {spread:.3g} for {spec.describe()}, m={m}", stacklevel=2)
    coeffs = sla.solve_triangular(L, np.eye(m, dtype=L.dtype), lower=True)
    return OrthoBasis(spec, np.tril(coeffs))


def eval_P(basis: OrthoBasis, k: int, z):
    """Value of P_k (1-based) at ``z`` by Horner's rule."""
    if not 1 <= k <= basis.m:
        raise DomainError(f"k must be in 1..{basis.m}")
    c = basis.coeffs[k - 1, :k]
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for a in c[::-1]:
        acc = acc * z + a
    return acc


def eval_all(basis: OrthoBasis, z, m: int | None = None) -> np.ndarray:
    """``(P_1(z), ..., P_m(z))`` for scalar ``z``."""
    m = basis.m if m is None else m
    powers = np.asarray(z, dtype=complex) ** np.arange(m)
    return basis.coeffs[:m, :m] @ powers


def kernel_partial_sum(basis: OrthoBasis, m: int, z, w) -> complex:
    """``sum_{k<=m} P_k(z) conj(P_k(w))``."""
    if m > basis.m:
        raise DomainError(f"basis only has {basis.m} polynomials")
    pz = eval_all(basis, z, m)
    pw = eval_all(basis, w, m)
    return complex(np.sum(pz * np.conj(pw)))


def fgn0_P(n: int, z):
    """``(2 / (n (n+1)))^(1/2) (1 + 2 z + ... + n z^(n-1))``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for a in range(n, 0, -1):
        acc = acc * z + a
    return math.sqrt(2.0 / (n * (n + 1))) * acc


def fgn0_partial_sums(m: int, z, w) -> np.ndarray:
    """Running sums ``sum_{n<=k} P_n(z) conj(P_n(w))`` for k = 1..m, in O(m)."""
    n = np.arange(1, m + 1, dtype=float)
    z = complex(z)
    w = complex(w)

    def S(x):
        # S_n(x) = sum_{a<=n} a x^(a-1), accumulated
        return np.cumsum(n * x ** (n - 1))

    terms = 2.0 / (n * (n + 1.0)) * S(z) * np.conj(S(w))
    return np.cumsum(terms)


def mgs_basis(spec: ModelSpec, m: int) -> np.ndarray:
    """Modified Gram-Schmidt on monomials under the gamma inner product.

    Independent of the Cholesky route; used only to cross-check it.
    """
    G = build_finite(spec, m).matrix
    # <u, v> = u^T G conj(v) for coefficient vectors u, v
    V = np.eye(m, dtype=complex)
    for k in range(m):
        for j in range(k):
            proj = V[k] @ G @ np.conj(V[j])
            V[k] = V[k] - proj * V[j]
        nrm = math.sqrt(float(np.real(V[k] @ G @ np.conj(V[k]))))
        V[k] = V[k] / nrm
    return V
