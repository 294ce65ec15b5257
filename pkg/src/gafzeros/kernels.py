"""Covariance kernels ``K(z, w) = E f(z) conj(f(w))`` and disc automorphisms.

Every kernel here is holomorphic in ``z`` and antiholomorphic in ``w``. The
closed forms come in two shapes: ``psi(z) conj(psi(w)) / (1 - z conj(w))``
(identity, tridiagonal, KMS and h = 0 fGn, all with inverse-of-G covariance)
and the direct-G tridiagonal kernel ``(1 + q z + q conj(w)) / (1 - z conj(w))``.
Anything else is the truncated series ``Z_N^T M conj(W_N)`` with ``M`` either
``G_N^{-1}`` or ``G_N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gafzeros.model import DomainError, IllConditionedError, ModelSpec
from gafzeros.toeplitz import build_finite, invert_finite


def szego(z, w):
    return 1.0 / (1.0 - z * np.conj(w))


def bergman(z, w):
    return 1.0 / (math.pi * (1.0 - z * np.conj(w)) ** 2)


def mobius(w, z):
    """Disc automorphism ``T_w(z) = (z - w) / (1 - z conj(w))``."""
    return (z - w) / (1.0 - z * np.conj(w))


def mobius_derivative_at_fixed_point(z) -> float:
    """``T_z'(z) = 1 / (1 - |z|^2)``."""
    return 1.0 / (1.0 - abs(z) ** 2)


def mobius_product(ws, z):
    out = np.ones_like(np.asarray(z, dtype=complex))
    for w in ws:
        out = out * mobius(w, z)
    return out


# -- tail bounds shared with the zero finder ------------------------------


def tail_bound(B: float, r: float, N: int) -> float:
    """``B (r^N / (1 - r))^2``: bound on the variance of the omitted tail."""
    return B * (r**N / (1.0 - r)) ** 2


def order_for_bound(r: float, eps: float, B: float) -> int:
    """Smallest ``N`` with ``tail_bound(B, r, N) <= eps``."""
    if not 0 < r < 1:
        raise DomainError(f"radius must lie in (0, 1), got {r}")
    if not eps > 0:
        raise DomainError("eps must be positive")
    N = math.ceil((math.log(eps) + 2.0 * math.log(1.0 - r) - math.log(B)) / (2.0 * math.log(r)))
    N = max(N, 1)
    # guard against rounding at the boundary
    while N > 1 and tail_bound(B, r, N - 1) <= eps:
        N -= 1
    while tail_bound(B, r, N) > eps:
        N += 1
    return N


def coefficient_matrix(spec: ModelSpec, N: int) -> np.ndarray:
    """``G_N^{-1}`` for inverse mode, ``G_N`` for direct mode."""
    T = build_finite(spec, N)
    if spec.mode == "direct":
        return T.matrix
    return invert_finite(T)


def sup_bound(spec: ModelSpec, N: int) -> float:
    return float(np.max(np.abs(coefficient_matrix(spec, N))))


def series_order(spec: ModelSpec, r: float, eps: float, start: int = 64, max_order: int = 4096) -> int:
    """Truncation order from the tail bound, with B the observed sup entry.

    B is re-estimated on the block of the proposed order until the order
    stops growing.
    """
    N = start
    for _ in range(32):
        B = sup_bound(spec, N)
        need = order_for_bound(r, eps, B)
        if need <= N:
            return need
        if need > max_order:
            raise DomainError(
                f"series order {need} needed for eps={eps} at r={r} exceeds {max_order}"
            )
        N = need
    return N


# -- kernels --------------------------------------------------------------


def _pts(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=complex))


class KernelEval:
    """Base class: subclasses implement :meth:`gram`.

    ``gram(zs, ws, dz, dwbar)`` returns the matrix of
    ``d^dz/dz^dz d^dwbar/dconj(w)^dwbar K(z_k, w_j)`` for ``dz, dwbar`` in {0, 1}.
    """

    spec: ModelSpec | None = None
    label = "kernel"

    def gram(self, zs, ws, dz: int = 0, dwbar: int = 0) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, z, w) -> complex:
        return complex(self.gram(_pts(z), _pts(w))[0, 0])

    def dz(self, z, w) -> complex:
        return complex(self.gram(_pts(z), _pts(w), 1, 0)[0, 0])

    def dwbar(self, z, w) -> complex:
        return complex(self.gram(_pts(z), _pts(w), 0, 1)[0, 0])

    def dzdwbar(self, z, w) -> complex:
        return complex(self.gram(_pts(z), _pts(w), 1, 1)[0, 0])


class PsiKernel(KernelEval):
    """``psi(z) conj(psi(w)) / (1 - z conj(w))`` for a holomorphic, nonvanishing psi."""

    def __init__(self, psi, dpsi, spec: ModelSpec | None = None, label: str = "psi-kernel"):
        self.psi = psi
        self.dpsi = dpsi
        self.spec = spec
        self.label = label

    def gram(self, zs, ws, dz=0, dwbar=0):
        z = _pts(zs)[:, None]
        w = _pts(ws)[None, :]
        wb = np.conj(w)
        S = 1.0 / (1.0 - z * wb)
        pz, pw = self.psi(z), np.conj(self.psi(w))
        if dz == 0 and dwbar == 0:
            return pz * pw * S
        dpz = self.dpsi(z)
        dpw = np.conj(self.dpsi(w))
        Sz = wb * S**2
        Sw = z * S**2
        if dz == 1 and dwbar == 0:
            return dpz * pw * S + pz * pw * Sz
        if dz == 0 and dwbar == 1:
            return pz * dpw * S + pz * pw * Sw
        Szw = (1.0 + z * wb) * S**3
        return dpz * dpw * S + dpz * pw * Sw + pz * dpw * Sz + pz * pw * Szw


class DirectTridiagKernel(KernelEval):
    """Covariance kernel when the coefficients have covariance G itself.

    ``sum_{k,j} G_{kj} z^(k-1) conj(w)^(j-1) = (1 + q z + q conj(w)) / (1 - z conj(w))``.
    """

    def __init__(self, q: float, spec: ModelSpec | None = None):
        self.q = float(q)
        self.spec = spec
        self.label = f"direct-tridiag(q={q})"

    def gram(self, zs, ws, dz=0, dwbar=0):
        q = self.q
        z = _pts(zs)[:, None]
        wb = np.conj(_pts(ws))[None, :]
        D = 1.0 - z * wb
        Nm = 1.0 + q * z + q * wb
        if dz == 0 and dwbar == 0:
            return Nm / D
        if dz == 1 and dwbar == 0:
            return q / D + Nm * wb / D**2
        if dz == 0 and dwbar == 1:
            return q / D + Nm * z / D**2
        return q * z / D**2 + (q * wb + Nm) / D**2 + 2.0 * Nm * z * wb / D**3


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    tail_bound: float


class SeriesKernel(KernelEval):
    """Truncated series ``Z_N^T M conj(W_N)``; derivatives are termwise."""

    def __init__(self, spec: ModelSpec, N: int, matrix: np.ndarray | None = None):
        if N < 1:
            raise DomainError("series order must be >= 1")
        self.spec = spec
        self.N = N
        self.M = coefficient_matrix(spec, N) if matrix is None else matrix
        self.B = float(np.max(np.abs(self.M)))
        self.label = f"series[{spec.describe()}, N={N}]"

    def _vander(self, x, deriv):
        n = np.arange(self.N)
        x = x[:, None]
        if deriv == 0:
            return x**n
        # d/dz z^n = n z^(n-1); n=0 column is zero
        return n * x ** np.maximum(n - 1, 0)

    def gram(self, zs, ws, dz=0, dwbar=0):
        Vz = self._vander(_pts(zs), dz)
        Vw = self._vander(_pts(ws), dwbar)
        return Vz @ self.M @ np.conj(Vw).T

    def tail_bound(self, z, w) -> float:
        r = max(abs(z), abs(w))
        return tail_bound(self.B, r, self.N) if r < 1 else math.inf


def psi_tridiag(q: float, z):
    """``(2/|q|)^(1/2) / (a + b z)`` with ``a = sqrt(1/|q| + sqrt(q^-2 - 4))`` and ``b = 2 sign(q) / a``."""
    q = float(q)
    if not 0 < abs(q) < 0.5:
        raise DomainError(f"psi_tridiag needs 0 < |q| < 1/2, got q={q}")
    a = math.sqrt(1.0 / abs(q) + math.sqrt(q**-2 - 4.0))
    b = 2.0 / a * math.copysign(1.0, q)
    return math.sqrt(2.0 / abs(q)) / (a + b * np.asarray(z))


def dpsi_tridiag(q: float, z):
    q = float(q)
    a = math.sqrt(1.0 / abs(q) + math.sqrt(q**-2 - 4.0))
    b = 2.0 / a * math.copysign(1.0, q)
    return -math.sqrt(2.0 / abs(q)) * b / (a + b * np.asarray(z)) ** 2


def psi_kms(q: complex, z):
    q = complex(q)
    if not abs(q) < 1:
        raise DomainError(f"psi_kms needs |q| < 1, got |q|={abs(q)}")
    return (1.0 - q * np.asarray(z)) / math.sqrt(1.0 - abs(q) ** 2)


def dpsi_kms(q: complex, z):
    q = complex(q)
    return np.full_like(np.asarray(z, dtype=complex), -q / math.sqrt(1.0 - abs(q) ** 2))


def psi_fgn0(z):
    return math.sqrt(2.0) / (1.0 - np.asarray(z))


def dpsi_fgn0(z):
    return math.sqrt(2.0) / (1.0 - np.asarray(z)) ** 2


def _one(z):
    return np.ones_like(np.asarray(z, dtype=complex))


def _zero(z):
    return np.zeros_like(np.asarray(z, dtype=complex))


def closed_kernel(spec: ModelSpec) -> KernelEval:
    """Closed-form kernel of the family, where one is known.

    The psi callables are looked up at call time so that the module-level
    functions stay the single source of truth.
    """
    fam = spec.family
    if spec.mode == "direct":
        if fam == "iid":
            return PsiKernel(_one, _zero, spec, "szego")
        if fam == "tridiag":
            return DirectTridiagKernel(spec.q, spec)
        raise DomainError(f"no closed direct-G kernel for {fam}")
    if fam == "iid" or (fam == "tridiag" and spec.q == 0) or (fam == "kms" and spec.q == 0):
        return PsiKernel(_one, _zero, spec, "szego")
    if fam == "tridiag":
        q = spec.q
        return PsiKernel(lambda z: psi_tridiag(q, z), lambda z: dpsi_tridiag(q, z), spec, f"tridiag(q={q})")
    if fam == "kms":
        q = spec.q
        return PsiKernel(lambda z: psi_kms(q, z), lambda z: dpsi_kms(q, z), spec, f"kms(q={q})")
    if fam == "fgn0":
        return PsiKernel(lambda z: psi_fgn0(z), lambda z: dpsi_fgn0(z), spec, "fgn0")
    if fam == "fgn" and spec.h == 0.5:
        return PsiKernel(_one, _zero, spec, "szego")
    raise DomainError(f"no closed-form kernel for {spec.describe()}")


def make_kernel(spec: ModelSpec, N: int | None = None) -> KernelEval:
    """Closed form when available and ``N`` is not given, else the series."""
    if N is None:
        try:
            return closed_kernel(spec)
        except DomainError:
            N = 300
    return SeriesKernel(spec, N)


def kg_series(spec: ModelSpec, z, w, N: int, tol: float | None = None) -> SeriesValue:
    """Partial double sum ``sum_{k,j<=N} M_kj z^(k-1) conj(w)^(j-1)``.

    Raises
    ------
    DomainError
        If ``tol`` is given and the tail bound exceeds it; the message names
        the order that would suffice.
    """
    K = SeriesKernel(spec, N)
    bound = K.tail_bound(z, w)
    if tol is not None and bound > tol:
        r = max(abs(z), abs(w))
        need = order_for_bound(r, tol, K.B)
        raise DomainError(f"N={N} too small for tol={tol} at r={r:.3g}; need N >= {need}")
    return SeriesValue(K(z, w), bound)


def kg_closed_tridiag(q: float, z, w):
    return psi_tridiag(q, z) * np.conj(psi_tridiag(q, w)) * szego(z, w)


def kg_closed_kms(q: complex, z, w):
    return psi_kms(q, z) * np.conj(psi_kms(q, w)) * szego(z, w)


def kg_direct_tridiag(q: float, z, w):
    return (1.0 + q * z + q * np.conj(w)) * szego(z, w)


def kg_fgn0(z, w):
    """``2 / ((1 - z)(1 - conj(w))(1 - z conj(w)))``."""
    return 2.0 / ((1.0 - z) * (1.0 - np.conj(w)) * (1.0 - z * np.conj(w)))


def conditioned_kernel(K: KernelEval, w, z, y, tol: float = 1e-300) -> complex:
    """Covariance kernel of ``f`` given ``f(w) = 0`` (Schur reduction)."""
    kww = K(w, w).real
    if not kww > tol:
        raise IllConditionedError(f"K(w, w) = {kww} is not positive; cannot condition at w={w}")
    return K(z, y) - K(z, w) * K(w, y) / kww


def mobius_conjugated_kernel(K: KernelEval, w, z, y) -> complex:
    """Covariance kernel of ``T_w(z) f(z)``."""
    return mobius(w, z) * K(z, y) * np.conj(mobius(w, y))


def conditioned_gram(K: KernelEval, w, zs, ys) -> np.ndarray:
    """Matrix form of :func:`conditioned_kernel` over point sets."""
    kww = K(w, w).real
    if not kww > 0:
        raise IllConditionedError(f"K(w, w) = {kww} is not positive")
    return K.gram(zs, ys) - K.gram(zs, [w]) @ K.gram([w], ys) / kww


def mobius_gram(K: KernelEval, w, zs, ys) -> np.ndarray:
    tz = mobius(w, _pts(zs))[:, None]
    ty = np.conj(mobius(w, _pts(ys)))[None, :]
    return tz * K.gram(zs, ys) * ty


def kernel_dz(K: KernelEval, z, w) -> complex:
    return K.dz(z, w)


def kernel_dzdwbar(K: KernelEval, z, w) -> complex:
    return K.dzdwbar(z, w)
