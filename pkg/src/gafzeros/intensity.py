"""Joint intensities of GAF zeros from the covariance kernel.

For a GAF with covariance kernel K, the n-point joint intensity of its zeros is

    p(z_1..z_n) = perm(C - B A^{-1} B*) / (pi^n det A)

with ``A = K(z_k, z_j)``, ``B = d_z K(z_k, z_j)``, ``C = d_z d_wbar K(z_k, z_j)``.
When the coefficients have covariance ``G^{-1}`` this equals the Bergman
determinant ``det(1 / (pi (1 - z_k conj(z_j))^2))``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from gafzeros.kernels import KernelEval, _pts
from gafzeros.model import DomainError, IllConditionedError

MAX_POINTS = 12
DET_RTOL = 1e-12
IMAG_TOL = 1e-10


def permanent(M) -> complex:
    """Permanent by Ryser's inclusion-exclusion formula.

    ``perm(M) = (-1)^n sum_S (-1)^|S| prod_i sum_{j in S} M_ij`` over column
    subsets S; vectorised over all ``2^n`` subsets, so ``n <= 12``.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if M.shape != (n, n):
        raise DomainError("permanent needs a square matrix")
    if n == 0:
        return 1.0 + 0j
    if n > MAX_POINTS:
        raise DomainError(f"permanent limited to n <= {MAX_POINTS}, got {n}")
    masks = np.arange(1, 1 << n)
    subsets = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    rowsums = M @ subsets.T  # (n, 2^n - 1)
    sizes = subsets.sum(axis=1)
    signs = np.where((n - sizes) % 2 == 0, 1.0, -1.0)
    return complex(np.sum(signs * np.prod(rowsums, axis=0)))


def permanent_bruteforce(M) -> complex:
    """Sum over all permutations; an oracle for small n."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        total += np.prod(M[np.arange(n), perm])
    return complex(total)


@dataclass(frozen=True)
class IntensityMatrices:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    points: np.ndarray


def build_intensity_matrices(K: KernelEval, points) -> IntensityMatrices:
    """``A = K(z_k, z_j)``, ``B = d_z K(z_k, z_j)``, ``C = d_z d_wbar K(z_k, z_j)``."""
    z = _pts(points)
    if np.any(np.abs(z) >= 1):
        raise DomainError("points must lie in the open unit disc")
    A = K.gram(z, z)
    B = K.gram(z, z, 1, 0)
    C = K.gram(z, z, 1, 1)
    return IntensityMatrices(A, B, C, z)


def _check_points(z: np.ndarray):
    n = len(z)
    if n < 1:
        raise DomainError("need at least one point")
    if n > MAX_POINTS:
        raise DomainError(f"at most {MAX_POINTS} points supported, got {n}")


def joint_intensity_numeric(K: KernelEval, points) -> float:
    """``perm(C - B A^{-1} B*) / (pi^n det A)`` for the kernel ``K``.

    Raises
    ------
    IllConditionedError
        When ``det A`` is below ``1e-12`` times the product of its diagonal,
        which happens as points coalesce.
    """
    z = _pts(points)
    _check_points(z)
    mats = build_intensity_matrices(K, z)
    A, B, C = mats.A, mats.B, mats.C
    n = len(z)
    detA = np.linalg.det(A).real
    scale = float(np.prod(np.real(np.diag(A))))
    if not detA > DET_RTOL * scale:
        raise IllConditionedError(
            f"det A = {detA:.3g} relative to diagonal product {scale:.3g}; separate the points"
        )
    S = C - B @ np.linalg.solve(A, np.conj(B.T))
    val = permanent(S) / (math.pi**n * detA)
    if abs(val.imag) > IMAG_TOL * max(1.0, abs(val.real)):
        raise AssertionError(f"intensity has imaginary part {val.imag:.3g}")
    return float(val.real)


def one_point_intensity(K: KernelEval, z) -> float:
    """``(C - |B|^2 / A) / (pi A)`` at a single point."""
    z = complex(z)
    a = K(z, z).real
    b = K.dz(z, z)
    c = K.dzdwbar(z, z).real
    return (c - abs(b) ** 2 / a) / (math.pi * a)


def bergman_determinant(points) -> float:
    """``det(1 / (pi (1 - z_k conj(z_j))^2))``."""
    z = _pts(points)
    _check_points(z)
    M = 1.0 / (math.pi * (1.0 - z[:, None] * np.conj(z)[None, :]) ** 2)
    return float(np.linalg.det(M).real)


def bergman_intensity(z):
    z = np.asarray(z, dtype=complex)
    return 1.0 / (math.pi * (1.0 - np.abs(z) ** 2) ** 2)


def counterexample_intensity(q: float, z):
    """One-point zero intensity when the coefficients have covariance G (tridiagonal q).

    ``1/(pi (1-|z|^2)^2) * (1 - q^2 (1-|z|^2)^2 / (1 + q z + q conj(z))^2)``;
    the denominator is real since ``q z + q conj(z) = 2 q Re z``.
    """
    z = np.asarray(z, dtype=complex)
    m = 1.0 - np.abs(z) ** 2
    den = 1.0 + 2.0 * q * z.real
    return 1.0 / (math.pi * m**2) * (1.0 - q**2 * m**2 / den**2)


def expected_count_disc(r: float) -> float:
    """Expected number of Bergman-DPP points in ``|z| < r``: ``r^2 / (1 - r^2)``."""
    if not 0 <= r < 1:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    return r * r / (1.0 - r * r)


def expected_count_annulus(r0: float, r1: float) -> float:
    return expected_count_disc(r1) - expected_count_disc(r0)


def counterexample_count_annulus(q: float, r0: float, r1: float, radial_nodes: int = 64, angular_nodes: int = 128) -> float:
    """Integral of the direct-G intensity over ``r0 <= |z| < r1``.

    Gauss-Legendre in the radius and the periodic trapezoidal rule in the
    angle; the integrand is smooth on the closed annulus for ``r1 < 1``.
    """
    if not 0 <= r0 < r1 < 1:
        raise DomainError(f"need 0 <= r0 < r1 < 1, got {r0}, {r1}")
    x, w = np.polynomial.legendre.leggauss(radial_nodes)
    s = 0.5 * (r1 - r0) * x + 0.5 * (r1 + r0)
    ws = 0.5 * (r1 - r0) * w
    theta = 2.0 * math.pi * np.arange(angular_nodes) / angular_nodes
    z = s[:, None] * np.exp(1j * theta)[None, :]
    ring = counterexample_intensity(q, z).mean(axis=1) * 2.0 * math.pi
    return float(np.sum(ws * s * ring))


def counterexample_count_disc(q: float, r: float, **kw) -> float:
    if r == 0:
        return 0.0
    return counterexample_count_annulus(q, 0.0, r, **kw)
