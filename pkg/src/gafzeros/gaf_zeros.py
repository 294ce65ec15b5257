"""Truncated GAF evaluation and zero finding inside a working disc."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from gafzeros.kernels import order_for_bound, series_order
from gafzeros.model import DomainError, ModelSpec

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps
CLUSTER_TOL = 1e-8
CONTOUR_CLEARANCE = 1e-4


class RootFindingError(RuntimeError):
    """Aberth iteration failed to converge."""


@dataclass(frozen=True)
class TruncatedGAF:
    """``f(z) = sum_{n=1}^N xi_n z^(n-1)``; ``coeffs[0]`` is the constant term."""

    coeffs: np.ndarray
    spec: ModelSpec | None = None

    @property
    def N(self) -> int:
        return len(self.coeffs)


@dataclass
class ZeroSet:
    zeros: np.ndarray
    residuals: np.ndarray
    r: float
    N: int
    multiplicities: np.ndarray
    all_roots: np.ndarray = field(repr=False)
    arg_count: int | None = None
    # None when the contour was too close to a root for the check to run
    arg_ok: bool | None = None
    iterations: int = 0

    def __len__(self) -> int:
        return int(np.sum(self.multiplicities))


def truncation_order(spec: ModelSpec | None, r: float, eps: float, B: float | None = None) -> int:
    """Smallest N with ``B r^(2N) / (1-r)^2 <= eps``.

    ``B`` defaults to the sup entry of the computed coefficient-covariance
    block for ``spec``.
    """
    if B is not None:
        return order_for_bound(r, eps, B)
    if spec is None:
        raise DomainError("need a spec or an explicit bound B")
    return series_order(spec, r, eps)


def _horner2(c: np.ndarray, z: np.ndarray):
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for a in c[::-1]:
        dp = dp * z + p
        p = p * z + a
    return p, dp


def eval_f(gaf: TruncatedGAF, z):
    z = np.asarray(z, dtype=complex)
    return _horner2(np.asarray(gaf.coeffs, dtype=complex), z)[0]


def eval_f_prime(gaf: TruncatedGAF, z):
    z = np.asarray(z, dtype=complex)
    return _horner2(np.asarray(gaf.coeffs, dtype=complex), z)[1]


def _newton_ratio(c: np.ndarray, z: np.ndarray):
    """``p(z) / p'(z)`` and a backward-error test, stable for ``|z| > 1``.

    Outside the unit circle the reversed polynomial ``q(w) = w^d p(1/w)`` is
    evaluated at ``w = 1/z`` and ``p/p' = z q / (d q - w q')``.
    """
    d = len(c) - 1
    ratio = np.empty_like(z)
    small = np.empty(z.shape, dtype=bool)
    inside = np.abs(z) <= 1.0
    ac = np.abs(c)
    if np.any(inside):
        zi = z[inside]
        p, dp = _horner2(c, zi)
        bound = _horner2(ac.astype(complex), np.abs(zi).astype(complex))[0].real
        ratio[inside] = p / dp
        small[inside] = np.abs(p) <= 16 * EPS * bound
    if np.any(~inside):
        zo = z[~inside]
        w = 1.0 / zo
        q, dq = _horner2(c[::-1], w)
        bound = _horner2(ac[::-1].astype(complex), np.abs(w).astype(complex))[0].real
        ratio[~inside] = zo * q / (d * q - w * dq)
        small[~inside] = np.abs(q) <= 16 * EPS * bound
    return ratio, small


def aberth(c: np.ndarray, maxiter: int = 500, seed_angle: float = 0.4):
    """All roots of ``sum_k c[k] z^k`` by Aberth-Ehrlich simultaneous iteration.

    Starting points lie on a circle whose radius is the geometric mean of the
    root moduli, ``|c_0/c_d|^(1/d)``, clipped to the Cauchy bound.
    """
    c = np.asarray(c, dtype=complex)
    d = len(c) - 1
    if d < 1:
        return np.empty(0, dtype=complex), 0
    cauchy = 1.0 + np.max(np.abs(c[:-1] / c[-1]))
    if c[0] == 0:
        rho = 1.0
    else:
        rho = abs(c[0] / c[-1]) ** (1.0 / d)
    rho = min(rho, 0.9 * cauchy)
    z = rho * np.exp(1j * (2.0 * np.pi * np.arange(d) / d + seed_angle))
    active = np.ones(d, dtype=bool)
    for it in range(1, maxiter + 1):
        idx = np.flatnonzero(active)
        ratio, small = _newton_ratio(c, z[idx])
        diff = z[idx, None] - z[None, :]
        diff[np.arange(len(idx)), idx] = np.inf
        s = np.sum(1.0 / diff, axis=1)
        step = ratio / (1.0 - ratio * s)
        step[small] = 0.0
        z[idx] = z[idx] - step
        done = small | (np.abs(step) <= 4 * EPS * np.abs(z[idx]))
        active[idx[done]] = False
        if not active.any():
            return z, it
    raise RootFindingError(
        f"Aberth did not converge in {maxiter} iterations: {int(active.sum())} of {d} roots unsettled"
    )


def _polish(c: np.ndarray, z: np.ndarray, steps: int = 3) -> np.ndarray:
    for _ in range(steps):
        p, dp = _horner2(c, z)
        ok = dp != 0
        znew = z.copy()
        znew[ok] = z[ok] - p[ok] / dp[ok]
        pn = _horner2(c, znew)[0]
        better = np.abs(pn) < np.abs(p)
        z = np.where(better, znew, z)
    return z


def _effective_coeffs(c: np.ndarray, rtol: float = 1e-14) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    scale = np.max(np.abs(c)) if len(c) else 0.0
    if scale == 0:
        return c[:1]
    last = len(c) - 1
    while last > 0 and abs(c[last]) <= rtol * scale:
        last -= 1
    return c[: last + 1]


def residual_scale(coeffs: np.ndarray, r: float) -> float:
    """``max_k |xi_k| r^(k-1)``: the scale residuals are measured against."""
    k = np.arange(len(coeffs))
    return float(np.max(np.abs(coeffs) * r**k))


def argument_principle_count(gaf: TruncatedGAF, r: float, kmin: int = 256, kmax: int = 1 << 18):
    """Winding number of ``f`` around ``|z| = r`` by trapezoidal ``f'/f``.

    Node count doubles until two successive estimates agree and round to the
    same integer. Returns ``(count, converged)``.
    """
    c = np.asarray(gaf.coeffs, dtype=complex)
    prev = None
    K = kmin
    while K <= kmax:
        z = r * np.exp(2j * np.pi * np.arange(K) / K)
        p, dp = _horner2(c, z)
        val = np.mean(z * dp / p)
        est = val.real
        if prev is not None and abs(est - prev) < 1e-3 and abs(est - round(est)) < 1e-2:
            return int(round(est)), True
        prev = est
        K *= 2
    return int(round(prev)), False


def find_zeros(gaf: TruncatedGAF, r: float, check_count: bool = True) -> ZeroSet:
    """Zeros of the truncated GAF in ``|z| <= r``.

    Roots come from Aberth-Ehrlich on the full polynomial followed by Newton
    polishing; roots closer than 1e-8 are merged with a multiplicity. When no
    root is within 1e-4 of the circle ``|z| = r`` the number kept is checked
    against the argument principle (``arg_ok``); otherwise the check is
    skipped and ``arg_ok`` is ``None``.
    """
    if not 0 < r < 1:
        raise DomainError(f"working radius must lie in (0, 1), got {r}")
    raw = np.asarray(gaf.coeffs, dtype=complex)
    c = _effective_coeffs(raw)
    roots, iters = aberth(c)
    roots = _polish(c, roots)
    keep = np.abs(roots) <= r
    inner = roots[keep]
    order = np.lexsort((inner.imag, inner.real, np.abs(inner)))
    inner = inner[order]
    zeros, mult = [], []
    for z0 in inner:
        for i, z1 in enumerate(zeros):
            if abs(z0 - z1) < CLUSTER_TOL:
                mult[i] += 1
                log.warning("merged clustered roots near %s", z1)
                break
        else:
            zeros.append(z0)
            mult.append(1)
    zeros = np.asarray(zeros, dtype=complex)
    mult = np.asarray(mult, dtype=int)
    res = np.abs(_horner2(c, zeros)[0]) if len(zeros) else np.empty(0)
    zs = ZeroSet(zeros, res, r, len(raw), mult, roots, iterations=iters)
    if check_count:
        clearance = np.min(np.abs(np.abs(roots) - r)) if len(roots) else math.inf
        if clearance > CONTOUR_CLEARANCE:
            count, conv = argument_principle_count(gaf, r)
            zs.arg_count = count
            zs.arg_ok = bool(conv and count == len(zs))
        else:
            log.info("root within %.1e of |z|=%g; count check skipped", clearance, r)
    return zs


def count_in_annuli(zs, edges) -> np.ndarray:
    """Number of zeros with modulus in each ``[e_i, e_{i+1})``; the last bin is closed."""
    edges = np.asarray(edges, dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise DomainError("annulus edges must be strictly increasing")
    if isinstance(zs, ZeroSet):
        mod = np.repeat(np.abs(zs.zeros), zs.multiplicities)
    else:
        mod = np.abs(np.asarray(zs, dtype=complex))
    counts, _ = np.histogram(mod, bins=edges)
    return counts


def hausdorff(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return math.inf
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def doubling_distance(coeffs, N: int, r: float) -> float:
    """Distance between the zeros in ``|z| <= r`` at orders ``N`` and ``len(coeffs)``.

    Each in-disc zero set is matched against all roots of the other
    polynomial, so a root that crosses ``|z| = r`` between the two orders
    is not counted as missing.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if not 1 <= N <= len(coeffs):
        raise DomainError(f"need 1 <= N <= {len(coeffs)}, got {N}")
    a = find_zeros(TruncatedGAF(coeffs[:N]), r, check_count=False)
    b = find_zeros(TruncatedGAF(coeffs), r, check_count=False)

    def directed(x, y):
        if len(x) == 0:
            return 0.0
        if len(y) == 0:
            return math.inf
        return float(np.abs(x[:, None] - y[None, :]).min(axis=1).max())

    return max(directed(a.zeros, b.all_roots), directed(b.zeros, a.all_roots))
