"""Spectral densities of the Toeplitz families and their Fourier coefficients.

The density ``phi`` of a family satisfies ``gamma(k) = int_0^1 e^{2 pi i k t}
phi(t) dt``. For fractional Gaussian noise it is

    phi_h(t) = 4 C(h) sin^2(pi t) (zeta(2h+1, t) + zeta(2h+1, 1-t))

with ``C(h) = -zeta(-2h) / (2 zeta(1+2h))``; it behaves like ``t^(1-2h)``
at the endpoints, so it vanishes there for h < 1/2 and blows up for h > 1/2.
Integrals against such densities use a graded Gauss-Legendre rule whose nodes
cluster algebraically at both endpoints.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from gafzeros.model import DomainError, ModelSpec

# Bernoulli numbers B_2, B_4, B_6, B_8 (Euler-Maclaurin order 4)
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)
_B10 = 5.0 / 66.0
_ZETA_TOL = 1e-14


def _em_cutoff(s: float, a_min: float) -> int:
    # smallest M with the first omitted Euler-Maclaurin term below tolerance
    poch = math.prod(s + i for i in range(9))
    coef = abs(_B10) / math.factorial(10) * poch
    x = (coef / _ZETA_TOL) ** (1.0 / (s + 9.0))
    return max(8, int(math.ceil(x - a_min)) + 1)


def hurwitz_zeta(s: float, a):
    """Hurwitz zeta ``sum_{n>=0} (n + a)^(-s)`` for ``s > 1``, ``a > 0``.

    Direct summation of the first M terms followed by an order-4
    Euler-Maclaurin tail; M is chosen so the first omitted correction is
    below 1e-14. Vectorised over ``a``.
    """
    s = float(s)
    if not s > 1:
        raise DomainError(f"hurwitz_zeta requires s > 1, got s={s}")
    a_arr = np.asarray(a, dtype=float)
    if np.any(~(a_arr > 0)):
        raise DomainError("hurwitz_zeta requires a > 0")
    scalar = a_arr.ndim == 0
    a_arr = np.atleast_1d(a_arr)
    M = _em_cutoff(s, float(a_arr.min()))
    n = np.arange(M, dtype=float)
    head = np.sum((a_arr[:, None] + n[None, :]) ** (-s), axis=1)
    x = a_arr + M
    tail = x ** (1.0 - s) / (s - 1.0) + 0.5 * x ** (-s)
    # sum_k B_2k/(2k)! * s(s+1)...(s+2k-2) * x^(-s-2k+1)
    poch = s
    for k, b in enumerate(_BERNOULLI, start=1):
        tail = tail + b / math.factorial(2 * k) * poch * x ** (-s - 2 * k + 1)
        poch *= (s + 2 * k - 1) * (s + 2 * k)
    out = head + tail
    return float(out[0]) if scalar else out


def riemann_zeta(s: float) -> float:
    return hurwitz_zeta(s, 1.0)


def zeta_negative(h: float) -> float:
    """``zeta(-2h)`` for ``h > 0`` from the functional equation.

    ``zeta(-2h) = -2 (2 pi)^(-2h-1) sin(pi h) Gamma(1+2h) zeta(1+2h)``, so only
    the convergent series ``zeta(1+2h)`` is ever summed.
    """
    s = 1.0 + 2.0 * h
    return -2.0 * (2.0 * math.pi) ** (-s) * math.sin(math.pi * h) * math.gamma(s) * riemann_zeta(s)


@lru_cache(maxsize=256)
def normalizing_C(h: float) -> float:
    """Normalising constant ``C(h) = -zeta(-2h) / (2 zeta(1+2h))`` of phi_h."""
    if not 0 < h < 1:
        raise DomainError(f"C(h) requires 0 < h < 1, got h={h}")
    return -zeta_negative(h) / (2.0 * riemann_zeta(1.0 + 2.0 * h))


def _fgn_density(h: float, t: np.ndarray, tc: np.ndarray) -> np.ndarray:
    # t and tc = 1 - t passed separately to keep precision at both ends
    # zeta(s, x) = x^-s + zeta(s, 1 + x); the x^-s parts are combined with
    # sin^2 as (sin(pi x)/x)^2 x^(2-s) so tiny x cannot overflow
    s = 2.0 * h + 1.0
    sin_t = np.sin(np.pi * t)
    sin_tc = np.sin(np.pi * tc)
    sin2 = np.sin(np.pi * np.minimum(t, tc)) ** 2
    head = (sin_t / t) ** 2 * t ** (2.0 - s) + (sin_tc / tc) ** 2 * tc ** (2.0 - s)
    rest = sin2 * (hurwitz_zeta(s, 1.0 + t) + hurwitz_zeta(s, 1.0 + tc))
    return 4.0 * normalizing_C(h) * (head + rest)


def _endpoint_value(spec: ModelSpec) -> float:
    if spec.h > 0.5:
        return math.inf
    if spec.h < 0.5:
        return 0.0
    return 1.0


def density_pair(spec: ModelSpec, t, tc) -> np.ndarray:
    """Density at ``t`` given also ``tc = 1 - t`` computed without cancellation."""
    t = np.asarray(t, dtype=float)
    tc = np.asarray(tc, dtype=float)
    fam = spec.family
    if fam == "iid":
        return np.ones_like(t)
    if fam == "tridiag":
        return 1.0 + 2.0 * spec.q * np.cos(2.0 * np.pi * t)
    if fam == "fgn0":
        small = np.minimum(t, tc)
        return 2.0 * np.sin(np.pi * small) ** 2
    if fam == "kms":
        q = complex(spec.q)
        return (1.0 - abs(q) ** 2) / np.abs(1.0 - q * np.exp(-2j * np.pi * t)) ** 2
    if fam == "fgn":
        out = np.empty(np.broadcast(t, tc).shape)
        t_b, tc_b = np.broadcast_arrays(t, tc)
        edge = (t_b <= 0) | (tc_b <= 0)
        out[edge] = _endpoint_value(spec)
        inner = ~edge
        if np.any(inner):
            out[inner] = _fgn_density(spec.h, t_b[inner], tc_b[inner])
        return out
    raise DomainError(f"unknown family {fam!r}")


def density(spec: ModelSpec, theta):
    """Spectral density phi(theta) of the family, theta taken modulo 1.

    For fGn the endpoints theta in {0, 1} return the one-sided limit:
    ``+inf`` for h > 1/2, ``0`` for h < 1/2.
    """
    theta = np.asarray(theta, dtype=float)
    t = np.mod(theta, 1.0)
    out = density_pair(spec, t, 1.0 - t)
    return float(out) if out.ndim == 0 else out


def _grading_power(spec: ModelSpec, inverse: bool) -> float:
    if spec.family != "fgn":
        return 2.0
    # integrand ~ t^e near the ends; make t^e dt smooth after t = u^p
    e = 2.0 * spec.h - 1.0 if inverse else 1.0 - 2.0 * spec.h
    return min(16.0, max(2.0, 6.0 / (e + 1.0)))


@lru_cache(maxsize=64)
def graded_rule(nodes: int, power: float, panels: int = 8):
    """Nodes ``t``, complements ``1 - t`` and weights on (0, 1).

    Composite Gauss-Legendre in ``u`` pushed through the map
    ``t = u^p / (u^p + (1-u)^p)``, whose Jacobian vanishes to order ``p - 1``
    at both ends. ``nodes`` is the total node count.
    """
    per = max(2, nodes // panels)
    x, w = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(0.0, 1.0, panels + 1)
    u = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    wu = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    p = power
    up = u**p
    vp = (1.0 - u) ** p
    den = up + vp
    t = up / den
    tc = vp / den
    # dt/du = p u^(p-1) (1-u)^(p-1) / den^2
    jac = p * (u * (1.0 - u)) ** (p - 1.0) / den**2
    return t, tc, wu * jac


def bochner_coefficient(spec: ModelSpec, k: int, nodes: int = 2048) -> complex:
    """``int_0^1 e^{2 pi i k t} phi(t) dt`` by graded quadrature."""
    t, tc, w = graded_rule(nodes, _grading_power(spec, inverse=False))
    phi = density_pair(spec, t, tc)
    val = np.sum(w * phi * np.exp(2j * np.pi * k * t))
    return val.real if spec.is_real else val


def inv_density_fourier(spec: ModelSpec, k: int, quadrature_nodes: int = 2048) -> complex:
    """``int_0^1 e^{-2 pi i k t} / phi(t) dt``, the asymptotic entry ``(j, j+k)`` of G^-1.

    With ``gamma(m) = int e^{2 pi i m t} phi`` and ``G_{kj} = gamma(k - j)`` the
    interior of ``G^-1`` has entry ``(k, j)`` close to this integral at
    ``j - k``; for real families the sign of ``k`` does not matter.

    Smooth positive densities use the periodic trapezoidal rule; fGn uses the
    graded rule because ``1/phi`` is singular or vanishing at the ends.

    Raises
    ------
    DomainError
        For ``fgn0``, whose reciprocal density ~ t^-2 is not integrable.
    """
    if spec.family == "fgn0":
        raise DomainError("1/phi is not integrable for the h = 0 limit (phi ~ t^2 at 0)")
    if spec.family == "fgn":
        t, tc, w = graded_rule(quadrature_nodes, _grading_power(spec, inverse=True))
        vals = w / density_pair(spec, t, tc)
    else:
        t = np.arange(quadrature_nodes) / quadrature_nodes
        vals = np.full(quadrature_nodes, 1.0 / quadrature_nodes) / density_pair(spec, t, 1.0 - t)
    val = np.sum(vals * np.exp(-2j * np.pi * k * t))
    return val.real if spec.is_real else val
