"""Self-checks of the numerical identities, grouped into named suites.

Each check compares two independently computed quantities and reports the
observed discrepancy next to its tolerance. ``run_suite`` returns the list of
results; the CLI prints them as a PASS/FAIL table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gafzeros import intensity as inten
from gafzeros import kernels as kn
from gafzeros import orthopoly as op
from gafzeros import spectral as sp
from gafzeros import toeplitz as tp
from gafzeros.model import ModelSpec
from gafzeros.sampling import schur_conditional_cov

SUITES = ("kernels", "schur", "orthopoly", "intensity", "spectral")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)


def disc_grid(radius: float, n: int) -> np.ndarray:
    """``n`` fixed points spread over the disc of the given radius."""
    k = np.arange(n)
    rad = radius * np.sqrt((k + 0.5) / n)
    ang = 2.0 * math.pi * k * 0.6180339887498949
    return rad * np.exp(1j * ang)


def random_tuples(rng: np.random.Generator, n: int, count: int, radius: float = 0.7, sep: float = 0.1):
    """``count`` tuples of ``n`` points, uniform in the disc, pairwise separated."""
    out = []
    while len(out) < count:
        u = rng.random(n)
        z = radius * np.sqrt(u) * np.exp(2j * math.pi * rng.random(n))
        if n > 1:
            d = np.abs(z[:, None] - z[None, :]) + np.eye(n) * 10
            if d.min() < sep:
                continue
        out.append(z)
    return out


CLOSED_SPECS = (
    ModelSpec("iid"),
    ModelSpec("tridiag", q=-1.0 / 3.0),
    ModelSpec("kms", q=0.5),
)


def mobius_identity_residual(K: kn.KernelEval, radius: float = 0.8, side: int = 5) -> float:
    """Max ``|K1 - K2|`` over a ``side^3`` grid of (z, y, w)."""
    pts = disc_grid(radius, side)
    worst = 0.0
    for w in pts:
        K1 = kn.conditioned_gram(K, w, pts, pts)
        K2 = kn.mobius_gram(K, w, pts, pts)
        worst = max(worst, float(np.max(np.abs(K1 - K2))))
    return worst


def _kernels():
    out = []
    pts = disc_grid(0.9, 12)
    series_specs = CLOSED_SPECS[1:] + (
        ModelSpec("kms", q=0.3 + 0.4j),
        ModelSpec("tridiag", q=-1.0 / 3.0, mode="direct"),
    )
    for spec in series_specs:
        Kc = kn.closed_kernel(spec)
        N = kn.series_order(spec, 0.9, 1e-14)
        Ks = kn.SeriesKernel(spec, N)
        err = 0.0
        for d in ((0, 0), (1, 0), (0, 1), (1, 1)):
            err = max(err, float(np.max(np.abs(Kc.gram(pts, pts, *d) - Ks.gram(pts, pts, *d)))))
        out.append(("closed form = series, values and derivatives: " + spec.describe(), err, 1e-8))
    for spec in CLOSED_SPECS:
        out.append(("conditioned = Mobius-conjugated kernel: " + spec.describe(), mobius_identity_residual(kn.closed_kernel(spec)), 1e-10))
    fgn = ModelSpec("fgn", h=0.75)
    out.append(("conditioned = Mobius-conjugated kernel: fgn(h=0.75) series N=1200", mobius_identity_residual(kn.SeriesKernel(fgn, 1200)), 1e-6))
    h = 1e-5
    zs = disc_grid(0.7, 8)
    for spec in CLOSED_SPECS[1:] + (fgn,):
        K = kn.make_kernel(spec)
        err = 0.0
        for z in zs:
            for w in zs[::3]:
                fd = (K(z + h, w) - K(z - h, w)) / (2 * h)
                err = max(err, abs(fd - K.dz(z, w)))
                fd2 = (K.dz(z, w + h) - K.dz(z, w - h)) / (2 * h)
                # d/dwbar along real w-direction: d/dRe(w) of an antiholomorphic function equals d/dwbar
                err = max(err, abs(fd2 - K.dzdwbar(z, w)))
        out.append(("derivatives = central differences: " + spec.describe(), err, 1e-5))
    for spec in CLOSED_SPECS + (fgn,):
        K = kn.make_kernel(spec)
        A = K.gram(pts[:8], pts[:8])
        herm = float(np.max(np.abs(A - np.conj(A.T))))
        eig = float(np.linalg.eigvalsh(0.5 * (A + np.conj(A.T))).min())
        out.append(("hermitian and PSD Gram: " + spec.describe(), max(herm, max(0.0, -eig)), 1e-9))
    q = -1.0 / 3.0
    zz = disc_grid(0.9, 10)
    lhs = kn.kg_closed_tridiag(q, zz[:, None], zz[None, :])
    rhs = kn.psi_tridiag(q, zz[:, None]) * kn.szego(zz[:, None], zz[None, :]) * np.conj(kn.psi_tridiag(q, zz[None, :]))
    out.append(("tridiag kernel = psi * Szego * conj(psi)", float(np.max(np.abs(lhs - rhs))), 1e-15))
    out.append(("tridiag kernel at origin = corner entry of inverse", abs(kn.kg_closed_tridiag(q, 0, 0) - tp.tridiag_infinite_inverse_entry(q, 1, 1)), 1e-12))
    return out


ALL_SPECS = CLOSED_SPECS + (
    ModelSpec("kms", q=0.3 + 0.4j),
    ModelSpec("fgn", h=0.25),
    ModelSpec("fgn", h=0.75),
    ModelSpec("fgn0"),
)


def _schur():
    out = []
    for spec in ALL_SPECS:
        err = 0.0
        for n in range(2, 33):
            for k in range(1, n):
                S = schur_conditional_cov(spec, n, k)
                err = max(err, float(np.max(np.abs(S - tp.invert_finite(tp.build_finite(spec, n - k))))))
        out.append(("conditional covariance = inverse of shorter block: " + spec.describe(), err, 1e-10))
    for spec in ALL_SPECS:
        T = tp.build_finite(spec, 200)
        d = float(np.max(np.abs(tp.invert_finite(T, "trench") - tp.invert_finite(T, "cholesky"))))
        out.append(("Trench inverse = Cholesky inverse, n=200: " + spec.describe(), d, 1e-8))
    err = 0.0
    for q in (0.1, -0.1, 0.3, -0.3, -1.0 / 3.0):
        for n in (2, 5, 20, 100):
            G = tp.build_finite(ModelSpec("tridiag", q=q), n).matrix
            err = max(err, float(np.max(np.abs(tp.tridiag_inverse_matrix(q, n) - np.linalg.inv(G)))))
    out.append(("tridiag Chebyshev inverse = numeric inverse", err, 1e-8))
    err = 0.0
    for q in (0.5, -0.7, 0.3 + 0.4j):
        Ginv = tp.invert_finite(tp.build_finite(ModelSpec("kms", q=q), 200))
        for k in range(10, 191, 9):
            for j in range(max(10, k - 3), min(190, k + 3) + 1):
                err = max(err, abs(Ginv[k - 1, j - 1] - tp.kms_inverse_entry(q, k, j)))
    out.append(("KMS infinite inverse = interior of numeric inverse", err, 1e-6))
    err = 0.0
    for spec in ALL_SPECS:
        for n in (1, 7, 64):
            T = tp.build_finite(spec, n)
            L = tp.cholesky(T).L
            err = max(err, float(np.max(np.abs(L @ np.conj(L.T) - T.matrix))))
    out.append(("Cholesky round trip, n <= 64", err, 1e-10))
    return out


def _orthopoly():
    out = []
    for spec in ALL_SPECS:
        m = 200
        b = op.gram_basis(spec, m)
        G = tp.build_finite(spec, m).matrix
        err = float(np.max(np.abs(b.coeffs @ G @ np.conj(b.coeffs.T) - np.eye(m))))
        out.append((f"orthonormality coeffs G coeffs* = I, m={m}: " + spec.describe(), err, 1e-8))
    pts = disc_grid(0.7, 9)
    for spec in (ModelSpec("tridiag", q=-1.0 / 3.0), ModelSpec("tridiag", q=0.3), ModelSpec("kms", q=0.5)):
        b = op.gram_basis(spec, 200)
        K = kn.closed_kernel(spec)
        err = max(abs(op.kernel_partial_sum(b, 200, z, w) - K(z, w)) for z in pts for w in pts)
        out.append(("partial sums m=200 = closed kernel: " + spec.describe(), err, 1e-6))
    b = op.gram_basis(ModelSpec("fgn0"), 10)
    err = max(abs(op.eval_P(b, k, z) - op.fgn0_P(k, z)) for k in range(1, 11) for z in pts)
    out.append(("Cholesky basis = explicit h=0 polynomials", float(err), 1e-10))
    for spec in (ModelSpec("tridiag", q=-1.0 / 3.0), ModelSpec("fgn", h=0.3)):
        d = float(np.max(np.abs(op.mgs_basis(spec, 30) - op.gram_basis(spec, 30).coeffs)))
        out.append(("Cholesky basis = Gram-Schmidt basis: " + spec.describe(), d, 1e-10))
    return out


def _intensity():
    out = []
    rng = np.random.default_rng(20240601)
    specs = [(s, kn.closed_kernel(s), 1e-6) for s in CLOSED_SPECS]
    fgn = ModelSpec("fgn", h=0.75)
    specs.append((fgn, kn.SeriesKernel(fgn, 300), 1e-4))
    for spec, K, tol in specs:
        err = 0.0
        for n in (1, 2, 3):
            for z in random_tuples(rng, n, 5):
                num = inten.joint_intensity_numeric(K, z)
                ref = inten.bergman_determinant(z)
                err = max(err, abs(num / ref - 1.0))
        out.append(("joint intensity = Bergman determinant: " + spec.describe(), err, tol))
    q = -1.0 / 3.0
    D = kn.DirectTridiagKernel(q)
    pts = disc_grid(0.9, 50)
    err = max(abs(inten.joint_intensity_numeric(D, [z]) / inten.counterexample_intensity(q, z) - 1.0) for z in pts)
    out.append(("direct-G intensity = closed formula", float(err), 1e-8))
    ratio = inten.joint_intensity_numeric(D, [0.0]) / inten.bergman_determinant([0.0])
    out.append(("direct-G / Bergman at 0 = 1 - q^2", abs(ratio - (1 - q * q)), 1e-8))
    err = 0.0
    for n in range(1, 7):
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        ref = inten.permanent_bruteforce(M)
        err = max(err, abs(inten.permanent(M) - ref) / max(1.0, abs(ref)))
    out.append(("Ryser permanent = permutation sum, n <= 6", err, 1e-10))
    return out


def _spectral():
    out = []
    half = ModelSpec("fgn", h=0.5)
    theta = (np.arange(1000) + 0.5) / 1000
    out.append(("fGn density at h=1/2 is 1", float(np.max(np.abs(sp.density(half, theta) - 1.0))), 1e-8))
    out.append(("C(1/2) = 1/(4 pi^2)", abs(sp.normalizing_C(0.5) - 1.0 / (4 * math.pi**2)), 1e-10))
    for spec in ALL_SPECS + (ModelSpec("fgn", h=0.5), ModelSpec("fgn", h=0.9)):
        err = max(abs(sp.bochner_coefficient(spec, k) - tp.gamma_of(spec, k)) for k in range(-10, 11))
        out.append(("Fourier coefficients of density = autocovariance: " + spec.describe(), float(err), 1e-7))
    return out


_RUNNERS = {
    "kernels": _kernels,
    "schur": _schur,
    "orthopoly": _orthopoly,
    "intensity": _intensity,
    "spectral": _spectral,
}


def run_suite(name: str) -> list[CheckResult]:
    names = SUITES if name == "all" else (name,)
    results = []
    for s in names:
        for label, value, tol in _RUNNERS[s]():
            results.append(CheckResult(s, label, float(value), tol))
    return results


def format_table(results) -> str:
    width = max(len(r.name) for r in results) if results else 10
    lines = [f"{'suite':<10} {'check':<{width}} {'value':>10} {'tol':>8}  result"]
    for r in results:
        lines.append(
            f"{r.suite:<10} {r.name:<{width}} {r.value:>10.2e} {r.tol:>8.0e}  {'PASS' if r.passed else 'FAIL'}"
        )
    return "\n".join(lines)
