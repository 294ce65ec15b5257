"""Complex Gaussian coefficient draws with covariance G_n^{-1} or G_n.

Random streams are counter based: replicate ``r`` of a run with master seed
``s`` always reads the Philox stream keyed by ``(s, r)``, so draws do not
depend on how replicates are scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from gafzeros.model import DomainError, ModelSpec
from gafzeros.toeplitz import build_finite, cholesky, invert_finite


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Generator for replicate ``replicate`` of master seed ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replicate),))
    return np.random.Generator(np.random.Philox(ss))


def sample_std_complex(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` i.i.d. standard complex normals (E|x|^2 = 1, E x^2 = 0), Box-Muller."""
    u = rng.random((2, n))
    radius = np.sqrt(-np.log1p(-u[0]))  # 1 - u in (0, 1]
    return radius * np.exp(2j * np.pi * u[1])


@dataclass(frozen=True)
class CoefficientDraw:
    spec: ModelSpec
    mode: str
    n: int
    values: np.ndarray = field(repr=False)
    replicate_id: int | None = None
    seed: int | None = None


class CoefficientSampler:
    """Pre-factors ``G_n = L L*`` once; each draw is one triangular solve.

    Inverse mode returns ``L^{-*} chi`` (covariance ``G_n^{-1}``); direct mode
    returns ``L chi`` (covariance ``G_n``).
    """

    def __init__(self, spec: ModelSpec, n: int):
        if n < 1:
            raise DomainError("n must be >= 1")
        self.spec = spec
        self.n = n
        self.L = cholesky(build_finite(spec, n)).L
        self._LH = np.conj(self.L.T)

    def transform(self, chi: np.ndarray) -> np.ndarray:
        if self.spec.mode == "direct":
            return self.L @ chi
        return sla.solve_triangular(self._LH, chi, lower=False)

    def draw(self, seed: int, replicate: int) -> CoefficientDraw:
        chi = sample_std_complex(replicate_rng(seed, replicate), self.n)
        return CoefficientDraw(self.spec, self.spec.mode, self.n, self.transform(chi), replicate, seed)

    def draw_rng(self, rng: np.random.Generator) -> CoefficientDraw:
        chi = sample_std_complex(rng, self.n)
        return CoefficientDraw(self.spec, self.spec.mode, self.n, self.transform(chi))


def _with_mode(spec: ModelSpec, mode: str) -> ModelSpec:
    if spec.mode == mode:
        return spec
    return ModelSpec(spec.family, spec.q, spec.h, mode)


def sample_inverse_cov(spec: ModelSpec, n: int, rng: np.random.Generator) -> CoefficientDraw:
    return CoefficientSampler(_with_mode(spec, "inverse"), n).draw_rng(rng)


def sample_direct_cov(spec: ModelSpec, n: int, rng: np.random.Generator) -> CoefficientDraw:
    return CoefficientSampler(_with_mode(spec, "direct"), n).draw_rng(rng)


def schur_conditional_cov(spec: ModelSpec, n: int, k: int) -> np.ndarray:
    """Covariance of ``(xi_{k+1}, ..., xi_n)`` given ``xi_1 = ... = xi_k = 0``.

    ``Sigma = G_n^{-1}``; the result is ``S22 - S21 S11^{-1} S12``.
    """
    if not 1 <= k < n:
        raise DomainError(f"need 1 <= k < n, got k={k}, n={n}")
    S = invert_finite(build_finite(spec, n))
    S11 = S[:k, :k]
    S12 = S[:k, k:]
    S21 = S[k:, :k]
    cf = sla.cho_factor(S11, lower=True)
    out = S[k:, k:] - S21 @ sla.cho_solve(cf, S12)
    return 0.5 * (out + np.conj(out.T))


def empirical_covariance(draws: np.ndarray):
    """Covariance ``E x x*`` and pseudo-covariance ``E x x^T`` of rows of ``draws``."""
    M = draws.shape[0]
    cov = draws.T @ np.conj(draws) / M
    pcov = draws.T @ draws / M
    return cov, pcov
