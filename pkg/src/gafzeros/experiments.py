"""Monte Carlo zero counts against the analytic one-point intensity.

Each replicate draws one coefficient vector from its own counter-based stream,
finds the zeros in ``|z| <= r`` and tallies them by annulus. Replicates run on
a thread pool but are reduced in replicate order, so results do not depend on
the worker count.
"""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from gafzeros.gaf_zeros import TruncatedGAF, count_in_annuli, find_zeros, truncation_order
from gafzeros.intensity import (
    counterexample_count_annulus,
    expected_count_annulus,
    one_point_intensity,
)
from gafzeros.kernels import make_kernel
from gafzeros.model import DomainError, ModelSpec
from gafzeros.sampling import CoefficientSampler

log = logging.getLogger(__name__)

MAX_RADIUS = 0.9
MIN_REPLICATES = 100
MAX_EXCLUDED_FRACTION = 0.01
Z_LIMIT = 3.0


def worker_count(threads: int | None = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("GAFZEROS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"GAFZEROS_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def default_edges(r: float, bins: int = 6) -> tuple:
    return tuple(float(x) for x in np.linspace(0.0, r, bins + 1))


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ModelSpec
    r: float = 0.6
    eps: float = 1e-12
    replicates: int = 2000
    seed: int = 0
    edges: tuple | None = None
    out: str | None = None
    svg: str | None = None
    svg_replicates: int = 20
    threads: int | None = None

    def __post_init__(self):
        if not 0 < self.r <= MAX_RADIUS:
            raise DomainError(f"r must lie in (0, {MAX_RADIUS}], got {self.r}")
        if self.replicates < MIN_REPLICATES:
            raise DomainError(f"need at least {MIN_REPLICATES} replicates, got {self.replicates}")
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        if self.edges is None:
            object.__setattr__(self, "edges", default_edges(self.r))
        e = np.asarray(self.edges, dtype=float)
        if len(e) < 2 or np.any(np.diff(e) <= 0):
            raise DomainError("annulus edges must be strictly increasing")
        if e[0] < 0 or e[-1] > self.r + 1e-15:
            raise DomainError(f"annulus edges must lie within [0, {self.r}]")


@dataclass
class ExperimentReport:
    config: ExperimentConfig | None
    N: int
    edges: np.ndarray
    emp_mean: np.ndarray
    emp_se: np.ndarray
    analytic: np.ndarray
    zscore: np.ndarray
    total_mean: float
    total_se: float
    total_analytic: float
    total_z: float
    n_used: int
    excluded: int = 0
    arg_skipped: int = 0
    arg_mismatch: int = 0
    runtime: float = 0.0
    sample_zeros: list = field(default_factory=list, repr=False)

    @property
    def n_replicates(self) -> int:
        return self.n_used + self.excluded

    @property
    def arg_ok_fraction(self) -> float:
        n = self.n_used
        return (n - self.arg_skipped - self.arg_mismatch) / n if n else 0.0

    @property
    def passed(self) -> bool:
        ok_excl = self.excluded <= MAX_EXCLUDED_FRACTION * self.n_replicates
        return bool(ok_excl and abs(self.total_z) < Z_LIMIT)


def _disc_integral(f, r0: float, r1: float, radial_nodes: int = 48, angular_nodes: int = 96) -> float:
    x, w = np.polynomial.legendre.leggauss(radial_nodes)
    s = 0.5 * (r1 - r0) * x + 0.5 * (r1 + r0)
    ws = 0.5 * (r1 - r0) * w
    theta = 2.0 * math.pi * np.arange(angular_nodes) / angular_nodes
    ring = np.array([np.mean(f(si * np.exp(1j * theta))) for si in s]) * 2.0 * math.pi
    return float(np.sum(ws * s * ring))


def annulus_target(spec: ModelSpec, r0: float, r1: float, N: int | None = None) -> float:
    """Expected zero count in ``r0 <= |z| < r1`` for ``spec``.

    Inverse-of-G models and i.i.d. coefficients follow the Bergman law. For
    direct-G tridiagonal coefficients the closed-form intensity is integrated
    numerically; other direct-G models integrate the one-point intensity of
    their series kernel.
    """
    if spec.mode == "inverse" or spec.family == "iid":
        return expected_count_annulus(r0, r1)
    if spec.family == "tridiag":
        return counterexample_count_annulus(spec.q, r0, r1)
    K = make_kernel(spec, N)

    def f(z):
        return np.array([one_point_intensity(K, zi) for zi in z])

    return _disc_integral(f, r0, r1)


def summarize(counts: np.ndarray, totals: np.ndarray, edges, analytic, total_analytic: float, N: int, config=None) -> ExperimentReport:
    """Means, standard errors and z-scores from per-replicate tallies.

    ``counts`` has one row per kept replicate and one column per annulus.
    With no replicates every mean is 0 and every standard error infinite.
    """
    edges = np.asarray(edges, dtype=float)
    analytic = np.asarray(analytic, dtype=float)
    counts = np.asarray(counts, dtype=float).reshape(-1, len(edges) - 1)
    totals = np.asarray(totals, dtype=float)
    M = counts.shape[0]
    if M == 0:
        nb = len(edges) - 1
        mean = np.zeros(nb)
        se = np.full(nb, np.inf)
        return ExperimentReport(config, N, edges, mean, se, analytic, np.zeros(nb), 0.0, math.inf, total_analytic, 0.0, 0)
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(M) if M > 1 else np.full(counts.shape[1], np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, (mean - analytic) / se, np.where(mean == analytic, 0.0, np.inf))
    tmean = float(totals.mean())
    tse = float(totals.std(ddof=1) / math.sqrt(M)) if M > 1 else math.inf
    tz = (tmean - total_analytic) / tse if tse > 0 else (0.0 if tmean == total_analytic else math.inf)
    return ExperimentReport(config, N, edges, mean, se, analytic, z, tmean, tse, total_analytic, float(tz), M)


def _one_replicate(sampler: CoefficientSampler, seed: int, rep: int, r: float, edges):
    try:
        draw = sampler.draw(seed, rep)
        zs = find_zeros(TruncatedGAF(draw.values, sampler.spec), r)
    except Exception as exc:  # noqa: BLE001 - any failure excludes the replicate
        log.warning("replicate %d excluded: %s", rep, exc)
        return None
    return count_in_annuli(zs, edges), len(zs), zs.arg_ok, zs.zeros


def run_zero_count(config: ExperimentConfig) -> ExperimentReport:
    """Zero counts per annulus over ``config.replicates`` replicates.

    Replicates whose root finding fails are excluded and counted; the report
    fails when more than 1% are excluded.
    """
    t0 = time.perf_counter()
    spec = config.spec
    r = config.r
    edges = np.asarray(config.edges, dtype=float)
    N = truncation_order(spec, r, config.eps)
    sampler = CoefficientSampler(spec, N)
    workers = worker_count(config.threads)

    def task(rep):
        return _one_replicate(sampler, config.seed, rep, r, edges)

    reps = range(config.replicates)
    if workers == 1:
        results = [task(i) for i in reps]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, reps))

    counts, totals, samples = [], [], []
    excluded = skipped = mismatch = 0
    for rep, res in enumerate(results):
        if res is None:
            excluded += 1
            continue
        c, total, arg_ok, zeros = res
        counts.append(c)
        totals.append(total)
        if arg_ok is None:
            skipped += 1
        elif not arg_ok:
            mismatch += 1
        if rep < config.svg_replicates:
            samples.append(zeros)

    analytic = np.array([annulus_target(spec, a, b, N) for a, b in zip(edges[:-1], edges[1:])])
    total_analytic = annulus_target(spec, 0.0, r, N)
    rep_ = summarize(np.array(counts), np.array(totals), edges, analytic, total_analytic, N, config)
    rep_.excluded = excluded
    rep_.arg_skipped = skipped
    rep_.arg_mismatch = mismatch
    rep_.sample_zeros = samples
    rep_.runtime = time.perf_counter() - t0
    return rep_


@dataclass(frozen=True)
class RadialRow:
    lo: float
    hi: float
    emp_density: float
    emp_se: float
    analytic_density: float
    ratio: float
    zscore: float


def empirical_radial_intensity(report: ExperimentReport) -> list[RadialRow]:
    """Per annulus: mean count over annulus area next to the analytic average intensity."""
    rows = []
    for i in range(len(report.edges) - 1):
        lo, hi = report.edges[i], report.edges[i + 1]
        area = math.pi * (hi * hi - lo * lo)
        emp = report.emp_mean[i] / area
        ana = report.analytic[i] / area
        ratio = emp / ana if ana > 0 else math.nan
        rows.append(RadialRow(lo, hi, emp, report.emp_se[i] / area, ana, ratio, float(report.zscore[i])))
    return rows


def report_rows(report: ExperimentReport):
    """Rows for the report CSV: annulus_lo, annulus_hi, emp_mean, emp_se, analytic, zscore."""
    e = report.edges
    return [
        (e[i], e[i + 1], report.emp_mean[i], report.emp_se[i], report.analytic[i], report.zscore[i])
        for i in range(len(e) - 1)
    ]


REPORT_COLUMNS = ("annulus_lo", "annulus_hi", "emp_mean", "emp_se", "analytic", "zscore")
