"""``gafzeros`` command line: sample, zeros, intensity, verify, experiment.

Exit codes: 0 success, 1 numerical or statistical failure, 2 usage error.
Options may also come from a flat ``key = value`` config file (``--config``);
flags given on the command line override it and unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import logging
import math
import re
import sys
from pathlib import Path

import numpy as np

from gafzeros import io
from gafzeros.experiments import (
    REPORT_COLUMNS,
    ExperimentConfig,
    report_rows,
    run_zero_count,
)
from gafzeros.gaf_zeros import TruncatedGAF, find_zeros, truncation_order
from gafzeros.intensity import bergman_determinant, joint_intensity_numeric
from gafzeros.kernels import make_kernel
from gafzeros.model import FAMILIES, MODES, DomainError, ModelSpec
from gafzeros.sampling import CoefficientSampler
from gafzeros.verify import SUITES, format_table, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# option name -> converter; config keys and long flags share these names
OPTIONS = {
    "model": str,
    "q": complex,
    "h": float,
    "mode": str,
    "n": int,
    "r": float,
    "eps": float,
    "seed": int,
    "replicate": int,
    "replicates": int,
    "out": str,
    "svg": str,
    "points": str,
    "suite": str,
    "edges": str,
    "threads": int,
    "series_n": int,
}

DEFAULTS = {
    "model": "iid",
    "q": 0.0,
    "h": 0.5,
    "mode": "inverse",
    "r": 0.6,
    "eps": 1e-12,
    "seed": 0,
    "replicate": 0,
    "suite": "all",
}


class UsageError(Exception):
    pass


def parse_config(path) -> dict:
    """Flat ``key = value`` file with ``#`` comments."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "N":
            key = "n"
        if key not in OPTIONS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _convert(key, value):
    if value is None:
        return None
    try:
        if OPTIONS[key] is complex and isinstance(value, str):
            return complex(value.replace(" ", ""))
        return OPTIONS[key](value)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (flags win)."""
    cfg = parse_config(args.config) if getattr(args, "config", None) else {}
    opts = {}
    for key in OPTIONS:
        flag = getattr(args, key, None)
        if flag is not None:
            opts[key] = _convert(key, flag)
        elif key in cfg:
            opts[key] = _convert(key, cfg[key])
        else:
            opts[key] = DEFAULTS.get(key)
    if opts["model"] not in FAMILIES:
        raise UsageError(f"model must be one of {', '.join(FAMILIES)}")
    if opts["mode"] not in MODES:
        raise UsageError(f"mode must be one of {', '.join(MODES)}")
    if opts["suite"] not in SUITES + ("all",):
        raise UsageError(f"suite must be one of {', '.join(SUITES + ('all',))}")
    return opts


def make_spec(opts) -> ModelSpec:
    q = opts["q"]
    if isinstance(q, complex) and q.imag == 0:
        q = q.real
    return ModelSpec(opts["model"], q=q, h=opts["h"], mode=opts["mode"])


def _spec_params(spec: ModelSpec) -> dict:
    p = {"model": spec.family}
    if spec.family in ("tridiag", "kms"):
        p["q"] = spec.q
    if spec.family == "fgn":
        p["h"] = spec.h
    p["mode"] = spec.mode
    return p


def parse_points(text: str) -> list[complex]:
    """``"re,im re,im ..."`` (whitespace or ';' separated pairs)."""
    pts = []
    for tok in text.replace(";", " ").split():
        parts = tok.split(",")
        if len(parts) != 2:
            raise UsageError(f"point {tok!r} is not a re,im pair")
        try:
            pts.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise UsageError(f"point {tok!r} is not a re,im pair") from None
    if not pts:
        raise UsageError("no points given")
    return pts


def _emit(text: str, out):
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_sample(opts) -> int:
    spec = make_spec(opts)
    n = opts["n"] or 30
    sampler = CoefficientSampler(spec, n)
    replicates = opts["replicates"] or 1
    rows = []
    for rep in range(replicates):
        d = sampler.draw(opts["seed"], rep)
        rows.extend((rep, i + 1, v.real, v.imag) for i, v in enumerate(d.values))
    params = {**_spec_params(spec), "n": n, "seed": opts["seed"], "replicates": replicates}
    _emit(io.csv_text(io.header_line("sample", params), ("replicate", "index", "re", "im"), rows), opts["out"])
    return EXIT_OK


def cmd_zeros(opts) -> int:
    spec = make_spec(opts)
    r = opts["r"]
    N = opts["n"] or truncation_order(spec, r, opts["eps"])
    d = CoefficientSampler(spec, N).draw(opts["seed"], opts["replicate"])
    zs = find_zeros(TruncatedGAF(d.values, spec), r)
    rows = [(z.real, z.imag, res) for z, res in zip(zs.zeros, zs.residuals)]
    params = {
        **_spec_params(spec),
        "r": r,
        "eps": opts["eps"],
        "N": N,
        "seed": opts["seed"],
        "replicate": opts["replicate"],
        "count": len(zs),
        "arg_check": {True: "ok", False: "mismatch", None: "skipped"}[zs.arg_ok],
    }
    _emit(io.csv_text(io.header_line("zeros", params), ("re", "im", "residual"), rows), opts["out"])
    if opts["svg"]:
        io.write_text(opts["svg"], io.zeros_svg([zs.zeros], r, spec.describe()))
    if zs.arg_ok is False:
        print(f"argument-principle count {zs.arg_count} != {len(zs)} listed zeros", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_intensity(opts) -> int:
    spec = make_spec(opts)
    if not opts["points"]:
        raise UsageError("intensity needs --points")
    pts = parse_points(opts["points"])
    K = make_kernel(spec, opts["series_n"])
    p_num = joint_intensity_numeric(K, pts)
    p_berg = bergman_determinant(pts)
    rel = abs(p_num / p_berg - 1.0) if p_berg != 0 else math.inf
    label = " ".join(f"{z.real:.17g},{z.imag:.17g}" for z in pts)
    params = {**_spec_params(spec), "kernel": getattr(K, "label", type(K).__name__).replace(" ", "")}
    text = io.csv_text(
        io.header_line("intensity", params),
        ("points", "numeric_p", "bergman_p", "rel_error"),
        [(label, p_num, p_berg, rel)],
    )
    _emit(text, opts["out"])
    return EXIT_OK


def cmd_verify(opts) -> int:
    results = run_suite(opts["suite"])
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"FAILED: {r.suite}: {r.name} ({r.value:.3e} > {r.tol:.0e})", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_experiment(opts) -> int:
    spec = make_spec(opts)
    edges = None
    if opts["edges"]:
        try:
            edges = tuple(float(x) for x in opts["edges"].replace(",", " ").split())
        except ValueError:
            raise UsageError(f"bad edges {opts['edges']!r}") from None
    replicates = opts["replicates"] or 2000
    cfg = ExperimentConfig(
        spec,
        r=opts["r"],
        eps=opts["eps"],
        replicates=replicates,
        seed=opts["seed"],
        edges=edges,
        out=opts["out"],
        svg=opts["svg"],
        threads=opts["threads"],
    )
    rep = run_zero_count(cfg)
    params = {
        **_spec_params(spec),
        "r": cfg.r,
        "eps": cfg.eps,
        "N": rep.N,
        "replicates": cfg.replicates,
        "seed": cfg.seed,
        "excluded": rep.excluded,
        "total_mean": io.fmt(rep.total_mean),
        "total_se": io.fmt(rep.total_se),
        "total_analytic": io.fmt(rep.total_analytic),
    }
    text = io.csv_text(io.header_line("experiment", params), REPORT_COLUMNS, report_rows(rep))
    _emit(text, cfg.out)
    if cfg.out:
        manifest = {
            **{k: v for k, v in params.items()},
            "edges": " ".join(io.fmt(e) for e in rep.edges),
            "total_z": io.fmt(rep.total_z),
            "arg_skipped": rep.arg_skipped,
            "arg_mismatch": rep.arg_mismatch,
            "runtime_s": f"{rep.runtime:.3f}",
            "passed": rep.passed,
        }
        io.write_text(str(cfg.out) + ".manifest.txt", io.manifest_text(manifest))
    if cfg.svg:
        io.write_text(cfg.svg, io.zeros_svg(rep.sample_zeros, cfg.r, spec.describe()))
    print(
        f"total zeros in |z|<={cfg.r}: mean {rep.total_mean:.5f} +- {rep.total_se:.5f}, "
        f"target {rep.total_analytic:.5f}, z = {rep.total_z:.2f}, excluded {rep.excluded}",
        file=sys.stderr,
    )
    return EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {
    "sample": cmd_sample,
    "zeros": cmd_zeros,
    "intensity": cmd_intensity,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--model", help="|".join(FAMILIES))
    common.add_argument("--q", help="tridiag/KMS parameter (KMS accepts complex, e.g. 0.3+0.4j)")
    common.add_argument("--h", help="fGn Hurst parameter in (0, 1)")
    common.add_argument("--mode", help="inverse (covariance G^-1) or direct (covariance G)")
    common.add_argument("--n", "--N", dest="n", help="coefficient count / truncation order")
    common.add_argument("--r", help="working radius")
    common.add_argument("--eps", help="truncation tail tolerance")
    common.add_argument("--seed", help="master seed")
    common.add_argument("--replicate", help="replicate index (zeros)")
    common.add_argument("--replicates", help="number of replicates")
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("--svg", help="SVG scatter output path")
    common.add_argument("--points", help="points as 're,im re,im ...'")
    common.add_argument("--suite", help="|".join(SUITES + ("all",)))
    common.add_argument("--edges", help="annulus radii, e.g. '0 0.2 0.4 0.6'")
    common.add_argument("--threads", help="worker threads (default GAFZEROS_THREADS or CPU count)")
    common.add_argument("--series-n", dest="series_n", help="series order for kernels without a closed form")
    p = argparse.ArgumentParser(prog="gafzeros", description="Zeros of Gaussian analytic functions with Toeplitz-correlated coefficients.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


_POINT = re.compile(r"^[-+]?[0-9.]+(e[-+]?[0-9]+)?,[-+]?[0-9.]+(e[-+]?[0-9]+)?$", re.IGNORECASE)


def _join_points(argv: list[str]) -> list[str]:
    # "--points 0.2,0 -0.1,0.3": argparse would read "-0.1,0.3" as a flag
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--points":
            j = i + 1
            while j < len(argv) and _POINT.match(argv[j]):
                j += 1
            out.append("--points=" + " ".join(argv[i + 1 : j]))
            i = j
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_join_points(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve(args)
        return COMMANDS[args.command](opts)
    except (UsageError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(f"gafzeros: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"gafzeros: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
