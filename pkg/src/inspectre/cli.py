"""Command-line front end.

Subcommands::

    inspectre estimate {entropy,coverage,support-size} INPUT
    inspectre bench {entropy,coverage}
    inspectre lowerbound {coverage,support-size,entropy}
    inspectre sensitivity {plugin,poly,sgt}

Every run writes its effective configuration as ``#`` comment lines before
the data. Exit codes: 0 success, 1 computation error, 2 usage error,
3 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import re
import secrets
import sys
from typing import Optional, Sequence

import numpy as np

from inspectre import bench, coverage, entropy, lowerbounds
from inspectre.approx import entropy_term
from inspectre.core import Histogram, build_histogram
from inspectre.errors import (
    ConfigurationError,
    IngestionError,
    InspectreError,
    SensitivityGuardError,
)
from inspectre.privacy import (
    SensitivityBound,
    additive_sensitivity,
    brute_sensitivity_oracle,
    privatize,
)

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3
SEED_ENV = "INSPECTRE_SEED"
ENTROPY_METHODS = {"plugin": "plug-in", "plug-in": "plug-in", "miller-madow": "miller-madow",
                   "mm": "miller-madow", "poly": "poly"}


class UsageError(Exception):
    """Flag combination rejected before any computation."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---- flag types ----

def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0 or math.isnan(v):
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _epsilon(text: str) -> float:
    try:
        return _positive_float(text)
    except argparse.ArgumentTypeError:
        raise argparse.ArgumentTypeError(
            f"epsilon must be > 0 (use --no-privacy for a non-private estimate), got {text}"
        )


def _epsilon_list(text: str) -> tuple:
    return tuple(_epsilon(part) for part in text.split(","))


def _open_unit(text: str) -> float:
    v = _positive_float(text)
    if not v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


_HORIZON = re.compile(r"^(?:(\d+(?:\.\d+)?)?n|(\d+))$")


def _horizon(text: str) -> tuple:
    """``--m`` accepts an integer or a multiple of the sample size like ``3n``."""
    match = _HORIZON.match(text.strip())
    if not match:
        raise argparse.ArgumentTypeError(f"expected an integer or a multiple like '2n', got {text!r}")
    if match.group(2) is not None:
        return ("abs", int(match.group(2)))
    factor = float(match.group(1)) if match.group(1) else 1.0
    if factor < 1:
        raise argparse.ArgumentTypeError("horizon multiple must be >= 1")
    return ("mult", factor)


def _resolve_horizon(spec: tuple, n: int) -> int:
    kind, v = spec
    return int(v) if kind == "abs" else int(round(v * n))


def _grid(text: str) -> tuple:
    """Comma-separated numbers and inclusive integer ranges ``a..b``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, _, hi = part.partition("..")
            try:
                a, b = int(lo), int(hi)
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            if b < a:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(a, b + 1))
        else:
            try:
                v = float(part)
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad grid value {part!r}")
            out.append(int(v) if v.is_integer() else v)
    if not out:
        raise argparse.ArgumentTypeError("grid is empty")
    return tuple(out)


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be a non-negative integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


# ---- parser ----

def _common(p: argparse.ArgumentParser, seed: bool = True):
    p.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    if seed:
        p.add_argument("--seed", type=_seed, default=None,
                       help=f"RNG seed (fallback: ${SEED_ENV}, then a fresh random seed)")


def _privacy(p: argparse.ArgumentParser, multi: bool = False):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--epsilon", type=_epsilon_list if multi else _epsilon, default=None)
    g.add_argument("--no-privacy", action="store_true", help="release the raw estimate")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="inspectre", description="Private estimation of distribution properties.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    est = sub.add_parser("estimate", help="estimate a property from a sample file")
    est.add_argument("kind", choices=("entropy", "coverage", "support-size"))
    est.add_argument("input", help="input path, '-' for stdin")
    est.add_argument("--format", choices=("tokens", "counts"), default="counts",
                     help="tokens: UTF-8 text, one word per occurrence; counts: name,count rows")
    _privacy(est)
    est.add_argument("--method", default="plugin", choices=sorted(ENTROPY_METHODS))
    est.add_argument("--k", type=_positive_int, default=None, help="alphabet size bound")
    est.add_argument("--m", type=_horizon, default=None, help="coverage horizon: integer or e.g. 2n")
    est.add_argument("--alpha", type=_open_unit, default=None)
    est.add_argument("--r-mode", choices=("theory", "empirical"), default="empirical")
    est.add_argument("--degree-mult", type=_positive_float, default=entropy.DEFAULT_DEGREE_MULTIPLIER)
    est.add_argument("--log-base", choices=("nats", "bits"), default="nats")
    est.add_argument("--unnormalized", action="store_true", help="report S_m instead of S_m/m")
    est.add_argument("--clamp", action="store_true", help="clamp private coverage to [0, k/m]")
    _common(est)

    b = sub.add_parser("bench", help="RMSE experiments on synthetic distributions")
    b.add_argument("kind", choices=("entropy", "coverage"))
    b.add_argument("--family", choices=bench.FAMILIES, default="uniform")
    b.add_argument("--k", type=_positive_int, default=None, help="default 1000 (entropy), 2000 (coverage)")
    b.add_argument("--n", type=_grid, default=None, help="entropy sample sizes, e.g. 1000,2000 or 1000..1005")
    b.add_argument("--t", type=_grid, default=None, help="coverage ratios m/n, default 1..10")
    _privacy(b, multi=True)
    b.add_argument("--iterations", type=_positive_int, default=None,
                   help="default 100 (entropy), 1000 (coverage)")
    b.add_argument("--degree-mult", type=_positive_float, default=entropy.DEFAULT_DEGREE_MULTIPLIER)
    b.add_argument("--r-mode", choices=("empirical",), default="empirical")
    b.add_argument("--zipf-s", type=_positive_float, default=0.5)
    b.add_argument("--beta", type=_positive_float, default=1.0)
    b.add_argument("--workers", type=_nonneg_int, default=1, help="worker threads, 0 for all cores")
    _common(b)

    lb = sub.add_parser("lowerbound", help="hard instance pairs and DP sample-size floors")
    lb.add_argument("property", choices=("coverage", "support-size", "entropy"))
    lb.add_argument("--k", type=_positive_int, default=None)
    lb.add_argument("--m", type=_positive_int, default=None)
    lb.add_argument("--alpha", type=_open_unit, required=True)
    lb.add_argument("--epsilon", type=_epsilon, default=1.0)
    _common(lb, seed=False)

    s = sub.add_parser("sensitivity", help="inspect estimator sensitivity")
    s.add_argument("estimator", choices=("plugin", "poly", "sgt"))
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--k", type=_positive_int, default=None)
    s.add_argument("--m", type=_horizon, default=None)
    s.add_argument("--t", type=float, default=None, help="sgt extrapolation ratio (m - n) / n")
    s.add_argument("--r", type=_positive_float, default=None, help="explicit Poisson mean for sgt")
    s.add_argument("--r-mode", choices=("theory", "empirical"), default="empirical")
    s.add_argument("--alpha", type=_open_unit, default=None)
    s.add_argument("--degree-mult", type=_positive_float, default=entropy.DEFAULT_DEGREE_MULTIPLIER)
    s.add_argument("--unnormalized", action="store_true")
    s.add_argument("--exhaustive", action="store_true", help="also enumerate all datasets (tiny n, k)")
    _common(s, seed=False)
    return parser


# ---- helpers ----

def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return _seed(env.strip())
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"${SEED_ENV}: {exc}")
    return secrets.randbits(63)


def _fmt(v) -> str:
    if v is None:
        return "nan"
    return format(float(v), ".17g")


def _config_lines(command: str, items: dict) -> list:
    lines = [f"inspectre {command}"]
    lines += [f"{key}={items[key]}" for key in items]
    return lines


def _emit(args, comments: Sequence[str], body: str):
    text = "".join(f"# {c}\n" for c in comments) + body
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)


def _read_input(path: str) -> bytes:
    try:
        if path == "-":
            return sys.stdin.buffer.read()
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load_histogram(args) -> Histogram:
    raw = _read_input(args.input)
    if args.format == "tokens":
        return bench.ingest_token_corpus(raw)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestionError(f"invalid UTF-8 at byte offset {exc.start}", offset=exc.start) from exc
    return bench.ingest_count_table(io.StringIO(text)).as_histogram()


def _require_privacy_choice(args):
    if args.epsilon is None and not args.no_privacy:
        raise UsageError("choose a privacy budget with --epsilon, or pass --no-privacy")


# ---- commands ----

def cmd_estimate(args) -> int:
    _require_privacy_choice(args)
    kind = args.kind
    method = ENTROPY_METHODS[args.method]
    if kind == "entropy" and method == "poly" and args.k is None:
        raise UsageError("--method poly needs --k")
    if kind == "entropy" and method == "miller-madow" and not args.no_privacy:
        raise UsageError("miller-madow has no private version; use plugin or poly")
    if kind == "support-size" and (args.k is None or args.alpha is None):
        raise UsageError("support-size needs --k and --alpha")
    if kind == "coverage" and args.m is None:
        raise UsageError("coverage needs --m")
    if kind == "coverage" and args.r_mode == "theory" and args.alpha is None:
        raise UsageError("--r-mode theory needs --alpha")
    if args.log_base == "bits" and kind != "entropy":
        raise UsageError("--log-base applies to entropy only")
    seed = _resolve_seed(args)
    eps = math.inf if args.no_privacy else args.epsilon
    hist = _load_histogram(args)
    if hist.n == 0:
        raise IngestionError("input contains no samples")
    rng = np.random.default_rng(seed)
    config = {"kind": kind, "input": args.input, "format": args.format, "epsilon": eps, "seed": seed,
              "n": hist.n, "distinct": hist.distinct}

    if kind == "entropy":
        config.update(method=method, log_base=args.log_base)
        if method == "poly":
            poly_cfg = entropy.build_poly_config(args.k, hist.n, args.degree_mult)
            config.update(k=args.k, degree=poly_cfg.degree, threshold=poly_cfg.threshold,
                          degree_mult=args.degree_mult)
            value = entropy.poly_entropy(hist, poly_cfg).value
            delta: Optional[SensitivityBound] = entropy.poly_sensitivity(poly_cfg)
        elif method == "plug-in":
            value = entropy.empirical_entropy(hist).value
            delta = entropy.empirical_entropy_sensitivity(hist.n) if hist.n >= 2 else None
        else:
            value = entropy.miller_madow(hist).value
            delta = None
        if delta is None and not args.no_privacy:
            raise UsageError("private entropy estimation needs at least 2 samples")
        out = privatize(value, delta if delta is not None else 0.0, eps, rng)
        unit = math.log(2) if args.log_base == "bits" else 1.0
        row = (out.value / unit, out.noise_scale / unit,
               None if delta is None else delta.delta / unit, eps)
    elif kind == "coverage":
        m = _resolve_horizon(args.m, hist.n)
        cfg = coverage.make_sgt_config(hist.n, m, args.r_mode, args.alpha)
        config.update(m=m, t=cfg.t, r=cfg.r, r_mode=cfg.r_mode.value, r_fallback=cfg.r_fallback,
                      normalized=not args.unnormalized)
        est = coverage.sgt_estimate(hist, cfg)
        normalized = not args.unnormalized
        value = est.normalized if normalized else est.value
        delta = coverage.sgt_sensitivity(cfg, normalized)
        out = privatize(value, delta, eps, rng)
        released = out.value
        if args.clamp:
            hi = (args.k if args.k is not None else m) / (m if normalized else 1)
            released = min(max(released, 0.0), hi)
            config.update(clamp_hi=hi)
        row = (released, out.noise_scale, delta.delta, eps)
    else:
        res = coverage.support_size_estimate(
            hist, args.k, args.alpha, None if args.no_privacy else eps, rng
        )
        config.update(k=args.k, alpha=args.alpha, m=res.m, branch=res.branch)
        scale = res.private.noise_scale if res.private is not None else 0.0
        row = (res.value, scale, res.sensitivity.delta, eps)

    body = "estimate,noise_scale,sensitivity,epsilon\n" + ",".join(_fmt(v) for v in row) + "\n"
    _emit(args, _config_lines("estimate", config), body)
    return EXIT_OK


def cmd_bench(args) -> int:
    kind = args.kind
    k = args.k if args.k is not None else (1000 if kind == "entropy" else 2000)
    iterations = args.iterations if args.iterations is not None else (100 if kind == "entropy" else 1000)
    if kind == "entropy" and args.t is not None:
        raise UsageError("--t applies to coverage benchmarks")
    if kind == "coverage" and args.n is not None:
        raise UsageError("--n applies to entropy benchmarks; coverage uses n = k/2")
    if kind == "entropy":
        grid = args.n if args.n is not None else (1000, 2000, 5000, 10000)
        if any(not float(x).is_integer() or x < 2 for x in grid):
            raise UsageError("--n values must be integers >= 2")
        names = bench.ENTROPY_ESTIMATORS
    else:
        grid = args.t if args.t is not None else tuple(range(1, 11))
        if any(x < 1 for x in grid):
            raise UsageError("--t values must be >= 1")
        names = bench.COVERAGE_ESTIMATORS
    if args.no_privacy:
        names = tuple(e for e in names if not e.startswith("private-"))
        epsilons = (1.0,)
    else:
        epsilons = args.epsilon if args.epsilon is not None else (1.0,)
    seed = _resolve_seed(args)
    spec = bench.SyntheticSpec(args.family, k, s=args.zipf_s, beta=args.beta, seed=seed)
    cfg = bench.ExperimentConfig(
        spec=spec, x_grid=grid, epsilons=epsilons, iterations=iterations, estimators=names,
        master_seed=seed, degree_multiplier=args.degree_mult, r_mode=args.r_mode,
    )
    workers = args.workers or (os.cpu_count() or 1)
    run = bench.run_entropy_experiment if kind == "entropy" else bench.run_coverage_experiment
    report = run(cfg, workers=workers)
    # Worker count is left out of the echo: it never changes the numbers.
    comments = [f"inspectre bench {kind}", f"seed={seed}",
                "config=" + json.dumps(cfg.describe(), sort_keys=True)]
    if args.output == "-":
        bench.emit_csv(report, sys.stdout, comments)
    else:
        bench.emit_csv(report, args.output, comments)
    return EXIT_OK


def cmd_lowerbound(args) -> int:
    prop = args.property
    if prop == "coverage":
        if args.m is None:
            raise UsageError("coverage lower bound needs --m")
        pair = lowerbounds.coverage_pair(args.m, args.alpha)
        config = {"m": args.m}
    else:
        if args.k is None:
            raise UsageError(f"{prop} lower bound needs --k")
        config = {"k": args.k}
        if prop == "support-size":
            pair = lowerbounds.supportsize_pair(args.k, args.alpha)
        else:
            eta = lowerbounds.entropy_eta(args.alpha, args.k)
            pair = lowerbounds.entropy_pair(args.k, eta)
            config["eta"] = eta
    config.update(property=prop, alpha=args.alpha, epsilon=args.epsilon)
    floor = lowerbounds.dp_sample_floor(pair, args.epsilon)
    body = "property,gap,tv,floor,epsilon\n" + ",".join(
        [prop, _fmt(pair.gap), _fmt(pair.tv), str(floor), _fmt(args.epsilon)]
    ) + "\n"
    _emit(args, _config_lines("lowerbound", config), body)
    return EXIT_OK


def _sgt_config(args):
    if args.m is not None and args.t is not None:
        raise UsageError("give either --m or --t, not both")
    if args.m is not None:
        m = _resolve_horizon(args.m, args.n)
    elif args.t is not None:
        if args.t < 0:
            raise UsageError("--t must be >= 0")
        m = int(round(args.n * (1 + args.t)))
    else:
        raise UsageError("sgt needs --m or --t")
    if args.r is None and args.r_mode == "theory" and args.alpha is None:
        raise UsageError("--r-mode theory needs --alpha")
    return coverage.make_sgt_config(args.n, m, args.r_mode, args.alpha, args.r)


def cmd_sensitivity(args) -> int:
    n, est = args.n, args.estimator
    rows = []
    config = {"estimator": est, "n": n}
    exhaustive_fn = None
    if est == "plugin":
        if n < 2:
            raise UsageError("plug-in sensitivity needs --n >= 2")
        rows.append(("analytic", entropy.empirical_entropy_sensitivity(n).delta))
        table = entropy_term(np.arange(n + 1) / n)
        rows.append(("table-scan", additive_sensitivity(table, n).delta))

        def exhaustive_fn(s):
            return entropy.empirical_entropy(s).value
    elif est == "poly":
        if args.k is None:
            raise UsageError("poly sensitivity needs --k")
        poly_cfg = entropy.build_poly_config(args.k, n, args.degree_mult)
        config.update(k=args.k, degree=poly_cfg.degree, threshold=poly_cfg.threshold)
        rows.append(("table-scan", entropy.poly_sensitivity(poly_cfg).delta))
        rows.append(("plugin-table-scan", additive_sensitivity(entropy_term(np.arange(n + 1) / n), n).delta))

        def exhaustive_fn(s):
            return entropy.poly_entropy(s, poly_cfg).value
    else:
        cfg = _sgt_config(args)
        normalized = not args.unnormalized
        config.update(m=cfg.m, t=cfg.t, r=cfg.r, r_fallback=cfg.r_fallback, normalized=normalized)
        rows.append(("analytic", coverage.sgt_sensitivity(cfg, normalized).delta))
        rows.append(("table-scan", coverage.sgt_table_sensitivity(cfg, normalized).delta))
        unit = cfg.m if normalized else 1

        def exhaustive_fn(s):
            return coverage.sgt_estimate(build_histogram(s), cfg).value / unit
    if args.exhaustive:
        k = args.k if args.k is not None else 3
        config["exhaustive_k"] = k
        rows.append(("exhaustive", brute_sensitivity_oracle(exhaustive_fn, n, k).delta))
    body = "bound,delta\n" + "".join(f"{name},{_fmt(v)}\n" for name, v in rows)
    _emit(args, _config_lines("sensitivity", config), body)
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "bench": cmd_bench,
    "lowerbound": cmd_lowerbound,
    "sensitivity": cmd_sensitivity,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"inspectre: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigurationError, SensitivityGuardError) as exc:
        print(f"inspectre: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IngestionError as exc:
        print(f"inspectre: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InspectreError, ArithmeticError, ValueError) as exc:
        print(f"inspectre: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
