"""Benchmark harness: synthetic distributions, RMSE experiments, real-data ingestion.

Experiments are pure functions of their :class:`ExperimentConfig`. Every
random stream is derived from ``(master_seed, stream kind, x, iteration,
...)`` through :class:`numpy.random.SeedSequence`, so results do not depend
on how iterations are scheduled across worker threads. Within one
``(x, iteration)`` cell all estimators see the same sample; only the
Laplace noise streams differ per estimator and epsilon.
"""

from __future__ import annotations

import csv
import io
import math
import re
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from inspectre.core import (
    DiscreteDistribution,
    Histogram,
    RngLike,
    SampleSet,
    as_generator,
    exact_entropy,
    exact_support_coverage,
    sample_histogram,
)
from inspectre.coverage import RMode, make_sgt_config, sgt_estimate, sgt_sensitivity
from inspectre.entropy import (
    build_poly_config,
    empirical_entropy,
    empirical_entropy_sensitivity,
    miller_madow,
    poly_entropy,
    poly_sensitivity,
)
from inspectre.errors import ConfigurationError, IngestionError
from inspectre.privacy import laplace_noise

FAMILIES = ("uniform", "two-step", "zipf", "dirichlet")
ENTROPY_ESTIMATORS = ("plug-in", "miller-madow", "poly", "private-plug-in", "private-poly")
COVERAGE_ESTIMATORS = ("sgt", "private-sgt")
CSV_HEADER = ("estimator", "x", "rmse", "trials", "epsilon", "seed")

_SAMPLE_STREAM = 1
_NOISE_STREAM = 2
_DIRICHLET_STREAM = 3


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a synthetic test distribution over ``k`` symbols.

    ``two-step`` gives ``step_mass`` of the probability to the first
    ``round(step_fraction * k)`` symbols and the rest to the others, each
    block uniform. ``dirichlet`` is a single draw from the symmetric
    Dirichlet(``beta``) prior, seeded by ``seed``.
    """

    family: str
    k: int
    s: float = 0.5
    beta: float = 1.0
    seed: int = 0
    step_fraction: float = 0.5
    step_mass: float = 0.25

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.k < 2:
            raise ConfigurationError("k must be >= 2")
        if not self.s > 0 or not self.beta > 0:
            raise ConfigurationError("zipf exponent and dirichlet concentration must be > 0")
        if not 0 < self.step_fraction < 1 or not 0 < self.step_mass < 1:
            raise ConfigurationError("step fraction and mass must lie in (0, 1)")


def make_distribution(spec: SyntheticSpec) -> DiscreteDistribution:
    k = spec.k
    if spec.family == "uniform":
        return DiscreteDistribution.uniform(k)
    if spec.family == "two-step":
        low = min(max(round(spec.step_fraction * k), 1), k - 1)
        p = np.empty(k)
        p[:low] = spec.step_mass / low
        p[low:] = (1 - spec.step_mass) / (k - low)
        return DiscreteDistribution(p)
    if spec.family == "zipf":
        w = np.arange(1, k + 1, dtype=np.float64) ** -spec.s
        return DiscreteDistribution(w / w.sum())
    rng = np.random.default_rng([spec.seed, _DIRICHLET_STREAM])
    p = rng.dirichlet(np.full(k, spec.beta))
    return DiscreteDistribution(p / p.sum())


@dataclass(frozen=True)
class ExperimentConfig:
    """One RMSE experiment.

    ``x_grid`` holds sample sizes for entropy experiments and extrapolation
    ratios ``t`` (with ``m = n t``, ``n = k // 2``) for coverage experiments.
    """

    spec: SyntheticSpec
    x_grid: tuple
    epsilons: tuple = (1.0,)
    iterations: int = 100
    estimators: tuple = ENTROPY_ESTIMATORS
    master_seed: int = 0
    degree_multiplier: float = 1.2
    r_mode: str = "empirical"

    def __post_init__(self):
        object.__setattr__(self, "x_grid", tuple(self.x_grid))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.iterations < 1:
            raise ConfigurationError("iterations must be >= 1")
        if not self.x_grid:
            raise ConfigurationError("x grid must be non-empty")
        if not self.estimators:
            raise ConfigurationError("no estimators selected")
        if any(not e > 0 for e in self.epsilons):
            raise ConfigurationError("every epsilon must be > 0")

    def describe(self) -> dict:
        d = asdict(self)
        d["spec"] = asdict(self.spec)
        return d


@dataclass(frozen=True)
class RmseRow:
    estimator: str
    x: float
    rmse: float
    trials: int
    epsilon: float = math.inf


@dataclass(frozen=True)
class RmseReport:
    rows: tuple
    seed: int
    config: dict = field(default_factory=dict, compare=False)


def _tag_word(tag: str) -> int:
    return zlib.crc32(tag.encode())


def _stream(master_seed: int, *words: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, words)]))


def _x_word(x: float) -> int:
    # Stable integer key for grid values that may be fractional.
    return int(round(float(x) * 1_000_000))


def _run_cells(fn, cells, workers: int):
    if workers <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def _private_tags(cfg: ExperimentConfig, base: str):
    return [(f"private-{base}", e) for e in cfg.epsilons] if f"private-{base}" in cfg.estimators else []


def _assemble(cfg, errors_by_x, keys) -> RmseReport:
    rows = []
    for x, errs in errors_by_x:
        for key in keys:
            tag, eps = key
            e = np.asarray(errs[key])
            rows.append(
                RmseRow(tag, float(x), float(np.sqrt(np.mean(e * e))), int(e.size), float(eps))
            )
    return RmseReport(tuple(rows), cfg.master_seed, cfg.describe())


def run_entropy_experiment(
    cfg: ExperimentConfig,
    workers: int = 1,
    distribution: Optional[DiscreteDistribution] = None,
) -> RmseReport:
    """RMSE of each entropy estimator against the true entropy, per sample size.

    ``distribution`` replaces the synthetic family of ``cfg.spec``; its
    length must equal ``cfg.spec.k``.
    """
    unknown = set(cfg.estimators) - set(ENTROPY_ESTIMATORS)
    if unknown:
        raise ConfigurationError(f"unknown entropy estimators {sorted(unknown)}")
    dist = make_distribution(cfg.spec) if distribution is None else distribution
    k = cfg.spec.k
    if dist.k != k:
        raise ConfigurationError(f"distribution has {dist.k} symbols but the synthetic family has k={k}")
    truth = exact_entropy(dist)
    keys = [(t, math.inf) for t in ("plug-in", "miller-madow", "poly") if t in cfg.estimators]
    priv = _private_tags(cfg, "plug-in") + _private_tags(cfg, "poly")
    keys += priv
    need_poly = any(t in cfg.estimators for t in ("poly", "private-poly"))
    out = []
    for x in cfg.x_grid:
        n = int(x)
        if n < 2:
            raise ConfigurationError("entropy experiments need n >= 2")
        poly_cfg = build_poly_config(k, n, cfg.degree_multiplier) if need_poly else None
        delta = {
            "private-plug-in": empirical_entropy_sensitivity(n).delta,
            "private-poly": poly_sensitivity(poly_cfg).delta if need_poly else 0.0,
        }

        def cell(it, n=n, poly_cfg=poly_cfg, delta=delta):
            hist = sample_histogram(dist, n, _stream(cfg.master_seed, _SAMPLE_STREAM, n, it))
            raw = {}
            plug = empirical_entropy(hist).value
            raw["plug-in"] = raw["private-plug-in"] = plug
            if "miller-madow" in cfg.estimators:
                raw["miller-madow"] = miller_madow(hist).value
            if poly_cfg is not None:
                raw["poly"] = raw["private-poly"] = poly_entropy(hist, poly_cfg).value
            res = {}
            for key in keys:
                tag, eps = key
                v = raw[tag]
                if tag.startswith("private-") and delta[tag] > 0:
                    g = _stream(cfg.master_seed, _NOISE_STREAM, n, _tag_word(tag), _x_word(eps), it)
                    v += laplace_noise(delta[tag] / eps, g)
                res[key] = v - truth
            return res

        cells = _run_cells(cell, range(cfg.iterations), workers)
        out.append((n, {key: [c[key] for c in cells] for key in keys}))
    return _assemble(cfg, out, keys)


def run_coverage_experiment(cfg: ExperimentConfig, workers: int = 1) -> RmseReport:
    """Normalized RMSE of SGT and private SGT with ``n = k // 2`` and ``m = n t``."""
    unknown = set(cfg.estimators) - set(COVERAGE_ESTIMATORS)
    if unknown:
        raise ConfigurationError(f"unknown coverage estimators {sorted(unknown)}")
    dist = make_distribution(cfg.spec)
    n = cfg.spec.k // 2
    keys = [("sgt", math.inf)] if "sgt" in cfg.estimators else []
    keys += _private_tags(cfg, "sgt")
    out = []
    for t in cfg.x_grid:
        if not t >= 1:
            raise ConfigurationError("coverage grid values t must be >= 1")
        m = int(round(n * t))
        sgt_cfg = make_sgt_config(n, m, RMode(cfg.r_mode))
        truth = exact_support_coverage(dist, m) / m
        scale_unit = sgt_sensitivity(sgt_cfg).delta

        def cell(it, t=t, sgt_cfg=sgt_cfg, truth=truth, scale_unit=scale_unit):
            hist = sample_histogram(
                dist, n, _stream(cfg.master_seed, _SAMPLE_STREAM, _x_word(t), it)
            )
            est = sgt_estimate(hist, sgt_cfg).normalized
            res = {}
            for key in keys:
                tag, eps = key
                v = est
                if tag == "private-sgt":
                    g = _stream(
                        cfg.master_seed, _NOISE_STREAM, _x_word(t), _tag_word(tag), _x_word(eps), it
                    )
                    v += laplace_noise(scale_unit / eps, g)
                res[key] = v - truth
            return res

        cells = _run_cells(cell, range(cfg.iterations), workers)
        out.append((t, {key: [c[key] for c in cells] for key in keys}))
    return _assemble(cfg, out, keys)


_TOKEN = re.compile(r"[^\W_]+")


def ingest_token_corpus(data: Union[bytes, str, IO]) -> Histogram:
    """Word histogram of a UTF-8 text: lowercased alphanumeric runs, interned by first use."""
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IngestionError(
                f"invalid UTF-8 at byte offset {exc.start}", offset=exc.start
            ) from exc
    else:
        text = data
    counts: dict = {}
    for tok in _TOKEN.findall(text.lower()):
        counts[tok] = counts.get(tok, 0) + 1
    return Histogram.from_mapping(counts)


@dataclass(frozen=True, eq=False)
class Population:
    """A named-count table standing for ``m_total`` individuals.

    ``cumulative[i]`` is the number of individuals with names ``0..i``;
    the individuals themselves are never materialized.
    """

    names: tuple
    counts: np.ndarray
    cumulative: np.ndarray

    @property
    def m_total(self) -> int:
        return int(self.cumulative[-1]) if self.cumulative.size else 0

    def as_histogram(self) -> Histogram:
        return Histogram(np.arange(len(self.names)), self.counts, labels=self.names)


def _is_int(s: str) -> bool:
    try:
        int(s)
    except ValueError:
        return False
    return True


def ingest_count_table(source: Union[str, IO, Iterable]) -> Population:
    """Parse ``name,count`` rows; a non-numeric count in the first row marks a header.

    ``source`` is CSV text, a text stream, or an iterable of ``(name, count)``
    pairs. Duplicate names are merged by summing their counts.
    """
    if isinstance(source, str):
        rows = csv.reader(io.StringIO(source))
    elif hasattr(source, "read"):
        rows = csv.reader(source)
    else:
        rows = source
    merged: dict = {}
    for lineno, row in enumerate(rows, start=1):
        row = list(row)
        if not row or (len(row) == 1 and not str(row[0]).strip()):
            continue
        if len(row) != 2:
            raise IngestionError(f"line {lineno}: expected 2 fields, got {len(row)}", line=lineno)
        name, count = str(row[0]).strip(), str(row[1]).strip()
        if lineno == 1 and not _is_int(count):
            continue
        if not _is_int(count) or int(count) < 1:
            raise IngestionError(f"line {lineno}: count must be a positive integer", line=lineno)
        merged[name] = merged.get(name, 0) + int(count)
    counts = np.array(list(merged.values()), dtype=np.int64)
    return Population(tuple(merged), counts, np.cumsum(counts))


def subsample_without_replacement(pop: Population, n: int, seed: RngLike = None) -> SampleSet:
    """Draw ``n`` distinct individuals uniformly; their names form the sample."""
    if not 0 <= n <= pop.m_total:
        raise ConfigurationError(f"cannot draw {n} of {pop.m_total} individuals")
    rng = as_generator(seed)
    who = rng.choice(pop.m_total, size=n, replace=False, shuffle=True)
    ids = np.searchsorted(pop.cumulative, who, side="right")
    return SampleSet(ids, labels=pop.names)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def emit_csv(
    report: RmseReport,
    destination: Union[str, Path, IO],
    comments: Sequence[str] = (),
) -> None:
    """Write the report as CSV with LF line endings and 17 significant digits.

    ``comments`` are written first, each prefixed with ``# ``.
    """
    close = False
    if isinstance(destination, (str, Path)):
        destination = open(destination, "w", newline="", encoding="utf-8")
        close = True
    try:
        for c in comments:
            destination.write(f"# {c}\n")
        w = csv.writer(destination, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in report.rows:
            w.writerow([r.estimator, _fmt(r.x), _fmt(r.rmse), r.trials, _fmt(r.epsilon), report.seed])
    finally:
        if close:
            destination.close()


def read_csv(source: Union[str, Path, IO]) -> RmseReport:
    """Parse a file written by :func:`emit_csv`; comment lines are skipped."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_csv(fh)
    lines = [ln for ln in source if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise IngestionError(f"unexpected header {header!r}", line=1)
    rows, seed = [], None
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(CSV_HEADER):
            raise IngestionError(f"line {lineno}: expected 6 fields", line=lineno)
        rows.append(RmseRow(row[0], float(row[1]), float(row[2]), int(row[3]), float(row[4])))
        seed = int(row[5])
    return RmseReport(tuple(rows), seed if seed is not None else 0)
