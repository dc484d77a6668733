"""Laplace mechanism and sensitivity calculus.

Every private estimator in the package is "compute a statistic, add
``Lap(delta / epsilon)``". The helpers here also compute sensitivities of
count-additive statistics ``sum_x g(N_x)`` from their per-count table, and
provide an exhaustive oracle for tiny instances used in tests.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from inspectre.core import (
    Histogram,
    RngLike,
    SampleSet,
    as_generator,
    build_histogram,
)
from inspectre.errors import ConfigurationError, SensitivityGuardError

# Largest k**n the exhaustive oracle will enumerate.
BRUTE_FORCE_LIMIT = 10**6


class Provenance(str, enum.Enum):
    ANALYTIC = "analytic"
    TABLE_SCAN = "table-scan"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float

    def __post_init__(self):
        eps = float(self.epsilon)
        if not eps > 0 or math.isnan(eps):
            raise ConfigurationError(f"epsilon must be > 0, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)


@dataclass(frozen=True)
class SensitivityBound:
    delta: float
    provenance: Provenance = Provenance.ANALYTIC

    def __post_init__(self):
        d = float(self.delta)
        if not d >= 0 or math.isinf(d):
            raise ConfigurationError(f"sensitivity must be finite and >= 0, got {self.delta!r}")
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    def scaled(self, factor: float) -> "SensitivityBound":
        return SensitivityBound(self.delta * factor, self.provenance)


@dataclass(frozen=True)
class PrivateEstimate:
    """A released value together with the parameters that produced it.

    ``raw_value`` is the non-private statistic and must never be published
    alongside ``value``; it is kept for benchmarking.
    """

    value: float
    raw_value: float
    noise_scale: float
    epsilon: float
    sensitivity: SensitivityBound
    batch_values: Optional[tuple] = None

    def __post_init__(self):
        expected = self.sensitivity.delta / self.epsilon
        if not math.isclose(self.noise_scale, expected, rel_tol=1e-12, abs_tol=0.0):
            raise ConfigurationError("noise_scale must equal sensitivity / epsilon")


EpsLike = Union[float, PrivacyParams]
DeltaLike = Union[float, SensitivityBound]


def _eps(eps: EpsLike) -> float:
    return eps.epsilon if isinstance(eps, PrivacyParams) else PrivacyParams(eps).epsilon


def _delta(delta: DeltaLike) -> SensitivityBound:
    return delta if isinstance(delta, SensitivityBound) else SensitivityBound(delta)


def laplace_noise(scale: float, rng: RngLike = None, size=None):
    """Draw from ``Lap(scale)`` by inverting the CDF of one uniform per draw."""
    if not scale > 0 or math.isinf(scale):
        raise ConfigurationError(f"Laplace scale must be finite and > 0, got {scale!r}")
    rng = as_generator(rng)
    u = rng.random(size)
    # u == 0 would map to -inf.
    u = np.maximum(u, np.finfo(float).tiny)
    x = np.where(u < 0.5, scale * np.log(2 * u), -scale * np.log(2 * (1 - u)))
    return float(x) if size is None else x


def laplace_density(x, center: float, scale: float):
    return np.exp(-np.abs(np.asarray(x) - center) / scale) / (2 * scale)


def privatize(
    value: float, delta: DeltaLike, eps: EpsLike, rng: RngLike = None
) -> PrivateEstimate:
    """Release ``value + Lap(delta / eps)``.

    Zero sensitivity or infinite epsilon releases the value unchanged.
    """
    epsilon = _eps(eps)
    bound = _delta(delta)
    scale = bound.delta / epsilon
    noisy = float(value)
    if scale > 0:
        noisy += laplace_noise(scale, rng)
    return PrivateEstimate(noisy, float(value), scale, epsilon, bound)


def median_amplify(
    estimator: Callable[[Histogram], float],
    samples: SampleSet,
    batches: int,
    delta_per_batch: DeltaLike,
    eps: EpsLike,
    rng: RngLike = None,
) -> PrivateEstimate:
    """Median of privatized estimates on disjoint contiguous batches.

    The sample is cut into ``batches`` runs of ``n // batches`` symbols (the
    remainder is discarded). Each batch is released with the full budget;
    since a single changed sample lands in exactly one batch, the median is
    ``eps``-DP by parallel composition. ``delta_per_batch`` must bound the
    estimator's sensitivity at the batch size.
    """
    if batches < 1 or batches % 2 == 0:
        raise ConfigurationError("number of batches must be a positive odd integer")
    if batches > samples.n:
        raise ConfigurationError("more batches than samples")
    epsilon = _eps(eps)
    bound = _delta(delta_per_batch)
    rng = as_generator(rng)
    size = samples.n // batches
    raw, noisy = [], []
    for b in range(batches):
        chunk = samples[b * size : (b + 1) * size]
        est = privatize(estimator(build_histogram(chunk)), bound, epsilon, rng)
        raw.append(est.raw_value)
        noisy.append(est.value)
    mid = int(np.argsort(noisy, kind="stable")[batches // 2])
    return PrivateEstimate(
        noisy[mid],
        float(np.median(raw)),
        bound.delta / epsilon,
        epsilon,
        bound,
        batch_values=tuple(noisy),
    )


def additive_sensitivity(table: Sequence[float], n: Optional[int] = None) -> SensitivityBound:
    """Sensitivity of ``sum_x g(N_x)`` from the table ``g(0), ..., g(n)``.

    Replacing one sample decrements one count and increments another, so
    the statistic moves by at most twice the largest single step of ``g``.
    """
    g = np.asarray(table, dtype=np.float64)
    if n is None:
        n = g.size - 1
    if g.size < n + 1:
        raise ConfigurationError("table must cover counts 0..n")
    if n < 1:
        return SensitivityBound(0.0, Provenance.TABLE_SCAN)
    steps = np.abs(np.diff(g[: n + 1]))
    return SensitivityBound(2.0 * float(steps.max()), Provenance.TABLE_SCAN)


def brute_sensitivity_oracle(
    estimator: Callable[[SampleSet], float], n: int, k: int
) -> SensitivityBound:
    """Exact sensitivity over ``[k]^n`` by enumerating every neighbouring pair.

    Intended for tests; refuses when ``k**n`` exceeds ``BRUTE_FORCE_LIMIT``.
    """
    if n < 1 or k < 1:
        raise ConfigurationError("n and k must be positive")
    if k**n > BRUTE_FORCE_LIMIT:
        raise SensitivityGuardError(
            f"k**n = {k**n} exceeds the exhaustive limit {BRUTE_FORCE_LIMIT}"
        )
    # Dataset index = base-k number with X_1 as the most significant digit.
    values = np.array(
        [estimator(SampleSet(np.array(x))) for x in itertools.product(range(k), repeat=n)],
        dtype=np.float64,
    )
    idx = np.arange(k**n)
    best = 0.0
    for pos in range(n):
        w = k ** (n - 1 - pos)
        digit = (idx // w) % k
        base = idx - digit * w
        for y in range(k):
            diff = np.abs(values[base + y * w] - values)
            best = max(best, float(diff.max()))
    return SensitivityBound(best, Provenance.EXHAUSTIVE)
