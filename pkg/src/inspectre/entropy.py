"""Entropy estimators and their Laplace-noised versions.

All values are in nats. Three non-private estimators are provided: the
plug-in (empirical) entropy, Miller-Madow, and a polynomial-approximation
estimator that replaces the plug-in contribution of small counts with an
unbiased estimate of a low-degree approximation of ``x ln(1/x)``. The
polynomial estimator is additive over symbols, so its sensitivity is read
off its per-count table.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from inspectre.approx import chebyshev_interpolant, entropy_term, remez
from inspectre.core import Histogram, RngLike, SampleSet, as_histogram
from inspectre.errors import ConfigurationError, EmptySampleError
from inspectre.privacy import (
    EpsLike,
    PrivateEstimate,
    Provenance,
    SensitivityBound,
    additive_sensitivity,
    privatize,
)

DEFAULT_DEGREE_MULTIPLIER = 1.2
# Counts up to ceil(THRESHOLD_CONSTANT * ln n) go through the polynomial.
THRESHOLD_CONSTANT = 2.0
# Approximation interval is [0, INTERVAL_MULTIPLIER * threshold / n].
INTERVAL_MULTIPLIER = 4.0
DEFAULT_LAMBDA = 0.3


class EstimatorTag(str, enum.Enum):
    PLUG_IN = "plug-in"
    MILLER_MADOW = "miller-madow"
    POLY = "poly"


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    estimator_tag: EstimatorTag
    n: int


@dataclass(frozen=True, eq=False)
class PolyConfig:
    """Hyperparameters of the polynomial estimator for fixed ``(k, n)``.

    ``coeffs`` are monomial coefficients ``a_0..a_L`` of the approximation of
    ``x ln(1/x)`` on ``[0, interval]``; ``table[j]`` is the contribution of a
    symbol seen ``j`` times, for ``j = 0..n``.
    """

    k: int
    n: int
    degree: int
    degree_multiplier: float
    threshold: int
    interval: float
    coeffs: np.ndarray
    approx_error: float
    approx_method: str
    threshold_constant: float
    lam: float
    table: np.ndarray

    @property
    def L(self) -> int:
        return self.degree


def _plugin_table(n: int) -> np.ndarray:
    j = np.arange(n + 1, dtype=np.float64)
    return entropy_term(j / n)


def _check_hist(hist: Histogram) -> Histogram:
    if hist.n == 0:
        raise EmptySampleError("entropy of an empty sample is undefined")
    return hist


def empirical_entropy(data: Union[Histogram, SampleSet]) -> EntropyEstimate:
    """Entropy of the empirical distribution, ``sum N_x/n ln(n/N_x)``."""
    hist = _check_hist(as_histogram(data))
    n = hist.n
    c = hist.counts.astype(np.float64)
    value = float(np.sum(c / n * np.log(n / c)))
    return EntropyEstimate(value, EstimatorTag.PLUG_IN, n)


def empirical_entropy_sensitivity(n: int) -> SensitivityBound:
    """``2 max(1/n, ln(n)/n)``, which is ``2 ln(n)/n`` once n >= 3."""
    if n < 2:
        raise ConfigurationError("sensitivity of the plug-in entropy needs n >= 2")
    return SensitivityBound(2.0 * max(1.0 / n, math.log(n) / n), Provenance.ANALYTIC)


def miller_madow(data: Union[Histogram, SampleSet]) -> EntropyEstimate:
    hist = _check_hist(as_histogram(data))
    value = empirical_entropy(hist).value + (hist.distinct - 1) / (2 * hist.n)
    return EntropyEstimate(value, EstimatorTag.MILLER_MADOW, hist.n)


def _falling_ratio_table(n: int, upto: int, degree: int, scale: float) -> np.ndarray:
    """``R[j, l] = (j)_l / ((n)_l * scale**l)`` for j = 0..upto, l = 0..degree."""
    j = np.arange(upto + 1, dtype=np.float64)[:, None]
    out = np.ones((upto + 1, degree + 1))
    for l in range(1, degree + 1):
        out[:, l] = out[:, l - 1] * np.maximum(j[:, 0] - (l - 1), 0.0) / ((n - (l - 1)) * scale)
    return out


def poly_count_table(
    n: int, threshold: int, scaled_coeffs: np.ndarray, interval: float
) -> np.ndarray:
    """Per-count contributions ``g(0..n)`` of the polynomial estimator.

    For ``1 <= j <= threshold`` (and ``j = 0`` when the threshold is at
    least one), ``g(j) = sum_l c_l (j)_l / ((n)_l b^l)`` is the unbiased
    estimate of the approximation ``sum_l c_l (p/b)^l``. Larger counts use
    the plug-in term plus a ``1/(2n)`` bias correction.
    """
    g = _plugin_table(n) + 1.0 / (2 * n)
    g[0] = 0.0
    upto = min(threshold, n)
    if threshold >= 1:
        degree = scaled_coeffs.size - 1
        R = _falling_ratio_table(n, upto, degree, interval)
        g[: upto + 1] = R @ scaled_coeffs
    return g


def build_poly_config(
    k: int,
    n: int,
    degree_multiplier: float = DEFAULT_DEGREE_MULTIPLIER,
    lam: float = DEFAULT_LAMBDA,
    *,
    degree: int | None = None,
    threshold: int | None = None,
    threshold_constant: float = THRESHOLD_CONSTANT,
    interval_multiplier: float = INTERVAL_MULTIPLIER,
    approx_method: str = "chebyshev",
) -> PolyConfig:
    """Configure the polynomial estimator for alphabet size ``k`` and ``n`` samples.

    The degree is ``round(degree_multiplier * ln k)`` (at least 1, at most n).
    ``approx_method`` is ``"chebyshev"`` (interpolation at Chebyshev nodes)
    or ``"remez"`` (minimax by exchange).
    """
    if k < 2 or n < 2:
        raise ConfigurationError("polynomial estimator needs k >= 2 and n >= 2")
    if not 0.01 <= lam <= 1:
        raise ConfigurationError("lambda must lie in [0.01, 1]")
    if degree is None:
        degree = max(1, round(degree_multiplier * math.log(k)))
    degree = min(int(degree), n)
    if degree < 1:
        raise ConfigurationError("degree must be >= 1")
    if threshold is None:
        threshold = math.ceil(threshold_constant * math.log(n))
    if threshold < 0:
        raise ConfigurationError("threshold must be >= 0")
    interval = min(1.0, interval_multiplier * max(threshold, 1) / n)
    if approx_method == "chebyshev":
        approx = chebyshev_interpolant(entropy_term, degree, 0.0, interval)
    elif approx_method == "remez":
        approx = remez(entropy_term, degree, 0.0, interval)
    else:
        raise ConfigurationError(f"unknown approximation method {approx_method!r}")
    table = poly_count_table(n, threshold, approx.scaled, interval)
    table.setflags(write=False)
    return PolyConfig(
        k=k,
        n=n,
        degree=degree,
        degree_multiplier=degree_multiplier,
        threshold=threshold,
        interval=interval,
        coeffs=approx.coeffs,
        approx_error=approx.error,
        approx_method=approx.method,
        threshold_constant=threshold_constant,
        lam=lam,
        table=table,
    )


def poly_entropy(data: Union[Histogram, SampleSet], config: PolyConfig) -> EntropyEstimate:
    """Polynomial-approximation entropy estimate.

    Sums the per-count table over all ``k`` symbols, so each unseen symbol
    contributes ``g(0)``.
    """
    hist = _check_hist(as_histogram(data))
    if hist.n != config.n:
        raise ConfigurationError(f"config built for n={config.n}, sample has n={hist.n}")
    if hist.distinct > config.k:
        raise ConfigurationError("more distinct symbols observed than the alphabet size k")
    g = config.table
    value = float(np.sum(g[hist.counts]) + (config.k - hist.distinct) * g[0])
    return EntropyEstimate(value, EstimatorTag.POLY, hist.n)


def poly_sensitivity(config: PolyConfig, n: int | None = None) -> SensitivityBound:
    """Table-scan sensitivity of :func:`poly_entropy` for this configuration."""
    n = config.n if n is None else n
    if n != config.n:
        raise ConfigurationError("config was built for a different n")
    return additive_sensitivity(config.table, n)


def sensitivity_exponent_ratio(delta: float, n: int, lam: float) -> float:
    """``delta * n / n**lam``; bounded when the sensitivity scales as n^lam/n."""
    return delta * n / n**lam


def private_entropy(
    data: Union[Histogram, SampleSet],
    method: Union[str, EstimatorTag],
    eps: EpsLike,
    rng: RngLike = None,
    *,
    config: PolyConfig | None = None,
    k: int | None = None,
    degree_multiplier: float = DEFAULT_DEGREE_MULTIPLIER,
) -> PrivateEstimate:
    """Entropy estimate plus Laplace noise calibrated to the estimator.

    ``method`` is ``"plug-in"`` or ``"poly"``. The polynomial method needs
    either a prebuilt ``config`` or the alphabet size ``k``.
    """
    hist = _check_hist(as_histogram(data))
    method = EstimatorTag(method)
    if hist.n < 2:
        raise ConfigurationError("private entropy estimation needs n >= 2")
    if method is EstimatorTag.PLUG_IN:
        value = empirical_entropy(hist).value
        delta = empirical_entropy_sensitivity(hist.n)
    elif method is EstimatorTag.POLY:
        if config is None:
            if k is None:
                raise ConfigurationError("poly method needs config or k")
            config = build_poly_config(k, hist.n, degree_multiplier)
        value = poly_entropy(hist, config).value
        delta = poly_sensitivity(config)
    else:
        raise ConfigurationError(f"no private version of {method.value}")
    return privatize(value, delta, eps, rng)
