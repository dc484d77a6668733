"""Support coverage and support size via the smoothed Good-Toulmin estimator.

The estimator is linear in the fingerprint::

    S_hat = sum_i phi_i * (1 - (-t)^i * P(Z >= i)),   Z ~ Poisson(r)

with ``t = (m - n) / n``: the observed distinct count plus the smoothed
Good-Toulmin prediction ``-sum_i (-t)^i P(Z >= i) phi_i`` of symbols first
seen among the ``m - n`` extra draws. Coefficients are evaluated in
log-magnitude form so large ``i`` never overflows.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from inspectre.core import (
    Fingerprint,
    Histogram,
    RngLike,
    SampleSet,
    as_histogram,
    build_fingerprint,
)
from inspectre.errors import ConfigurationError
from inspectre.privacy import (
    EpsLike,
    PrivateEstimate,
    Provenance,
    SensitivityBound,
    additive_sensitivity,
    privatize,
)

TAIL_RTOL = 1e-15


class RMode(str, enum.Enum):
    THEORY = "theory"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class SgtConfig:
    n: int
    m: int
    t: float
    r: float
    r_mode: RMode
    r_fallback: bool = False
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.n < 1 or self.m < self.n:
            raise ConfigurationError(f"need m >= n >= 1, got n={self.n}, m={self.m}")
        if not self.r > 0:
            raise ConfigurationError("Poisson smoothing mean r must be > 0")


@dataclass(frozen=True)
class CoverageEstimate:
    value: float
    normalized: float
    n: int
    m: int


def log_poisson_tail(r: float, i: int) -> float:
    """``ln P(Z >= i)`` for ``Z ~ Poisson(r)``.

    Sums ``e^-r r^j / j!`` for ``j >= i`` relative to the first term until the
    next term falls below ``TAIL_RTOL`` of the running sum.
    """
    if not r > 0:
        raise ConfigurationError("r must be > 0")
    if i < 0:
        raise ConfigurationError("i must be >= 0")
    if i == 0:
        return 0.0
    log_first = -r + i * math.log(r) - math.lgamma(i + 1)
    total, term, j = 1.0, 1.0, i
    while True:
        j += 1
        term *= r / j
        total += term
        if term < TAIL_RTOL * total and j > r:
            break
    return log_first + math.log(total)


def poisson_tail(r: float, i: int) -> float:
    """``P(Z >= i)`` for ``Z ~ Poisson(r)``."""
    return min(1.0, math.exp(log_poisson_tail(r, i)))


def _log_tails(r: float, n: int) -> np.ndarray:
    """``ln P(Z >= i)`` for i = 0..n, accumulated downwards from the top."""
    out = np.empty(n + 1)
    out[n] = log_poisson_tail(r, n)
    i = np.arange(n)
    log_pmf = -r + i * math.log(r) - np.array([math.lgamma(v + 1) for v in range(n)])
    for v in range(n - 1, -1, -1):
        out[v] = np.logaddexp(out[v + 1], log_pmf[v])
    out[0] = 0.0
    return np.minimum(out, 0.0)


@functools.lru_cache(maxsize=256)
def _coefficients(n: int, t: float, r: float) -> np.ndarray:
    h = np.ones(n + 1)
    h[0] = 0.0
    if t > 0 and n >= 1:
        i = np.arange(1, n + 1)
        log_mag = i * math.log(t) + _log_tails(r, n)[1:]
        # -(-t)^i is positive for odd i.
        sign = np.where(i % 2 == 1, 1.0, -1.0)
        with np.errstate(over="ignore"):
            h[1:] = 1.0 + sign * np.exp(log_mag)
    h.setflags(write=False)
    return h


def sgt_coefficients(cfg: SgtConfig) -> np.ndarray:
    """Per-multiplicity weights ``h[i]``, i = 0..n, with ``h[0] = 0``."""
    return _coefficients(cfg.n, float(cfg.t), float(cfg.r))


def choose_r(
    n: int, t: float, mode: Union[str, RMode] = RMode.EMPIRICAL, alpha: Optional[float] = None
) -> float:
    """Smoothing mean for the Poisson tail.

    ``theory``: ``ln(3/alpha)`` for ``0 < alpha < 3``. ``empirical``:
    ``ln(n (t+1)^2 / (t-1)) / (2t)``, defined only for ``t > 1``; smaller
    ``t`` falls back to ``ln 3`` (see :func:`make_sgt_config`, which records
    the fallback).
    """
    mode = RMode(mode)
    if mode is RMode.THEORY:
        # Any alpha below 3 gives r > 0; callers wanting accuracy use alpha < 1.
        if alpha is None or not 0 < alpha < 3:
            raise ConfigurationError("theory mode needs alpha in (0, 3)")
        return math.log(3.0 / alpha)
    if t <= 1:
        return math.log(3.0)
    return math.log(n * (t + 1) ** 2 / (t - 1)) / (2 * t)


def make_sgt_config(
    n: int,
    m: int,
    r_mode: Union[str, RMode] = RMode.EMPIRICAL,
    alpha: Optional[float] = None,
    r: Optional[float] = None,
) -> SgtConfig:
    """Build a config for predicting coverage at ``m`` from ``n`` samples.

    An explicit ``r`` overrides ``r_mode``.
    """
    if n < 1 or m < n:
        raise ConfigurationError(f"need m >= n >= 1, got n={n}, m={m}")
    t = (m - n) / n
    mode = RMode(r_mode)
    fallback = False
    if r is None:
        r = choose_r(n, t, mode, alpha)
        fallback = mode is RMode.EMPIRICAL and t <= 1
    return SgtConfig(n=n, m=m, t=t, r=float(r), r_mode=mode, r_fallback=fallback, alpha=alpha)


def _as_fingerprint(data) -> Fingerprint:
    if isinstance(data, Fingerprint):
        return data
    return build_fingerprint(as_histogram(data))


def sgt_estimate(
    data: Union[Fingerprint, Histogram, SampleSet], cfg: SgtConfig
) -> CoverageEstimate:
    fp = _as_fingerprint(data)
    if fp.n != cfg.n:
        raise ConfigurationError(f"config built for n={cfg.n}, sample has n={fp.n}")
    h = sgt_coefficients(cfg)
    idx = fp.multiplicities()
    value = float(np.dot(fp.phi[idx], h[idx]))
    return CoverageEstimate(value, value / cfg.m, cfg.n, cfg.m)


def coefficient_bound(t: float, r: float) -> float:
    """Bound ``1 + e^{r(t-1)}`` on ``|1 - (-t)^i P(Z >= i)|``, valid for ``t >= 1``."""
    try:
        return 1.0 + math.exp(r * (t - 1))
    except OverflowError:
        return math.inf


def _step_bound(t: float, r: float) -> float:
    # Below t = 1 the powers t^i shrink, so the largest correction term is
    # t P(Z >= 1) rather than e^{r(t-1)}; take whichever is larger.
    bound = coefficient_bound(t, r)
    if t < 1:
        bound = max(bound, 1.0 - t * math.expm1(-r))
    return bound


def sgt_sensitivity(cfg: SgtConfig, normalized: bool = True) -> SensitivityBound:
    """Analytic sensitivity ``2(1 + e^{r(t-1)})``, divided by m when normalized.

    For ``t < 1`` the coefficient magnitude is also bounded by
    ``1 + t P(Z >= 1)``, and the larger of the two bounds is used. When the
    analytic bound overflows (tiny samples, huge horizons) the exact
    table-scan value is returned instead.
    """
    delta = 2.0 * _step_bound(cfg.t, cfg.r)
    if not math.isfinite(delta):
        # Raises if the table itself overflows.
        return sgt_table_sensitivity(cfg, normalized)
    if normalized:
        delta /= cfg.m
    return SensitivityBound(delta, Provenance.ANALYTIC)


def sgt_table_sensitivity(cfg: SgtConfig, normalized: bool = True) -> SensitivityBound:
    """Exact sensitivity of the estimator from a scan of its coefficient table."""
    bound = additive_sensitivity(sgt_coefficients(cfg), cfg.n)
    return bound.scaled(1.0 / cfg.m) if normalized else bound


def private_support_coverage(
    data: Union[Histogram, SampleSet],
    m: int,
    eps: EpsLike,
    r_mode: Union[str, RMode] = RMode.EMPIRICAL,
    alpha: Optional[float] = None,
    rng: RngLike = None,
    *,
    r: Optional[float] = None,
    clamp: bool = False,
    k_max: Optional[int] = None,
) -> PrivateEstimate:
    """Private estimate of the normalized coverage ``S_m / m``.

    With ``clamp=True`` the released value is projected onto
    ``[0, k_max / m]`` (post-processing, so privacy is unaffected).
    """
    hist = as_histogram(data)
    cfg = make_sgt_config(hist.n, m, r_mode, alpha, r)
    est = sgt_estimate(hist, cfg)
    out = privatize(est.normalized, sgt_sensitivity(cfg), eps, rng)
    if clamp:
        hi = (k_max if k_max is not None else m) / m
        clamped = min(max(out.value, 0.0), hi)
        out = PrivateEstimate(clamped, out.raw_value, out.noise_scale, out.epsilon, out.sensitivity)
    return out


@dataclass(frozen=True)
class SupportSizeEstimate:
    """Support size estimate; ``private`` is set when noise was added."""

    value: float
    raw_value: float
    observed_distinct: int
    branch: str
    m: int
    sensitivity: SensitivityBound
    private: Optional[PrivateEstimate] = None


def support_size_estimate(
    data: Union[Histogram, SampleSet],
    k: int,
    alpha: float,
    eps: Optional[EpsLike] = None,
    rng: RngLike = None,
) -> SupportSizeEstimate:
    """Estimate support size of a distribution whose non-zero masses are >= 1/k.

    Predicts coverage at ``m = ceil(k ln(3/alpha))`` with ``r = ln(3/alpha)``.
    When ``n > k ln(3/alpha) / 2`` the sample already sees nearly every
    symbol, so the observed distinct count (sensitivity 2) is used instead.

    Non-private results are clamped to ``[observed distinct, k]``. Private
    results are clamped to ``[1, k]``: the observed distinct count is itself
    sensitive, so it cannot serve as a clamp bound after noise.
    """
    if k < 2:
        raise ConfigurationError("k must be >= 2")
    if not 0 < alpha < 1:
        raise ConfigurationError("alpha must be in (0, 1)")
    hist = as_histogram(data)
    n = hist.n
    if n < 1:
        raise ConfigurationError("support size estimation needs at least one sample")
    r = math.log(3.0 / alpha)
    m = max(math.ceil(k * r), n)
    distinct = hist.distinct
    if n > 0.5 * k * r:
        branch = "distinct"
        raw = float(distinct)
        delta = SensitivityBound(2.0, Provenance.ANALYTIC)
    else:
        branch = "sgt"
        cfg = make_sgt_config(n, m, RMode.THEORY, alpha, r)
        raw = sgt_estimate(hist, cfg).value
        delta = sgt_sensitivity(cfg, normalized=False)
    if eps is None:
        value = float(min(max(raw, distinct), k))
        return SupportSizeEstimate(value, raw, distinct, branch, m, delta)
    priv = privatize(raw, delta, eps, rng)
    value = float(min(max(priv.value, 1.0), k))
    return SupportSizeEstimate(value, raw, distinct, branch, m, delta, priv)
