"""Hard instance pairs for private property estimation.

Each constructor returns two distributions whose property values differ by
``gap`` while their total variation distance is ``tv``. A maximal coupling
of ``n`` i.i.d. draws then has expected Hamming distance ``tv * n``, and an
``eps``-DP tester needs that distance to be at least of order ``1/eps``;
:func:`dp_sample_floor` reports the resulting sample size floor with the
constant set to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from inspectre.core import (
    DiscreteDistribution,
    exact_entropy,
    exact_support_coverage,
    exact_support_size,
    tv_distance,
)
from inspectre.errors import ConfigurationError


@dataclass(frozen=True)
class HardPair:
    p: DiscreteDistribution
    q: DiscreteDistribution
    property_tag: str
    gap: float
    tv: float
    eta_or_alpha: float
    m: Optional[int] = None


def coverage_pair(m: int, alpha: float) -> HardPair:
    """Uniform on ``round(m(1+alpha))`` symbols vs. ``m`` light symbols plus one heavy.

    The second distribution puts ``1/(m(1+alpha))`` on each of ``m`` shared
    symbols and ``alpha/(1+alpha)`` on an extra symbol outside the first
    support. ``gap = S_m(p) - S_m(q)``, positive: the heavy symbol soaks up
    draws that would otherwise land on fresh symbols.
    """
    if not 0 < alpha < 1:
        raise ConfigurationError("alpha must be in (0, 1)")
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    size = round(m * (1 + alpha))
    p = np.zeros(size + 1)
    p[:size] = 1.0 / size
    q = np.zeros(size + 1)
    q[:m] = 1.0 / (m * (1 + alpha))
    q[size] = alpha / (1 + alpha)
    P, Q = DiscreteDistribution(p), DiscreteDistribution(q)
    gap = exact_support_coverage(P, m) - exact_support_coverage(Q, m)
    return HardPair(P, Q, "coverage", gap, tv_distance(P, Q), alpha, m)


def supportsize_pair(k: int, alpha: float) -> HardPair:
    """Uniform over ``k`` vs. uniform over ``round((1-alpha) k)`` symbols."""
    if not 0 <= alpha < 1:
        raise ConfigurationError("alpha must be in [0, 1)")
    small = round((1 - alpha) * k)
    if small < 1:
        raise ConfigurationError("(1 - alpha) k must be at least 1")
    P = DiscreteDistribution.uniform(k)
    q = np.zeros(k)
    q[:small] = 1.0 / small
    Q = DiscreteDistribution(q, min_prob_floor=1.0 / k)
    gap = float(exact_support_size(P) - exact_support_size(Q))
    return HardPair(P, Q, "support-size", gap, tv_distance(P, Q), alpha)


def entropy_pair(k: int, eta: float) -> HardPair:
    """Mass 2/3 on one symbol vs. ``(2 - eta)/3``; the rest uniform in both.

    ``gap = H(q) - H(p)``, positive since ``q`` moves mass onto the tail.
    """
    if k < 3:
        raise ConfigurationError("k must be >= 3")
    if not 0 <= eta < 2:
        raise ConfigurationError("eta must be in [0, 2)")
    p = np.full(k, (1.0 / 3) / (k - 1))
    p[0] = 2.0 / 3
    q = np.full(k, ((1.0 + eta) / 3) / (k - 1))
    q[0] = (2.0 - eta) / 3
    P, Q = DiscreteDistribution(p), DiscreteDistribution(q)
    gap = exact_entropy(Q) - exact_entropy(P)
    return HardPair(P, Q, "entropy", gap, tv_distance(P, Q), eta)


def entropy_eta(alpha: float, k: int) -> float:
    """Perturbation ``alpha / ln k`` giving an entropy gap of order alpha."""
    return alpha / math.log(k)


def dp_sample_floor(pair: HardPair, eps: float) -> int:
    """``ceil(1 / (eps * tv))``: fewest samples for which the pair is DP-distinguishable."""
    if not eps > 0:
        raise ConfigurationError("epsilon must be > 0")
    if not pair.tv > 0:
        raise ConfigurationError("distributions are identical; no sample size distinguishes them")
    x = 1.0 / (eps * pair.tv)
    # Absorb rounding in tv so that e.g. 1/0.1 does not ceil to 11.
    return math.ceil(x * (1 - 1e-12))
