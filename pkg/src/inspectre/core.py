"""Sample containers and exact properties of known distributions.

Symbols are dense integer ids. Token streams are interned with
:meth:`SampleSet.from_tokens`, which keeps the original labels around so
histograms can be reported by name.
"""

from __future__ import annotations

import math
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from inspectre.errors import ConfigurationError

RngLike = Union[None, int, np.random.Generator, np.random.SeedSequence]

# Tolerance used when validating that probabilities sum to one.
PROB_SUM_TOL = 1e-12


def as_generator(rng: RngLike) -> np.random.Generator:
    """Coerce a seed, SeedSequence or Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """An ordered sequence of symbol ids ``X_1 .. X_n``."""

    symbols: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        arr = np.asarray(self.symbols, dtype=np.int64).reshape(-1)
        if arr.size and arr.min() < 0:
            raise ConfigurationError("symbol ids must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "symbols", arr)

    @classmethod
    def from_tokens(cls, tokens: Iterable[Hashable]) -> "SampleSet":
        """Intern arbitrary hashable tokens to dense ids in order of first use."""
        index: dict = {}
        ids = []
        for tok in tokens:
            ids.append(index.setdefault(tok, len(index)))
        return cls(np.asarray(ids, dtype=np.int64), labels=tuple(index))

    @property
    def n(self) -> int:
        return int(self.symbols.size)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, item) -> "SampleSet":
        if isinstance(item, slice):
            return SampleSet(self.symbols[item], self.labels)
        raise TypeError("SampleSet supports slicing only")


@dataclass(frozen=True, eq=False)
class Histogram:
    """Per-symbol counts ``N_x`` of a sample; only observed symbols are stored."""

    symbols: np.ndarray
    counts: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        syms = np.asarray(self.symbols, dtype=np.int64).reshape(-1)
        cnts = np.asarray(self.counts, dtype=np.int64).reshape(-1)
        if syms.shape != cnts.shape:
            raise ConfigurationError("symbols and counts must have the same length")
        if cnts.size and cnts.min() < 1:
            raise ConfigurationError("histogram counts must be positive")
        syms.setflags(write=False)
        cnts.setflags(write=False)
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "counts", cnts)

    @classmethod
    def from_counts(cls, counts: Union[Sequence[int], np.ndarray]) -> "Histogram":
        """Build from a dense count vector indexed by symbol id (zeros dropped)."""
        counts = np.asarray(counts, dtype=np.int64)
        nz = np.flatnonzero(counts)
        return cls(nz, counts[nz])

    @classmethod
    def from_mapping(cls, mapping: Mapping[Hashable, int]) -> "Histogram":
        """Build from ``{label: count}``; zero counts are dropped."""
        items = [(k, int(v)) for k, v in mapping.items() if int(v) != 0]
        labels = tuple(k for k, _ in items)
        return cls(np.arange(len(items)), [v for _, v in items], labels=labels)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def distinct(self) -> int:
        """Number of distinct observed symbols."""
        return int(self.counts.size)

    def as_dict(self) -> dict:
        keys = self.symbols.tolist()
        if self.labels is not None:
            keys = [self.labels[i] for i in keys]
        return dict(zip(keys, self.counts.tolist()))


@dataclass(frozen=True, eq=False)
class Fingerprint:
    """Profile of a sample: ``phi[i]`` symbols appear exactly ``i`` times.

    ``phi`` has length ``n + 1``; ``phi[0]`` is always zero since unseen
    symbols are not counted.
    """

    phi: np.ndarray
    n: int

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.int64).reshape(-1)
        if phi.size != self.n + 1:
            raise ConfigurationError("fingerprint must have n + 1 entries")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def distinct(self) -> int:
        return int(self.phi[1:].sum())

    def multiplicities(self) -> np.ndarray:
        """Indices ``i >= 1`` with ``phi[i] > 0``."""
        return np.flatnonzero(self.phi[1:]) + 1


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Explicit probability vector over symbols ``0 .. k-1``.

    If ``min_prob_floor`` is given, the distribution is asserted to belong to
    the class where every non-zero probability is at least the floor.
    """

    probs: np.ndarray
    min_prob_floor: Optional[float] = None
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64).reshape(-1)
        if p.size == 0:
            raise ConfigurationError("distribution needs at least one symbol")
        if not np.all(np.isfinite(p)) or p.min() < 0:
            raise ConfigurationError("probabilities must be finite and non-negative")
        total = math.fsum(p.tolist())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ConfigurationError(f"probabilities sum to {total!r}, not 1")
        if self.min_prob_floor is not None:
            nz = p[p > 0]
            if nz.size and nz.min() < self.min_prob_floor * (1 - 1e-12):
                raise ConfigurationError(
                    f"non-zero probability {nz.min()!r} below floor {self.min_prob_floor!r}"
                )
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)

    @classmethod
    def uniform(cls, k: int) -> "DiscreteDistribution":
        if k < 1:
            raise ConfigurationError("k must be >= 1")
        return cls(np.full(k, 1.0 / k), min_prob_floor=1.0 / k)

    @property
    def k(self) -> int:
        return int(self.probs.size)

    def padded(self, k: int) -> np.ndarray:
        """Probability vector zero-padded to length ``k``."""
        if k < self.k:
            raise ConfigurationError("cannot pad to a smaller universe")
        out = np.zeros(k)
        out[: self.k] = self.probs
        return out


def build_histogram(samples: SampleSet) -> Histogram:
    """Tally symbol multiplicities."""
    if samples.n == 0:
        return Histogram(np.empty(0, np.int64), np.empty(0, np.int64), samples.labels)
    dense = np.bincount(samples.symbols)
    nz = np.flatnonzero(dense)
    return Histogram(nz, dense[nz], samples.labels)


def build_fingerprint(hist: Histogram) -> Fingerprint:
    n = hist.n
    phi = np.bincount(hist.counts, minlength=n + 1)
    phi[0] = 0
    return Fingerprint(phi, n)


def as_histogram(data: Union[SampleSet, Histogram]) -> Histogram:
    if isinstance(data, Histogram):
        return data
    if isinstance(data, SampleSet):
        return build_histogram(data)
    raise TypeError(f"expected SampleSet or Histogram, got {type(data).__name__}")


def exact_entropy(dist: DiscreteDistribution) -> float:
    """Shannon entropy in nats, with ``0 ln 0 = 0``."""
    p = dist.probs[dist.probs > 0]
    return float(-np.sum(p * np.log(p)))


def exact_support_size(dist: DiscreteDistribution) -> int:
    return int(np.count_nonzero(dist.probs > 0))


def exact_support_coverage(dist: DiscreteDistribution, m: int) -> float:
    """Expected number of distinct symbols among ``m`` draws: sum of 1 - (1-p)^m."""
    if m < 0:
        raise ConfigurationError("m must be non-negative")
    if m == 0:
        return 0.0
    p = dist.probs[dist.probs > 0]
    with np.errstate(divide="ignore"):
        return float(np.sum(-np.expm1(m * np.log1p(-p))))


def tv_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Total variation distance; the shorter vector is padded with zeros."""
    k = max(p.k, q.k)
    return float(0.5 * np.sum(np.abs(p.padded(k) - q.padded(k))))


def sample(dist: DiscreteDistribution, n: int, seed: RngLike = None) -> SampleSet:
    """Draw ``n`` i.i.d. symbols; deterministic for a fixed seed."""
    if n < 0:
        raise ConfigurationError("n must be non-negative")
    rng = as_generator(seed)
    u = rng.random(n)
    return SampleSet(np.searchsorted(dist._cdf, u, side="right").clip(max=dist.k - 1))


def sample_histogram(dist: DiscreteDistribution, n: int, seed: RngLike = None) -> Histogram:
    """Histogram of ``n`` i.i.d. draws, sampled directly from the multinomial law."""
    rng = as_generator(seed)
    return Histogram.from_counts(rng.multinomial(n, dist.probs))
