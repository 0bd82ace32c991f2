"""Primitive distributions with validated parameters.

Each variant is a frozen dataclass with ``draw(rng, size)`` and, where it has
a closed form, ``quantile(u)``.  Gamma uses the shape-scale parameterization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import special

from .rng import RngStream


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class Uniform:
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        _check(math.isfinite(self.low) and math.isfinite(self.high), "uniform bounds must be finite")
        _check(self.low < self.high, "uniform requires low < high")

    def draw(self, rng: RngStream, size=None):
        u = rng.generator.random(size)
        return self.low + (self.high - self.low) * u

    def quantile(self, u):
        return self.low + (self.high - self.low) * np.asarray(u, dtype=float)

    def support(self) -> tuple[float, float]:
        return (self.low, self.high)

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)


def Uniform01() -> Uniform:
    return Uniform(0.0, 1.0)


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        _check(math.isfinite(self.mean), "normal mean must be finite")
        _check(self.variance >= 0 and math.isfinite(self.variance), "normal variance must be >= 0")

    def draw(self, rng: RngStream, size=None):
        return rng.generator.normal(self.mean, math.sqrt(self.variance), size)

    def quantile(self, u):
        return self.mean + math.sqrt(self.variance) * special.ndtri(np.asarray(u, dtype=float))

    def support(self) -> tuple[float, float]:
        if self.variance == 0:
            return (self.mean, self.mean)
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class LogNormal:
    log_mean: float = 0.0
    log_variance: float = 1.0

    def __post_init__(self):
        _check(math.isfinite(self.log_mean), "log-mean must be finite")
        _check(self.log_variance >= 0 and math.isfinite(self.log_variance), "log-variance must be >= 0")

    def draw(self, rng: RngStream, size=None):
        return np.exp(rng.generator.normal(self.log_mean, math.sqrt(self.log_variance), size))

    def quantile(self, u):
        return np.exp(self.log_mean + math.sqrt(self.log_variance) * special.ndtri(np.asarray(u, dtype=float)))

    def support(self) -> tuple[float, float]:
        if self.log_variance == 0:
            v = math.exp(self.log_mean)
            return (v, v)
        return (0.0, math.inf)

    @property
    def mean(self) -> float:
        return math.exp(self.log_mean + self.log_variance / 2)


@dataclass(frozen=True)
class Gamma:
    shape: float
    scale: float = 1.0

    def __post_init__(self):
        _check(self.shape > 0 and math.isfinite(self.shape), "gamma shape must be > 0")
        _check(self.scale > 0 and math.isfinite(self.scale), "gamma scale must be > 0")

    def draw(self, rng: RngStream, size=None):
        # numpy's sampler handles shape < 1 (boosting), needed for alpha/beta < 1
        return rng.generator.gamma(self.shape, self.scale, size)

    def quantile(self, u):
        return self.scale * special.gammaincinv(self.shape, np.asarray(u, dtype=float))

    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    @property
    def mean(self) -> float:
        return self.shape * self.scale


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0

    def __post_init__(self):
        _check(self.rate > 0 and math.isfinite(self.rate), "exponential rate must be > 0")

    def draw(self, rng: RngStream, size=None):
        return rng.generator.exponential(1.0 / self.rate, size)

    def quantile(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        _check(0.0 <= self.p <= 1.0, "bernoulli p must lie in [0, 1]")

    def draw(self, rng: RngStream, size=None):
        u = rng.generator.random(size)
        out = (u < self.p).astype(float) if size is not None else float(u < self.p)
        return out

    def quantile(self, u):
        # generalized inverse of the step CDF: 0 while u <= 1 - p
        return (np.asarray(u, dtype=float) > 1.0 - self.p).astype(float)

    def support(self) -> tuple[float, float]:
        lo = 0.0 if self.p < 1 else 1.0
        hi = 1.0 if self.p > 0 else 0.0
        return (lo, hi)


@dataclass(frozen=True)
class Discrete:
    """Law on ``{0, ..., k-1}`` with the given weights."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        _check(len(w) >= 1, "discrete law needs at least one weight")
        _check(all(x >= 0 for x in w), "discrete weights must be non-negative")
        _check(abs(sum(w) - 1.0) < 1e-9, "discrete weights must sum to 1")

    def draw(self, rng: RngStream, size=None):
        u = rng.generator.random(size)
        return self.quantile(u)

    def quantile(self, u):
        cdf = np.cumsum(self.weights)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, np.asarray(u, dtype=float), side="left")
        return np.minimum(idx, len(self.weights) - 1).astype(float)

    def support(self) -> tuple[float, float]:
        nz = [i for i, x in enumerate(self.weights) if x > 0]
        return (float(nz[0]), float(nz[-1]))


Distribution = Union[Uniform, Normal, LogNormal, Gamma, Exponential, Bernoulli, Discrete]


def sample(dist: Distribution, rng: RngStream) -> float:
    """One draw from ``dist``; advances ``rng``."""
    return float(dist.draw(rng))


def sample_many(dist: Distribution, rng: RngStream, size: int) -> np.ndarray:
    return np.asarray(dist.draw(rng, size), dtype=float)


def inverse_transform(quantile_fn: Callable[[float], float], u: float) -> float:
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    return float(quantile_fn(u))


_PARSERS = {
    "uniform": (Uniform, 0),
    "normal": (Normal, 2),
    "lognormal": (LogNormal, 2),
    "gamma": (Gamma, 2),
    "exponential": (Exponential, 1),
    "bernoulli": (Bernoulli, 1),
    "point": (None, 1),
}


def parse_distribution(text: str) -> Distribution:
    """Parse ``name:arg:arg`` strings such as ``normal:0:1`` or ``discrete:0.2;0.8``.

    ``uniform`` alone is the unit interval; ``uniform:lo:hi`` rescales it and
    ``point:x`` is a point mass (zero-variance normal).
    """
    name, *args = [s.strip() for s in text.strip().split(":")]
    name = name.lower()
    if name == "discrete":
        if len(args) != 1:
            raise ValueError("discrete expects weights separated by ';'")
        return Discrete(tuple(float(x) for x in args[0].split(";")))
    if name == "uniform":
        if len(args) not in (0, 2):
            raise ValueError("uniform takes no arguments or low:high")
        return Uniform(*map(float, args)) if args else Uniform()
    if name not in _PARSERS:
        raise ValueError(f"unknown distribution {name!r}")
    cls, nargs = _PARSERS[name]
    if len(args) != nargs:
        raise ValueError(f"{name} expects {nargs} argument(s), got {len(args)}")
    vals = [float(a) for a in args]
    if name == "point":
        return Normal(vals[0], 0.0)
    return cls(*vals)


def format_distribution(dist: Distribution) -> str:
    if isinstance(dist, Uniform):
        return "uniform" if (dist.low, dist.high) == (0.0, 1.0) else f"uniform:{dist.low!r}:{dist.high!r}"
    if isinstance(dist, Normal):
        return f"point:{dist.mean!r}" if dist.variance == 0 else f"normal:{dist.mean!r}:{dist.variance!r}"
    if isinstance(dist, LogNormal):
        return f"lognormal:{dist.log_mean!r}:{dist.log_variance!r}"
    if isinstance(dist, Gamma):
        return f"gamma:{dist.shape!r}:{dist.scale!r}"
    if isinstance(dist, Exponential):
        return f"exponential:{dist.rate!r}"
    if isinstance(dist, Bernoulli):
        return f"bernoulli:{dist.p!r}"
    if isinstance(dist, Discrete):
        return "discrete:" + ";".join(repr(w) for w in dist.weights)
    raise TypeError(f"not a distribution: {dist!r}")

