"""Discrete-time reinforcement and talent generators.

Every model has a vectorized ``*_paths`` function returning an array of
shape ``(reps, n)`` and a single-realization wrapper returning a
:class:`SequenceSample`.  The wrappers use the batch path with ``reps=1`` so
both routes consume the stream identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .distributions import Distribution, Uniform
from .rng import RngStream
from .sequence import SequenceSample


def categorical_rows(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index drawn from each row of ``weights`` using uniforms ``u``."""
    cum = np.cumsum(weights, axis=1)
    total = cum[:, -1]
    # strict target < total keeps zero-weight entries unreachable
    target = np.minimum(u * total, np.nextafter(total, 0))
    return (cum <= target[:, None]).sum(axis=1)


@dataclass(frozen=True)
class UrnState:
    counts: tuple[float, ...]
    reinforcement: tuple[float, ...] | None = None

    def __post_init__(self):
        counts = tuple(float(c) for c in self.counts)
        reinf = self.reinforcement
        reinf = tuple(1.0 for _ in counts) if reinf is None else tuple(float(r) for r in reinf)
        if len(counts) < 2:
            raise ValueError("an urn needs at least 2 colors")
        if len(reinf) != len(counts):
            raise ValueError("reinforcement must have one entry per color")
        if any(not c > 0 for c in counts):
            raise ValueError("every ball count must be > 0")
        if any(r < 0 for r in reinf):
            raise ValueError("reinforcement must be non-negative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "reinforcement", reinf)

    @property
    def total(self) -> float:
        return sum(self.counts)

    def add(self, color: int) -> UrnState:
        counts = list(self.counts)
        counts[color] += self.reinforcement[color]
        return UrnState(tuple(counts), self.reinforcement)


def polya_draw(state: UrnState, rng: RngStream) -> tuple[int, UrnState]:
    w = np.asarray(state.counts)[None, :]
    color = int(categorical_rows(w, rng.generator.random(1))[0])
    return color, state.add(color)


# -- binary Pólya urn -------------------------------------------------------

def polya_binary_paths(n: int, reps: int, rng: RngStream, ones: float = 1.0, zeros: float = 1.0) -> np.ndarray:
    """``Y_k = 1`` when the 'ones' color is drawn; unit reinforcement."""
    out = np.zeros((reps, n), dtype=np.int8)
    s = np.zeros(reps)
    gen = rng.generator
    for k in range(n):
        p = (ones + s) / (ones + zeros + k)
        y = gen.random(reps) < p
        out[:, k] = y
        s += y
    return out


def polya_binary_sequence(n: int, rng: RngStream) -> SequenceSample:
    return SequenceSample(polya_binary_paths(n, 1, rng)[0].astype(np.int64), "polya-binary", "integer")


# -- stationary talent, binary outcome -------------------------------------

@dataclass(frozen=True)
class TalentBinaryParams:
    talent_dist: Distribution

    def __post_init__(self):
        lo, hi = self.talent_dist.support()
        if lo < 0 or hi > 1:
            raise ValueError("talent distribution must be supported within [0, 1]")


def talent_binary_paths(params: TalentBinaryParams, n: int, reps: int, rng: RngStream) -> np.ndarray:
    p = np.asarray(params.talent_dist.draw(rng, reps), dtype=float)
    u = rng.generator.random((reps, n))
    return (u < p[:, None]).astype(np.int8)


def talent_binary_sequence(params: TalentBinaryParams, n: int, rng: RngStream) -> SequenceSample:
    vals = talent_binary_paths(params, n, 1, rng)[0].astype(np.int64)
    return SequenceSample(vals, "talent-binary", "integer")


def iid_bernoulli_paths(p: float, n: int, reps: int, rng: RngStream) -> np.ndarray:
    return (rng.generator.random((reps, n)) < p).astype(np.int8)


# -- Price's urn -------------------------------------------------------------

def price_paths(n: int, reps: int, rng: RngStream) -> np.ndarray:
    out = np.zeros((reps, n), dtype=np.int8)
    alive = np.ones(reps, dtype=bool)
    gen = rng.generator
    for k in range(1, n + 1):
        u = gen.random(reps)
        alive = alive & (u < k / (k + 1))
        out[:, k - 1] = alive
    return out


def price_sequence(n: int, rng: RngStream) -> SequenceSample:
    return SequenceSample(price_paths(n, 1, rng)[0].astype(np.int64), "price", "integer")


# -- Simon model, focal word -------------------------------------------------

def simon_probability(alpha: float, n_r0: int, k0: int, k: int, s: float) -> float:
    """P(focal word at step ``k`` | ``s`` earlier occurrences), ``k`` 1-based."""
    return (1.0 - alpha) * (n_r0 + s) / (k - 1 + k0)


def _check_simon(alpha, n_r0, k0):
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if n_r0 < 1 or k0 < 1 or n_r0 > k0:
        raise ValueError("need 1 <= n_R0 <= K0")


def simon_paths(alpha: float, n_r0: int, k0: int, n: int, reps: int, rng: RngStream) -> np.ndarray:
    _check_simon(alpha, n_r0, k0)
    out = np.zeros((reps, n), dtype=np.int8)
    s = np.zeros(reps)
    gen = rng.generator
    for k in range(1, n + 1):
        y = gen.random(reps) < simon_probability(alpha, n_r0, k0, k, s)
        out[:, k - 1] = y
        s += y
    return out


def simon_occurrence_sequence(alpha: float, n_r0: int, k0: int, n: int, rng: RngStream) -> SequenceSample:
    vals = simon_paths(alpha, n_r0, k0, n, 1, rng)[0].astype(np.int64)
    return SequenceSample(vals, "simon", "integer")


# -- Barabási–Albert focal node ----------------------------------------------

def ba_degree_paths(m0: int, t_entry: int, t_end: int, reps: int, rng: RngStream) -> np.ndarray:
    """Degree of the node entering at ``t_entry``, observed at ``t = 1..t_end``."""
    if m0 < 1 or t_entry < 1:
        raise ValueError("m0 and t_entry must be positive")
    if t_entry > t_end:
        raise ValueError("t_entry must not exceed t_end")
    out = np.zeros((reps, t_end), dtype=np.int64)
    deg = np.zeros(reps)
    gen = rng.generator
    for t in range(1, t_end + 1):
        if t == t_entry:
            deg[:] = 1
        elif t > t_entry:
            deg += gen.random(reps) < deg / (2.0 * (t + m0))
        out[:, t - 1] = deg
    return out


def ba_degree_sequence(m0: int, t_entry: int, t_end: int, rng: RngStream) -> SequenceSample:
    return SequenceSample(ba_degree_paths(m0, t_entry, t_end, 1, rng)[0], "ba-degree", "integer")


# -- Gibrat -----------------------------------------------------------------

Growth = Union[Distribution, Callable[[np.ndarray], np.ndarray]]


def _growth_draws(growth: Growth, shape: tuple[int, int], rng: RngStream) -> np.ndarray:
    if callable(growth) and not hasattr(growth, "draw"):
        lo = float(growth(0.0))
        if not lo > -1:
            raise ValueError("growth quantile must stay above -1")
        return np.asarray(growth(rng.generator.random(shape)), dtype=float)
    lo, _ = growth.support()
    if not lo > -1:
        raise ValueError("growth distribution support must lie above -1")
    return np.asarray(growth.draw(rng, shape), dtype=float)


def gibrat_paths(y0: float, growth: Growth, n: int, reps: int, rng: RngStream) -> np.ndarray:
    """``Y_k = Y_{k-1} (1 + X_k)``; ``growth`` is a distribution or a quantile function."""
    if not y0 > 0:
        raise ValueError("y0 must be positive")
    x = _growth_draws(growth, (reps, n), rng)
    return y0 * np.cumprod(1.0 + x, axis=1)


def gibrat_increment_paths(y0: float, growth: Growth, n: int, reps: int, rng: RngStream) -> np.ndarray:
    levels = gibrat_paths(y0, growth, n, reps, rng)
    prev = np.concatenate([np.full((reps, 1), float(y0)), levels[:, :-1]], axis=1)
    return levels - prev


def gibrat_sequence(y0: float, growth_dist: Growth, n: int, rng: RngStream) -> SequenceSample:
    return SequenceSample(gibrat_paths(y0, growth_dist, n, 1, rng)[0], "gibrat", "real")


# -- random-typing monkey ----------------------------------------------------

@dataclass(frozen=True)
class MonkeyParams:
    space_prob: float
    alphabet_size: int
    max_length: int

    def __post_init__(self):
        if not 0 < self.space_prob < 1:
            raise ValueError("space_prob must lie in (0, 1)")
        if self.alphabet_size < 1 or self.max_length < 1:
            raise ValueError("alphabet_size and max_length must be positive")


def monkey_word_probability(params: MonkeyParams, k: int) -> float:
    return ((1.0 - params.space_prob) / params.alphabet_size) ** k * params.space_prob


def monkey_length_weights(params: MonkeyParams) -> np.ndarray:
    # N^k / sum_l N^l, computed relative to N^K to avoid overflow
    ks = np.arange(1, params.max_length + 1)
    logw = (ks - params.max_length) * math.log(params.alphabet_size)
    w = np.exp(logw)
    return w / w.sum()


def monkey_random_word_length(params: MonkeyParams, rng: RngStream) -> int:
    w = monkey_length_weights(params)[None, :]
    return int(categorical_rows(w, rng.generator.random(1))[0]) + 1


def monkey_paths(params: MonkeyParams, n: int, reps: int, rng: RngStream, word_length: int | None = None) -> np.ndarray:
    """Occurrences of a tracked word; a random length per rep when ``word_length`` is None."""
    if word_length is None:
        w = np.broadcast_to(monkey_length_weights(params), (reps, params.max_length))
        k = categorical_rows(w, rng.generator.random(reps)) + 1
    else:
        if not 1 <= word_length <= params.max_length:
            raise ValueError("word length must lie in 1..max_length")
        k = np.full(reps, word_length)
    q = ((1.0 - params.space_prob) / params.alphabet_size) ** k * params.space_prob
    return (rng.generator.random((reps, n)) < q[:, None]).astype(np.int8)


def monkey_occurrence_sequence(params: MonkeyParams, word_length: int, n: int, rng: RngStream) -> SequenceSample:
    vals = monkey_paths(params, n, 1, rng, word_length)[0].astype(np.int64)
    return SequenceSample(vals, "monkey", "integer")


# -- multicolor urn ----------------------------------------------------------

def multicolor_color_paths(init: UrnState, n: int, reps: int, rng: RngStream) -> np.ndarray:
    """Drawn color index at each step, shape ``(reps, n)``."""
    counts = np.tile(np.asarray(init.counts), (reps, 1))
    reinf = np.asarray(init.reinforcement)
    out = np.zeros((reps, n), dtype=np.int64)
    rows = np.arange(reps)
    gen = rng.generator
    for k in range(n):
        c = categorical_rows(counts, gen.random(reps))
        out[:, k] = c
        counts[rows, c] += reinf[c]
    return out


def multicolor_urn_sequence(init: UrnState, n: int, rng: RngStream) -> SequenceSample:
    colors = multicolor_color_paths(init, n, 1, rng)[0]
    onehot = np.zeros((n, len(init.counts)), dtype=np.int64)
    onehot[np.arange(n), colors] = 1
    return SequenceSample(onehot, "multicolor-urn", "vector")


def uniform_talent() -> TalentBinaryParams:
    return TalentBinaryParams(Uniform())
