"""Log-space Q-model of citations and its purely path-dependent twin.

The twin draws each value from a normal law whose mean is a shrunken running
average of the past, so earlier successes raise later expectations.  With
the parameter mapping in :func:`twin_from_q` the two models share their joint
law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import RngStream
from .sequence import SequenceSample


@dataclass(frozen=True)
class QModelParams:
    mu_T: float
    sigma_T: float
    sigma_X: float

    def __post_init__(self):
        if not (self.sigma_T > 0 and self.sigma_X > 0):
            raise ValueError("sigma_T and sigma_X must be strictly positive")


@dataclass(frozen=True)
class TwinParams:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.b > 0 and self.c > 0):
            raise ValueError("b and c must be strictly positive")


def twin_from_q(params: QModelParams) -> TwinParams:
    b = params.sigma_X ** 2
    return TwinParams(a=params.mu_T, b=b, c=b / params.sigma_T ** 2)


def q_from_twin(params: TwinParams) -> QModelParams:
    return QModelParams(mu_T=params.a, sigma_T=math.sqrt(params.b / params.c), sigma_X=math.sqrt(params.b))


def twin_conditional_law(params: TwinParams, history: Sequence[float]) -> tuple[float, float]:
    """Mean and variance of the next value given ``history``."""
    n = len(history)
    total = float(np.sum(history)) if n else 0.0
    mean = (params.c * params.a + total) / (n + params.c)
    var = params.b * (1.0 + 1.0 / (n + params.c))
    return mean, var


def q_model_paths(params: QModelParams, n: int, reps: int, rng: RngStream) -> np.ndarray:
    gen = rng.generator
    talent = gen.normal(params.mu_T, params.sigma_T, reps)
    luck = gen.normal(0.0, params.sigma_X, (reps, n))
    return talent[:, None] + luck


def q_model_sequence(params: QModelParams, n: int, rng: RngStream) -> SequenceSample:
    return SequenceSample(q_model_paths(params, n, 1, rng)[0], "q-model", "real")


def twin_paths(params: TwinParams, n: int, reps: int, rng: RngStream) -> np.ndarray:
    out = np.empty((reps, n))
    total = np.zeros(reps)
    gen = rng.generator
    for k in range(n):
        mean = (params.c * params.a + total) / (k + params.c)
        sd = math.sqrt(params.b * (1.0 + 1.0 / (k + params.c)))
        y = mean + sd * gen.standard_normal(reps)
        out[:, k] = y
        total += y
    return out


def twin_sequence(params: TwinParams, n: int, rng: RngStream) -> SequenceSample:
    return SequenceSample(twin_paths(params, n, 1, rng)[0], "twin", "real")


def to_citation_counts(sample: SequenceSample) -> SequenceSample:
    if sample.kind != "real":
        raise ValueError("expected a real-valued log-space sample")
    return SequenceSample(np.exp(sample.values), sample.model_id + ":counts", "real")


def twin_conditional_moments(params: TwinParams, histories: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise :func:`twin_conditional_law` for an ``(N, n)`` array of histories."""
    h = np.asarray(histories, dtype=float)
    n = h.shape[1]
    mean = (params.c * params.a + h.sum(axis=1)) / (n + params.c)
    var = np.full(h.shape[0], params.b * (1.0 + 1.0 / (n + params.c)))
    return mean, var
