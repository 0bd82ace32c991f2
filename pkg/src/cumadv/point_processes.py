"""Contagious Poisson process and its Gamma-mixed Poisson twin.

Simulation is exact: the contagious process is a pure-birth chain sampled by
exponential waiting times, and the mixed process maps unit-rate arrivals
through the inverse cumulative intensity.  No time grid is involved.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .rng import RngStream

MAX_EVENTS = 1_000_000
MIN_RATE = 1e-300


class EventCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class PointProcessParams:
    alpha: float
    beta: float
    horizon: float

    def __post_init__(self):
        for name in ("alpha", "beta", "horizon"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a finite positive number, got {v}")

    @property
    def gamma_shape(self) -> float:
        return self.alpha / self.beta


@dataclass(frozen=True)
class EventTimeline:
    times: np.ndarray
    horizon: float
    model_id: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1:
            raise ValueError("event times must be 1-d")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if t.size and (np.any(np.diff(t) <= 0) or t[0] <= 0 or t[-1] > self.horizon):
            raise ValueError("event times must be strictly increasing within (0, horizon]")
        object.__setattr__(self, "times", t)

    def __len__(self) -> int:
        return int(self.times.size)


def expand_time(t, beta: float):
    """(e^{beta t} - 1) / beta."""
    return np.expm1(beta * np.asarray(t, dtype=float)) / beta


def compress_time(t, beta: float):
    """ln(1 + beta t) / beta, the inverse of :func:`expand_time`."""
    return np.log1p(beta * np.asarray(t, dtype=float)) / beta


def _meta(params: PointProcessParams) -> dict:
    return {"alpha": params.alpha, "beta": params.beta, "horizon": params.horizon}


def contagious_poisson(params: PointProcessParams, rng: RngStream) -> EventTimeline:
    """Pure-birth chain with rate ``alpha + beta * count``."""
    gen = rng.generator
    times = []
    t = 0.0
    k = 0
    while True:
        t += gen.standard_exponential() / (params.alpha + params.beta * k)
        if t > params.horizon:
            break
        times.append(t)
        k += 1
        if k > MAX_EVENTS:
            raise EventCapExceeded(f"more than {MAX_EVENTS} events before horizon {params.horizon}")
    return EventTimeline(np.array(times), params.horizon, "contagious-poisson", _meta(params))


def draw_talent(params: PointProcessParams, rng: RngStream, size=None):
    """Gamma(alpha/beta, scale=beta) rates, redrawing values below ``MIN_RATE``."""
    gen = rng.generator
    q = gen.gamma(params.gamma_shape, params.beta, size)
    if size is None:
        while q < MIN_RATE:
            q = gen.gamma(params.gamma_shape, params.beta)
        return float(q)
    bad = q < MIN_RATE
    while bad.any():
        q[bad] = gen.gamma(params.gamma_shape, params.beta, int(bad.sum()))
        bad = q < MIN_RATE
    return q


def _unit_arrivals(limit: float, rng: RngStream) -> np.ndarray:
    """Arrival times of a unit-rate Poisson process on [0, limit]."""
    gen = rng.generator
    chunks = []
    t = 0.0
    total = 0
    chunk = max(16, int(limit + 4 * math.sqrt(limit) + 8))
    while t <= limit:
        arr = t + np.cumsum(gen.standard_exponential(chunk))
        chunks.append(arr)
        t = arr[-1]
        total += chunk
        if total > MAX_EVENTS and t <= limit:
            raise EventCapExceeded(f"more than {MAX_EVENTS} events in mixed process")
    arr = np.concatenate(chunks)
    arr = arr[arr <= limit]
    if arr.size > MAX_EVENTS:
        raise EventCapExceeded(f"more than {MAX_EVENTS} events in mixed process")
    return arr


def mixed_poisson_twin(params: PointProcessParams, rng: RngStream, q: float | None = None) -> EventTimeline:
    """Non-homogeneous Poisson process with intensity ``Q e^{beta t}``.

    ``q`` fixes the talent instead of drawing it from Gamma(alpha/beta, beta).
    """
    if q is None:
        q = draw_talent(params, rng)
    elif not q > 0:
        raise ValueError("q must be positive")
    u = _unit_arrivals(q * float(expand_time(params.horizon, params.beta)), rng)
    # invert the cumulative intensity q (e^{beta t} - 1) / beta
    times = compress_time(u / q, params.beta)
    times = times[(times > 0) & (times <= params.horizon)]
    meta = _meta(params) | {"q": q}
    return EventTimeline(times, params.horizon, "mixed-poisson-twin", meta)


def homogeneous_mixed_poisson(params: PointProcessParams, rng: RngStream) -> EventTimeline:
    """Constant rate drawn once from Gamma(alpha/beta, beta)."""
    lam = draw_talent(params, rng)
    u = _unit_arrivals(lam * params.horizon, rng)
    times = u / lam
    times = times[(times > 0) & (times <= params.horizon)]
    return EventTimeline(times, params.horizon, "homogeneous-mixed-poisson", _meta(params) | {"rate": lam})


def count_at(timeline: EventTimeline, t: float) -> int:
    if not 0 <= t <= timeline.horizon:
        raise ValueError(f"t={t} outside [0, {timeline.horizon}]")
    return int(np.searchsorted(timeline.times, t, side="right"))


def time_rescale(timeline: EventTimeline, beta: float, direction: str) -> EventTimeline:
    """Apply ``compress`` (ln(1+beta t)/beta) or ``expand`` ((e^{beta t}-1)/beta) to every time."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    if direction == "compress":
        fn = compress_time
    elif direction == "expand":
        fn = expand_time
    else:
        raise ValueError(f"direction must be 'compress' or 'expand', got {direction!r}")
    times = fn(timeline.times, beta)
    horizon = float(fn(timeline.horizon, beta))
    # guard against rounding pushing the last event past the mapped horizon
    times = np.minimum(times, horizon)
    meta = dict(timeline.meta) | {"rescaled": direction, "rescale_beta": beta}
    return EventTimeline(times, horizon, timeline.model_id, meta)


# -- vectorized counts on a time grid ---------------------------------------

def _check_grid(times: Sequence[float], horizon: float) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) < 0) or t[0] < 0 or t[-1] > horizon:
        raise ValueError("grid times must be sorted within [0, horizon]")
    return t


def contagious_counts(params: PointProcessParams, times: Sequence[float], reps: int, rng: RngStream) -> np.ndarray:
    """Counts ``X_t`` at each grid time for ``reps`` independent chains."""
    grid = _check_grid(times, params.horizon)
    gen = rng.generator
    counts = np.zeros((reps, grid.size), dtype=np.int64)
    now = np.zeros(reps)
    idx = np.arange(reps)
    k = 0
    while idx.size:
        now[idx] += gen.standard_exponential(idx.size) / (params.alpha + params.beta * k)
        hit = now[idx] <= params.horizon
        idx = idx[hit]
        counts[idx] += now[idx, None] <= grid[None, :]
        k += 1
        if k > MAX_EVENTS:
            raise EventCapExceeded(f"more than {MAX_EVENTS} events before horizon")
    return counts


def mixed_twin_counts(params: PointProcessParams, times: Sequence[float], reps: int, rng: RngStream) -> np.ndarray:
    """Counts ``N_t`` at each grid time; Poisson increments given the talent."""
    grid = _check_grid(times, params.horizon)
    q = draw_talent(params, rng, reps)
    cum = expand_time(grid, params.beta)
    inc = np.diff(np.concatenate([[0.0], cum]))
    return np.cumsum(rng.generator.poisson(q[:, None] * inc[None, :]), axis=1)


def homogeneous_mixed_counts(params: PointProcessParams, times: Sequence[float], reps: int, rng: RngStream) -> np.ndarray:
    grid = _check_grid(times, params.horizon)
    lam = draw_talent(params, rng, reps)
    inc = np.diff(np.concatenate([[0.0], grid]))
    return np.cumsum(rng.generator.poisson(lam[:, None] * inc[None, :]), axis=1)


def expected_count(params: PointProcessParams, t: float) -> float:
    """alpha (e^{beta t} - 1) / beta, shared by both twins."""
    return params.alpha * math.expm1(params.beta * t) / params.beta


# -- CSV ---------------------------------------------------------------------

def write_timeline_csv(timeline: EventTimeline, out: TextIO, extra: dict | None = None) -> None:
    header = {"model": timeline.model_id, **timeline.meta, "horizon": timeline.horizon, **(extra or {})}
    for key, val in header.items():
        out.write(f"#{key}={val}\n")
    out.write("time\n")
    for t in timeline.times:
        out.write(f"{float(t)!r}\n")


def read_timeline_csv(source: TextIO) -> EventTimeline:
    meta = {}
    times = []
    seen_header = False
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
            continue
        if not seen_header:
            if line != "time":
                raise ValueError(f"line {lineno}: expected header 'time'")
            seen_header = True
            continue
        try:
            times.append(float(line))
        except ValueError:
            raise ValueError(f"line {lineno}: bad event time {line!r}") from None
    if "horizon" not in meta:
        raise ValueError("timeline CSV lacks a #horizon= line")
    horizon = float(meta.pop("horizon"))
    model = meta.pop("model", "")
    return EventTimeline(np.array(times), horizon, model, meta)


def timeline_to_csv(timeline: EventTimeline, extra: dict | None = None) -> str:
    buf = io.StringIO()
    write_timeline_csv(timeline, buf, extra)
    return buf.getvalue()
