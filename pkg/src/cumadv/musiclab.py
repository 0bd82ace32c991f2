"""MusicLab-style download logs and the constrained Pólya urn fit.

The urn replays the empirical order of downloads: at each logged event the
same user draws one song, never one they already drew in this replication,
and the drawn song gains ``f`` balls.  Replications run side by side as rows
of a ``(reps, S)`` weight matrix.
"""
from __future__ import annotations

import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .distributions import Distribution
from .rng import RngStream
from .urns import categorical_rows

QUARTILES = 4
COARSE_GRID = tuple(round(0.1 + 0.05 * i, 10) for i in range(11))
REFINE_STEP = 0.005


class LogFormatError(ValueError):
    pass


@dataclass(frozen=True)
class DownloadLog:
    events: tuple[tuple[str, int], ...]
    n_songs: int
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n_songs < 1:
            raise ValueError("n_songs must be positive")
        seen = set()
        for row, (user, song) in enumerate(self.events, 1):
            if not 0 <= song < self.n_songs:
                raise LogFormatError(f"event {row}: song id {song} outside 0..{self.n_songs - 1}")
            if (user, song) in seen:
                raise LogFormatError(f"event {row}: user {user!r} downloads song {song} twice")
            seen.add((user, song))

    def __len__(self) -> int:
        return len(self.events)

    def per_user_counts(self) -> Counter:
        return Counter(u for u, _ in self.events)


def ingest_log(source: TextIO | str) -> DownloadLog:
    """Parse ``user_id,song_id`` rows with optional ``#key=value`` metadata lines.

    ``#n_songs`` sets S; without it S is one more than the largest song id.
    Errors name the 1-based line number.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    meta: dict[str, str] = {}
    events: list[tuple[str, int]] = []
    lines: list[int] = []
    header = False
    for lineno, raw in enumerate(source, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].partition("=")
            if not sep:
                raise LogFormatError(f"line {lineno}: metadata must look like #key=value")
            meta[key.strip()] = val.strip()
            continue
        if not header:
            if [c.strip() for c in line.split(",")] != ["user_id", "song_id"]:
                raise LogFormatError(f"line {lineno}: expected header 'user_id,song_id'")
            header = True
            continue
        parts = [c.strip() for c in line.split(",")]
        if len(parts) != 2 or not parts[0]:
            raise LogFormatError(f"line {lineno}: malformed row {line!r}")
        try:
            song = int(parts[1])
        except ValueError:
            raise LogFormatError(f"line {lineno}: song id {parts[1]!r} is not an integer") from None
        events.append((parts[0], song))
        lines.append(lineno)
    if not header:
        raise LogFormatError("missing header 'user_id,song_id'")
    if "n_songs" in meta:
        try:
            n_songs = int(meta["n_songs"])
        except ValueError:
            raise LogFormatError(f"n_songs must be an integer, got {meta['n_songs']!r}") from None
    elif events:
        n_songs = max(s for _, s in events) + 1
    else:
        raise LogFormatError("empty log needs a #n_songs= line")
    seen = set()
    for (user, song), lineno in zip(events, lines):
        if not 0 <= song < n_songs:
            raise LogFormatError(f"line {lineno}: song id {song} outside 0..{n_songs - 1}")
        if (user, song) in seen:
            raise LogFormatError(f"line {lineno}: duplicate download of song {song} by user {user!r}")
        seen.add((user, song))
    return DownloadLog(tuple(events), n_songs, meta)


def write_log(log: DownloadLog, out: TextIO) -> None:
    meta = {"n_songs": log.n_songs, **{k: v for k, v in log.metadata.items() if k != "n_songs"}}
    for k, v in meta.items():
        out.write(f"#{k}={v}\n")
    out.write("user_id,song_id\n")
    for user, song in log.events:
        out.write(f"{user},{song}\n")


def log_to_csv(log: DownloadLog) -> str:
    buf = io.StringIO()
    write_log(log, buf)
    return buf.getvalue()


def quartile_bounds(total: int) -> list[tuple[int, int]]:
    """Four consecutive blocks; earlier blocks take the larger size."""
    base, extra = divmod(total, QUARTILES)
    bounds, start = [], 0
    for q in range(QUARTILES):
        size = base + (1 if q < extra else 0)
        bounds.append((start, start + size))
        start += size
    return bounds


def _quartile_of_event(total: int) -> np.ndarray:
    out = np.empty(total, dtype=np.int64)
    for q, (lo, hi) in enumerate(quartile_bounds(total)):
        out[lo:hi] = q
    return out


@dataclass(frozen=True)
class UrnRunResult:
    counts_over_time: np.ndarray  # (4, S)
    total_downloads: int


def empirical_counts(log: DownloadLog) -> np.ndarray:
    """Per-quartile per-song download counts of the log itself, shape (4, S)."""
    songs = np.array([[s for _, s in log.events]], dtype=np.int64).reshape(1, -1)
    return quartile_counts(songs, log.n_songs)[0]


def _check_users(log: DownloadLog) -> None:
    for user, k in log.per_user_counts().items():
        if k > log.n_songs:
            raise ValueError(f"user {user!r} downloads {k} songs but only {log.n_songs} exist")


def simulate_urn_draws(log: DownloadLog, f: float, reps: int, rng: RngStream) -> np.ndarray:
    """Song drawn at every logged event, for ``reps`` replications: shape ``(reps, D)``."""
    if not f >= 0:
        raise ValueError("f must be non-negative")
    _check_users(log)
    S = log.n_songs
    weights = np.ones((reps, S))
    out = np.zeros((reps, len(log)), dtype=np.int64)
    last = {user: i for i, (user, _) in enumerate(log.events)}
    drawn: dict[str, np.ndarray] = {}
    rows = np.arange(reps)
    gen = rng.generator
    for i, (user, _) in enumerate(log.events):
        mask = drawn.get(user)
        w = weights if mask is None else np.where(mask, 0.0, weights)
        song = categorical_rows(w, gen.random(reps))
        weights[rows, song] += f
        out[:, i] = song
        if last[user] != i:
            if mask is None:
                mask = drawn[user] = np.zeros((reps, S), dtype=bool)
            mask[rows, song] = True
        else:
            drawn.pop(user, None)
    return out


def quartile_counts(draws: np.ndarray, n_songs: int) -> np.ndarray:
    """(reps, D) drawn songs -> (reps, 4, S) per-quartile counts."""
    reps, total = draws.shape
    quart = _quartile_of_event(total)
    flat = (np.arange(reps)[:, None] * QUARTILES + quart[None, :]) * n_songs + draws
    counts = np.bincount(flat.ravel(), minlength=reps * QUARTILES * n_songs)
    return counts.reshape(reps, QUARTILES, n_songs)


def simulate_urn_counts(log: DownloadLog, f: float, reps: int, rng: RngStream) -> np.ndarray:
    """Quartile counts of ``reps`` urn replications, shape ``(reps, 4, S)``."""
    return quartile_counts(simulate_urn_draws(log, f, reps, rng), log.n_songs)


def simulate_urn_replication(log: DownloadLog, f: float, rng: RngStream) -> UrnRunResult:
    if not f >= 0:
        raise ValueError("f must be non-negative")
    counts = simulate_urn_counts(log, f, 1, rng)[0]
    return UrnRunResult(counts, len(log))


def _sorted_pct(counts: np.ndarray) -> np.ndarray:
    """Descending percentages along the last axis; ties keep song-id order."""
    totals = counts.sum(axis=-1, keepdims=True)
    pct = 100.0 * counts / totals
    # stable sort on negated values: equal counts stay in ascending song id
    order = np.argsort(-counts, axis=-1, kind="stable")
    return np.take_along_axis(pct, order, axis=-1)


def rank_proportions(result: UrnRunResult, quartile: int) -> list[float]:
    if not 1 <= quartile <= QUARTILES:
        raise ValueError("quartile must be 1..4")
    counts = np.asarray(result.counts_over_time[quartile - 1])
    if counts.sum() == 0:
        raise ValueError(f"quartile {quartile} has no downloads")
    return _sorted_pct(counts).tolist()


def empirical_rank_table(log: DownloadLog) -> np.ndarray:
    counts = empirical_counts(log)
    if np.any(counts.sum(axis=1) == 0):
        raise ValueError("every quartile needs at least one download")
    return _sorted_pct(counts)


def simulated_rank_tables(log: DownloadLog, f: float, reps: int, rng: RngStream) -> np.ndarray:
    """Rank-proportion tables, shape ``(reps, 4, S)``."""
    return _sorted_pct(simulate_urn_counts(log, f, reps, rng))


@dataclass
class FitResult:
    f_star: float
    losses: dict
    grid: list
    reps_per_point: int
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps({"grid": self.grid, "losses": {repr(k): v for k, v in self.losses.items()},
                           "f_star": self.f_star, "reps": self.reps_per_point, "seed": self.seed},
                          sort_keys=True, indent=2)


def fit_loss(log: DownloadLog, f: float, reps: int, rng: RngStream, empirical: np.ndarray | None = None) -> float:
    """Sum over quartiles and ranks of |empirical - mean simulated| proportion (in %)."""
    emp = empirical_rank_table(log) if empirical is None else empirical
    sim = simulated_rank_tables(log, f, reps, rng).mean(axis=0)
    return float(np.abs(emp - sim).sum())


def refine_grid(center: float, coarse_step: float, step: float = REFINE_STEP) -> list[float]:
    k = int(round(coarse_step / step))
    vals = [round(center + j * step, 10) for j in range(-k, k + 1)]
    return [v for v in vals if v > 0]


def fit_f(log: DownloadLog, grid: Sequence[float], reps_per_point: int, rng: RngStream,
          refine_step: float | None = REFINE_STEP) -> FitResult:
    """Grid search for the reinforcement ``f``; optional refinement around the coarse minimum.

    Every grid value is scored with the same child stream (common random
    numbers), so loss differences reflect ``f`` rather than simulation noise.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("grid must not be empty")
    if reps_per_point < 1:
        raise ValueError("reps_per_point must be >= 1")
    emp = empirical_rank_table(log)
    losses: dict[float, float] = {}

    def score(values):
        for f in values:
            if f not in losses:
                losses[f] = fit_loss(log, f, reps_per_point, rng.split(0), emp)

    score(grid)
    best = min(grid, key=lambda g: (losses[g], g))
    if refine_step and len(grid) > 1:
        steps = np.diff(sorted(set(grid)))
        coarse = float(steps.min()) if steps.size else refine_step
        score(refine_grid(best, coarse, refine_step))
    evaluated = sorted(losses)
    f_star = min(evaluated, key=lambda g: (losses[g], g))
    return FitResult(f_star, {f: losses[f] for f in evaluated}, evaluated, reps_per_point, rng.seed)


@dataclass(frozen=True)
class IntervalRow:
    mean: float
    low: float
    high: float


def nearest_rank_indices(reps: int, level: float) -> tuple[int, int]:
    """0-based order-statistic indices of a symmetric nearest-rank interval."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    k = max(1, math.ceil(round((1 - level) / 2 * reps, 9)))
    return k - 1, reps - k


def interval_report(log: DownloadLog, f: float, reps: int, level: float, rng: RngStream) -> dict:
    """Per quartile and rank, the mean and symmetric interval of simulated proportions.

    Returns ``{"mean", "low", "high"}`` arrays of shape (4, S) plus the
    quantile convention used.
    """
    tables = simulated_rank_tables(log, f, reps, rng)
    lo_i, hi_i = nearest_rank_indices(reps, level)
    srt = np.sort(tables, axis=0)
    return {
        "mean": tables.mean(axis=0),
        "low": srt[lo_i],
        "high": srt[hi_i],
        "level": level,
        "reps": reps,
        "f": f,
        "quantile_convention": f"nearest-rank order statistics {lo_i + 1} and {hi_i + 1} of {reps}",
    }


def interval_rows(report: dict, quartile: int) -> list[IntervalRow]:
    q = quartile - 1
    return [IntervalRow(float(m), float(lo), float(hi))
            for m, lo, hi in zip(report["mean"][q], report["low"][q], report["high"][q])]


def coverage(log: DownloadLog, report: dict) -> float:
    """Share of empirical (quartile, rank) points inside the simulated intervals."""
    emp = empirical_rank_table(log)
    inside = (emp >= report["low"] - 1e-12) & (emp <= report["high"] + 1e-12)
    return float(inside.mean())


def write_quartile_csv(log: DownloadLog, report: dict, quartile: int, out: TextIO, header: dict | None = None) -> None:
    emp = empirical_rank_table(log)[quartile - 1]
    for k, v in (header or {}).items():
        out.write(f"#{k}={v}\n")
    out.write(f"#quartile={quartile}\n#interval={report['quantile_convention']}\n")
    out.write("rank,empirical_pct,sim_mean_pct,sim_low_pct,sim_high_pct\n")
    q = quartile - 1
    for r in range(log.n_songs):
        out.write(f"{r + 1},{emp[r]:.6f},{report['mean'][q][r]:.6f},{report['low'][q][r]:.6f},"
                  f"{report['high'][q][r]:.6f}\n")


def synth_fixture(S: int, users: Sequence[int], talent_dist: Distribution, rng: RngStream,
                  user_prefix: str = "u") -> DownloadLog:
    """Talent-only log: fixed song appeal, no influence between users."""
    if any(k > S or k < 0 for k in users):
        raise ValueError("each user's download count must lie in 0..S")
    talent = np.asarray(talent_dist.draw(rng, S), dtype=float)
    if np.any(talent <= 0):
        raise ValueError("talent weights must be positive")
    gen = rng.generator
    events = []
    width = len(str(len(users)))
    for i, k in enumerate(users):
        user = f"{user_prefix}{i + 1:0{width}d}"
        w = talent.copy()
        for _ in range(k):
            song = int(categorical_rows(w[None, :], gen.random(1))[0])
            w[song] = 0.0
            events.append((user, song))
    return DownloadLog(tuple(events), S, {"source": "talent-fixture"})


def urn_fixture(S: int, users: Sequence[int], f: float, rng: RngStream, user_prefix: str = "u") -> DownloadLog:
    """Log generated by the constrained urn itself; each user's downloads are contiguous."""
    if any(k > S or k < 0 for k in users):
        raise ValueError("each user's download count must lie in 0..S")
    width = len(str(len(users)))
    order = [f"{user_prefix}{i + 1:0{width}d}" for i, k in enumerate(users) for _ in range(k)]
    weights = np.ones(S)
    drawn: dict[str, list] = {}
    gen = rng.generator
    events = []
    for user in order:
        taken = drawn.setdefault(user, [])
        w = weights.copy()
        w[taken] = 0.0
        song = int(categorical_rows(w[None, :], gen.random(1))[0])
        weights[song] += f
        taken.append(song)
        events.append((user, song))
    return DownloadLog(tuple(events), S, {"source": "urn-fixture", "f": f})
