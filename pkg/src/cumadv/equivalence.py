"""Operational tests of "statistically indistinguishable".

Joint laws are compared through path histograms: each coordinate of a path is
bucketed on a :class:`GridSpec` and whole paths are counted.  Two-sample
histogram comparisons use an exact label-permutation test, drawn as
multivariate hypergeometric splits of the pooled bin counts.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .generators import GeneratorSpec
from .rng import RngStream

DEFAULT_THRESHOLD = 1e-3
DEFAULT_BUCKETS = 12
DEFAULT_ROUNDS = 9999


@dataclass(frozen=True)
class GridSpec:
    """``exact`` keeps integer outcomes as they are; otherwise ``edges`` are inner cut points."""

    edges: tuple[float, ...] | None = None

    @property
    def exact(self) -> bool:
        return self.edges is None

    def discretize(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if self.exact:
            r = np.rint(values)
            if not np.array_equal(r, values):
                raise ValueError("exact grid needs integer-valued outcomes; pass a bucket grid")
            return r.astype(np.int64)
        # outer buckets extend to +-inf, so every value is covered
        return np.searchsorted(np.asarray(self.edges), values, side="right").astype(np.int64)


def exact_grid() -> GridSpec:
    return GridSpec(None)


def quantile_grid(values: np.ndarray, buckets: int = DEFAULT_BUCKETS) -> GridSpec:
    """Equal-probability buckets estimated from pooled ``values``."""
    if buckets < 1:
        raise ValueError("need at least one bucket")
    qs = np.quantile(np.asarray(values, dtype=float).ravel(), np.arange(1, buckets) / buckets)
    return GridSpec(tuple(float(x) for x in np.unique(qs)))


def default_grid(gen: GeneratorSpec, *samples: np.ndarray, buckets: int = DEFAULT_BUCKETS) -> GridSpec:
    if gen.kind == "real":
        return quantile_grid(np.concatenate([np.ravel(s) for s in samples]), buckets)
    return exact_grid()


@dataclass(frozen=True)
class PathHistogram:
    bins: dict
    total: int
    grid: GridSpec

    @classmethod
    def from_paths(cls, paths: np.ndarray, grid: GridSpec) -> PathHistogram:
        paths = np.asarray(paths)
        if paths.ndim == 1:
            paths = paths[:, None]
        disc = grid.discretize(paths)
        if disc.shape[0] == 0:
            raise ValueError("cannot build a histogram from zero paths")
        keys, counts = np.unique(disc, axis=0, return_counts=True)
        bins = {tuple(int(x) for x in k): int(c) for k, c in zip(keys, counts)}
        return cls(bins, int(disc.shape[0]), grid)

    def frequency(self, key) -> float:
        return self.bins.get(tuple(key), 0) / self.total


def tvd(h1: PathHistogram, h2: PathHistogram) -> float:
    if h1.grid != h2.grid:
        raise ValueError("histograms were built on different grids")
    keys = set(h1.bins) | set(h2.bins)
    return 0.5 * sum(abs(h1.bins.get(k, 0) / h1.total - h2.bins.get(k, 0) / h2.total) for k in keys)


def tvd_to_law(h: PathHistogram, law: dict) -> float:
    """TVD between a histogram and an exact law given as ``{bin: probability}``."""
    keys = set(h.bins) | set(law)
    return 0.5 * sum(abs(h.bins.get(k, 0) / h.total - law.get(k, 0.0)) for k in keys)


@dataclass
class ComparisonReport:
    method: str
    statistic: float
    p_value_or_distance: float
    samples_a: int
    samples_b: int
    verdict: str
    threshold: float
    measure: str = "p-value"
    details: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return self.verdict == "consistent"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_jsonable, **kw)

    def summary(self) -> str:
        return (f"{self.method}: statistic={self.statistic:.6g} {self.measure}={self.p_value_or_distance:.6g} "
                f"threshold={self.threshold:g} n=({self.samples_a},{self.samples_b}) -> {self.verdict}")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _p_report(method, statistic, p, na, nb, threshold, **details) -> ComparisonReport:
    verdict = "rejected" if p < threshold else "consistent"
    return ComparisonReport(method, float(statistic), float(p), int(na), int(nb), verdict, threshold, "p-value", details)


# -- histogram two-sample permutation test ----------------------------------

def _aligned_counts(a_disc: np.ndarray, b_disc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    both = np.concatenate([a_disc, b_disc], axis=0)
    _, inv = np.unique(both, axis=0, return_inverse=True)
    inv = inv.ravel()
    nbins = int(inv.max()) + 1
    ca = np.bincount(inv[: len(a_disc)], minlength=nbins)
    cb = np.bincount(inv[len(a_disc):], minlength=nbins)
    return ca, cb


def permutation_tvd_test(counts_a: np.ndarray, counts_b: np.ndarray, rng: RngStream,
                         rounds: int = DEFAULT_ROUNDS) -> tuple[float, float]:
    """Observed TVD and its label-permutation p-value.

    Relabelling the pooled sample at random leaves sample A with a
    multivariate hypergeometric share of each bin, so rounds cost O(bins).
    """
    ca = np.asarray(counts_a, dtype=np.int64)
    cb = np.asarray(counts_b, dtype=np.int64)
    na, nb = int(ca.sum()), int(cb.sum())
    observed = 0.5 * np.abs(ca / na - cb / nb).sum()
    pooled = ca + cb
    keep = pooled > 0
    pooled = pooled[keep]
    if pooled.size <= 1:
        return float(observed), 1.0
    gen = rng.generator
    exceed = 0
    done = 0
    chunk = max(1, min(rounds, 2_000_000 // pooled.size))
    while done < rounds:
        size = min(chunk, rounds - done)
        xa = gen.multivariate_hypergeometric(pooled, na, size=size, method="marginals")
        xb = pooled[None, :] - xa
        t = 0.5 * np.abs(xa / na - xb / nb).sum(axis=1)
        exceed += int(np.count_nonzero(t >= observed - 1e-12))
        done += size
    return float(observed), (1 + exceed) / (rounds + 1)


def compare_paths(a: np.ndarray, b: np.ndarray, grid: GridSpec, rng: RngStream, rounds: int = DEFAULT_ROUNDS,
                  threshold: float = DEFAULT_THRESHOLD, method: str = "path-tvd-permutation") -> ComparisonReport:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim == 1:
        a, b = a[:, None], b[:, None]
    ca, cb = _aligned_counts(grid.discretize(a), grid.discretize(b))
    stat, p = permutation_tvd_test(ca, cb, rng, rounds)
    return _p_report(method, stat, p, len(a), len(b), threshold, tvd=stat, rounds=rounds, bins=int(ca.size),
                     grid=list(grid.edges) if grid.edges is not None else "exact")


def empirical_path_distribution(gen: GeneratorSpec, m: int, reps: int, grid: GridSpec | None,
                                rng: RngStream) -> PathHistogram:
    if m < 1 or reps < 1:
        raise ValueError("length and reps must be >= 1")
    paths = gen.sample_paths(m, reps, rng)
    if grid is None:
        grid = default_grid(gen, paths)
    return PathHistogram.from_paths(paths, grid)


def compare_generators(gen_a: GeneratorSpec, gen_b: GeneratorSpec, m: int, reps: int, rng: RngStream,
                       grid: GridSpec | None = None, rounds: int = DEFAULT_ROUNDS,
                       threshold: float = DEFAULT_THRESHOLD) -> ComparisonReport:
    """Path-law comparison of two generators on independent child streams."""
    a = gen_a.sample_paths(m, reps, rng.split(0))
    b = gen_b.sample_paths(m, reps, rng.split(1))
    if grid is None:
        kinds = {gen_a.kind, gen_b.kind}
        if "real" in kinds:
            grid = quantile_grid(np.concatenate([a.ravel(), b.ravel()]))
        else:
            grid = exact_grid()
    report = compare_paths(a, b, grid, rng.split(2), rounds, threshold)
    report.details.update(a=gen_a.describe(), b=gen_b.describe(), length=m)
    return report


# -- classical tests --------------------------------------------------------

def _pool_cells(observed: np.ndarray, expected: np.ndarray, min_expected: float):
    small = expected < min_expected
    if not small.any():
        return observed, expected
    big_o, big_e = observed[~small], expected[~small]
    tail_o, tail_e = observed[small].sum(), expected[small].sum()
    if tail_e < min_expected and big_e.size:
        j = int(np.argmin(big_e))
        tail_o += big_o[j]
        tail_e += big_e[j]
        big_o, big_e = np.delete(big_o, j), np.delete(big_e, j)
    return np.append(big_o, tail_o), np.append(big_e, tail_e)


def chi_square_gof(observed: Sequence[float], expected: Sequence[float], threshold: float = DEFAULT_THRESHOLD,
                   min_expected: float = 5.0) -> ComparisonReport:
    """Pearson goodness of fit; ``expected`` are cell probabilities."""
    obs = np.asarray(observed, dtype=float)
    prob = np.asarray(expected, dtype=float)
    if obs.shape != prob.shape or obs.ndim != 1:
        raise ValueError("observed and expected must be 1-d and of equal length")
    if abs(prob.sum() - 1.0) > 1e-9 or np.any(prob < 0):
        raise ValueError("expected probabilities must be non-negative and sum to 1")
    n = obs.sum()
    o, e = _pool_cells(obs, prob * n, min_expected)
    if o.size < 2:
        raise ValueError("chi-square needs at least two cells after pooling")
    stat = float(((o - e) ** 2 / e).sum())
    df = o.size - 1
    p = float(stats.chi2.sf(stat, df))
    return _p_report("chi-square-gof", stat, p, int(n), int(n), threshold, df=df, cells=int(o.size))


def chi_square_homogeneity(counts_a: np.ndarray, counts_b: np.ndarray, threshold: float = DEFAULT_THRESHOLD,
                           min_expected: float = 5.0) -> ComparisonReport:
    """Two-sample chi-square on aligned histogram counts; sparse cells pooled."""
    ca = np.asarray(counts_a, dtype=float).ravel()
    cb = np.asarray(counts_b, dtype=float).ravel()
    na, nb = ca.sum(), cb.sum()
    pooled = ca + cb
    order = np.argsort(-pooled, kind="stable")
    ca, cb, pooled = ca[order], cb[order], pooled[order]
    ea = pooled * na / (na + nb)
    eb = pooled * nb / (na + nb)
    small = (ea < min_expected) | (eb < min_expected)
    if small.any():
        ca = np.append(ca[~small], ca[small].sum())
        cb = np.append(cb[~small], cb[small].sum())
        pooled = ca + cb
        ea = pooled * na / (na + nb)
        eb = pooled * nb / (na + nb)
        if min(ea[-1], eb[-1]) < min_expected and ca.size > 2:
            ca = np.append(ca[:-2], ca[-2:].sum())
            cb = np.append(cb[:-2], cb[-2:].sum())
            pooled = ca + cb
            ea = pooled * na / (na + nb)
            eb = pooled * nb / (na + nb)
    if ca.size < 2:
        raise ValueError("chi-square needs at least two cells after pooling")
    stat = float(((ca - ea) ** 2 / ea).sum() + ((cb - eb) ** 2 / eb).sum())
    df = ca.size - 1
    p = float(stats.chi2.sf(stat, df))
    return _p_report("chi-square-homogeneity", stat, p, int(na), int(nb), threshold, df=df, cells=int(ca.size))


def ks_two_sample(a: Sequence[float], b: Sequence[float], threshold: float = DEFAULT_THRESHOLD) -> ComparisonReport:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    en = a.size * b.size / (a.size + b.size)
    p = float(stats.kstwobign.sf(math.sqrt(en) * d)) if d > 0 else 1.0
    return _p_report("ks-two-sample", d, p, a.size, b.size, threshold)


def covariance_matrix(samples) -> np.ndarray:
    """Unbiased covariance across samples; each row is one sequence."""
    try:
        x = np.asarray(samples, dtype=float)
    except ValueError:
        raise ValueError("sequences must share one length") from None
    if x.ndim != 2:
        raise ValueError("sequences must share one length")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    c = np.cov(x, rowvar=False, ddof=1)
    c = np.atleast_2d(c)
    return 0.5 * (c + c.T)


# -- exchangeability --------------------------------------------------------

def _check_permutation(perm: Sequence[int], m: int) -> np.ndarray:
    p = np.asarray(perm, dtype=int)
    if p.shape != (m,) or sorted(p.tolist()) != list(range(1, m + 1)):
        raise ValueError(f"invalid permutation {list(perm)} of 1..{m}")
    return p - 1


def transpositions(m: int) -> list[tuple[int, ...]]:
    out = []
    for i in range(m):
        for j in range(i + 1, m):
            p = list(range(1, m + 1))
            p[i], p[j] = p[j], p[i]
            out.append(tuple(p))
    return out


def reversal(m: int) -> tuple[int, ...]:
    return tuple(range(m, 0, -1))


def exchangeability_test(gen: GeneratorSpec, m: int, reps: int, permutations: Sequence[Sequence[int]],
                         rng: RngStream, grid: GridSpec | None = None, rounds: int = DEFAULT_ROUNDS,
                         threshold: float = DEFAULT_THRESHOLD) -> ComparisonReport:
    """Does permuting coordinates leave the path law unchanged?

    One reference sample is compared with an independently drawn, permuted
    sample for each permutation.  The reported p-value is the Bonferroni
    minimum over permutations; rejection means the law is not exchangeable,
    so no stationary talent model reproduces it.
    """
    if not 1 <= m <= 8:
        raise ValueError("exchangeability test supports 1 <= m <= 8")
    if not permutations:
        raise ValueError("need at least one permutation")
    perms = [_check_permutation(p, m) for p in permutations]
    ref = gen.sample_paths(m, reps, rng.split(0))
    views = [gen.sample_paths(m, reps, rng.split(i + 1))[:, p] for i, p in enumerate(perms)]
    if grid is None:
        grid = default_grid(gen, ref, *views)
    ref_disc = grid.discretize(ref)
    tvds, pvals = [], []
    for i, view in enumerate(views):
        ca, cb = _aligned_counts(ref_disc, grid.discretize(view))
        t, p = permutation_tvd_test(ca, cb, rng.split(len(perms) + 1 + i), rounds)
        tvds.append(t)
        pvals.append(p)
    p_comb = min(1.0, len(perms) * min(pvals))
    return _p_report("exchangeability", max(tvds), p_comb, reps, reps, threshold,
                     model=gen.describe(), permutations=[list(map(int, p)) for p in permutations],
                     tvd=tvds, p_values=pvals, rounds=rounds)


# -- conditional moments ----------------------------------------------------

Predictor = Callable[[np.ndarray], tuple]


def conditional_moment_check(samples, n: int, predictor: Predictor, vectorized: bool = False, bins: int = 10,
                             threshold: float = DEFAULT_THRESHOLD, min_samples: int = 10_000,
                             min_per_bin: int = 100) -> ComparisonReport:
    """Compare the law of value ``n+1`` with ``predictor(first n values)``.

    Samples are binned by predicted mean; per bin, standardized residuals give
    a z-score for the mean and one for the variance.  Their squares sum to a
    chi-square statistic with ``2 * bins`` degrees of freedom.  With
    ``vectorized`` the predictor receives the whole ``(N, n)`` history array.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2:
        raise ValueError("samples must be equal-length sequences")
    if not 0 <= n < x.shape[1]:
        raise ValueError(f"position n={n} needs sequences longer than n")
    if x.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {x.shape[0]}")
    hist, y = x[:, :n], x[:, n]
    if vectorized:
        mean, var = predictor(hist)
        mean = np.broadcast_to(np.asarray(mean, dtype=float), y.shape)
        var = np.broadcast_to(np.asarray(var, dtype=float), y.shape)
    else:
        pairs = [predictor(h) for h in hist]
        mean = np.array([p[0] for p in pairs], dtype=float)
        var = np.array([p[1] for p in pairs], dtype=float)
    order = np.argsort(mean, kind="stable")
    groups = np.array_split(order, bins)
    if min(len(g) for g in groups) < min_per_bin:
        raise ValueError(f"bin occupancy below {min_per_bin}; use more samples or fewer bins")
    r = y - mean
    z = r / np.sqrt(var)
    z_means, z_vars = [], []
    for g in groups:
        z_means.append(r[g].sum() / math.sqrt(var[g].sum()))
        sq = z[g] ** 2
        spread = sq.std(ddof=1)
        z_vars.append((sq.sum() - len(g)) / (math.sqrt(len(g)) * spread) if spread > 0 else 0.0)
    stat = float(np.sum(np.square(z_means)) + np.sum(np.square(z_vars)))
    df = 2 * len(groups)
    p = float(stats.chi2.sf(stat, df))
    return _p_report("conditional-moments", stat, p, x.shape[0], x.shape[0], threshold, position=n, df=df,
                     z_mean=[float(v) for v in z_means], z_var=[float(v) for v in z_vars])
