"""Estimate the null rejection rate of each test with many more repetitions.

Each test compares a generator with itself on independent streams.  The
rates are reported at several significance levels together with an exact
binomial 95% interval, and the script prints how likely a perfectly
calibrated test is to show zero rejections in a 200-run check.

    python3 scripts/null_calibration.py --runs 20000 --tests ks,chi-square-homogeneity
"""
import argparse
import time

import numpy as np
from scipy import stats

from cumadv import equivalence as eq
from cumadv import gaussian
from cumadv.generators import GeneratorSpec
from cumadv.rng import make_rng

POLYA = GeneratorSpec("polya-binary")
QMODEL = GeneratorSpec("q-model", {"mu_T": "0", "sigma_T": "1", "sigma_X": "1"})
TWIN = gaussian.TwinParams(0.0, 1.0, 1.0)


def gof(r):
    s = POLYA.sample_paths(10, 5_000, r).sum(axis=1)
    return eq.chi_square_gof(np.bincount(s, minlength=11), [1 / 11] * 11)


def homogeneity(r):
    a = POLYA.sample_paths(10, 5_000, r.split(0)).sum(axis=1)
    b = POLYA.sample_paths(10, 5_000, r.split(1)).sum(axis=1)
    return eq.chi_square_homogeneity(np.bincount(a, minlength=11), np.bincount(b, minlength=11))


def ks(r):
    a = QMODEL.sample_paths(3, 5_000, r.split(0))[:, 2]
    b = QMODEL.sample_paths(3, 5_000, r.split(1))[:, 2]
    return eq.ks_two_sample(a, b)


def permutation(r):
    return eq.compare_generators(POLYA, POLYA, 3, 5_000, r)


def exchangeability(r):
    return eq.exchangeability_test(POLYA, 3, 5_000, eq.transpositions(3), r)


def conditional(r):
    x = gaussian.twin_paths(TWIN, 4, 10_000, r)
    return eq.conditional_moment_check(x, 3, lambda h: gaussian.twin_conditional_moments(TWIN, h), vectorized=True)


TESTS = {"chi-square-gof": gof, "chi-square-homogeneity": homogeneity, "ks": ks,
         "permutation-tvd": permutation, "exchangeability": exchangeability, "conditional-moments": conditional}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=314159)
    ap.add_argument("--tests", default=",".join(TESTS))
    ap.add_argument("--levels", default="0.001,0.01,0.05")
    args = ap.parse_args()
    levels = [float(x) for x in args.levels.split(",")]
    base = make_rng(args.seed)
    print(f"runs={args.runs} seed={args.seed}")
    for j, name in enumerate(args.tests.split(",")):
        fn = TESTS[name]
        start = time.perf_counter()
        p = np.array([fn(base.split(j).split(i)).p_value_or_distance for i in range(args.runs)])
        cells = []
        for a in levels:
            k = int((p <= a).sum())
            lo, hi = stats.binomtest(k, args.runs).proportion_ci(0.95, method="exact")
            cells.append(f"a={a:g}: {k / args.runs:.4f} [{lo:.4f}, {hi:.4f}]")
        print(f"{name:24s} " + "  ".join(cells) + f"  ({time.perf_counter() - start:.0f}s)")
    a = 1e-3
    one = stats.binom.pmf(0, 200, a)
    print(f"calibrated test, 200 runs at a={a:g}: P(0 rejections)={one:.3f}; "
          f"all {len(TESTS)} tests: {one ** len(TESTS):.3f}")


if __name__ == "__main__":
    main()
