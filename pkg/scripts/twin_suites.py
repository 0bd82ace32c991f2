"""Run the three constructive twin comparisons and print their statistics.

    python3 scripts/twin_suites.py --reps 1000000 --seed 1
"""
import argparse
import math
import time

import numpy as np

from cumadv import equivalence as eq
from cumadv import gaussian
from cumadv import point_processes as pp
from cumadv.generators import GeneratorSpec
from cumadv.rng import make_rng


def binary(reps, rng, m=5):
    law = {}
    for code in range(2 ** m):
        path = tuple((code >> (m - 1 - i)) & 1 for i in range(m))
        k = sum(path)
        law[path] = math.factorial(k) * math.factorial(m - k) / math.factorial(m + 1)
    ha = eq.empirical_path_distribution(GeneratorSpec("polya-binary"), m, reps, None, rng.split(0))
    hb = eq.empirical_path_distribution(GeneratorSpec("talent-uniform"), m, reps, None, rng.split(1))
    print(f"binary urn vs uniform talent (m={m}, reps={reps}): TVD to exact law "
          f"{eq.tvd_to_law(ha, law):.4f} / {eq.tvd_to_law(hb, law):.4f}, cross {eq.tvd(ha, hb):.4f}")


def gaussian_pair(reps, rng, m=8):
    qp = gaussian.QModelParams(0.0, 1.0, 1.0)
    tp = gaussian.twin_from_q(qp)
    q = gaussian.q_model_paths(qp, m, reps, rng.split(0))
    t = gaussian.twin_paths(tp, m, reps, rng.split(1))
    cq, ct = eq.covariance_matrix(q), eq.covariance_matrix(t)
    target = np.ones((m, m)) + np.eye(m)
    print(f"Q-model vs twin {tp} (m={m}, reps={reps}): max |cov - target| "
          f"{np.abs(cq - target).max():.4f} / {np.abs(ct - target).max():.4f}, cross {np.abs(cq - ct).max():.4f}")


def point_pair(reps, rng, alpha=1.0, beta=0.5):
    params = pp.PointProcessParams(alpha, beta, 1.0)
    grid = [0.25, 0.5, 0.75, 1.0]
    xc = pp.contagious_counts(params, grid, reps, rng.split(0))
    xm = pp.mixed_twin_counts(params, grid, reps, rng.split(1))
    for j, t in enumerate(grid):
        top = int(max(xc[:, j].max(), xm[:, j].max())) + 1
        fa = np.bincount(xc[:, j], minlength=top) / reps
        fb = np.bincount(xm[:, j], minlength=top) / reps
        print(f"contagious vs mixed Poisson t={t}: TVD {0.5 * np.abs(fa - fb).sum():.4f}, means "
              f"{xc[:, j].mean():.4f} / {xm[:, j].mean():.4f} (exact {pp.expected_count(params, t):.4f})")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    rng = make_rng(args.seed)
    for i, fn in enumerate((binary, gaussian_pair, point_pair)):
        start = time.perf_counter()
        fn(args.reps, rng.split(i))
        print(f"  ({time.perf_counter() - start:.1f}s)")


if __name__ == "__main__":
    main()
