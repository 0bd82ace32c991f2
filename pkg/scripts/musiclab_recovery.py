"""Spread of the fitted reinforcement across independent urn-generated logs.

Each seed draws a fresh log from the urn at ``f0`` (48 songs, 500 users with
1-3 downloads each) and fits f with the two-stage grid.  The spread of f*
shows how well a single log pins f down.

    python3 scripts/musiclab_recovery.py --seeds 24 --reps 300
"""
import argparse
import time

import numpy as np

from cumadv import musiclab as ml
from cumadv.rng import make_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=24)
    ap.add_argument("--first-seed", type=int, default=1000)
    ap.add_argument("--f0", type=float, default=0.3)
    ap.add_argument("--reps", type=int, default=300, help="replications per grid point")
    ap.add_argument("--songs", type=int, default=48)
    ap.add_argument("--users", type=int, default=500)
    ap.add_argument("--tolerance", type=float, default=0.02)
    args = ap.parse_args()

    fits = []
    start = time.perf_counter()
    for s in range(args.first_seed, args.first_seed + args.seeds):
        rng = make_rng(s)
        users = rng.split(0).generator.integers(1, 4, args.users)
        log = ml.urn_fixture(args.songs, users, args.f0, rng.split(1))
        fit = ml.fit_f(log, ml.COARSE_GRID, args.reps, rng.split(2))
        fits.append(fit.f_star)
        print(f"seed={s} downloads={len(log)} f_star={fit.f_star:.3f}")
    f = np.array(fits)
    inside = np.mean(np.abs(f - args.f0) <= args.tolerance)
    print(f"f0={args.f0} mean={f.mean():.3f} sd={f.std(ddof=1):.3f} median={np.median(f):.3f} "
          f"within +-{args.tolerance}: {inside:.2f} ({time.perf_counter() - start:.0f}s)")


if __name__ == "__main__":
    main()
