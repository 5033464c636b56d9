#!/usr/bin/env python3
"""Horizon ladder for the prefactor constant.

Prints the finite-horizon values I(T) along a doubling ladder together
with the per-doubling increments, then the extrapolated constant with the
analytic upper bound for reference.  The increments should contract
geometrically once the horizon covers the bulk of the supremum.

Example:
    python3 scripts/constant_ladder.py --a 1 --rho 0 --paths 8192
"""

import argparse

from ruin2d import SimConfig, estimate_I_T, extrapolate_C, upper_bound_C


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--rho", type=float, default=0.0)
    ap.add_argument("--paths", type=int, default=8192)
    ap.add_argument("--steps", type=int, default=8192,
                    help="time steps across the longest horizon")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--ladder", type=float, nargs="+",
                    default=[1.0, 2.0, 4.0, 8.0, 16.0])
    args = ap.parse_args()

    cfg = SimConfig(n_paths=args.paths, n_steps=args.steps, seed=args.seed,
                    workers=args.workers)
    print("T,I_T,stderr")
    prev = None
    for T in args.ladder:
        est = estimate_I_T(args.a, args.rho, T, cfg)
        inc = "" if prev is None else f"  (+{est.value - prev:.4f})"
        print(f"{T},{est.value:.5f},{est.stderr:.5f}{inc}")
        prev = est.value

    final = extrapolate_C(args.a, args.rho, cfg, ladder=tuple(args.ladder))
    bound = upper_bound_C(args.a, args.rho, 0.0, 0.0)
    print(f"# extrapolated constant: {final.value:.5f} +- {final.stderr:.5f}")
    print(f"# analytic upper bound (driftless): {bound:.5f}")


if __name__ == "__main__":
    main()
