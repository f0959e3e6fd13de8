"""VR(6) under an i.i.d. random walk and under AR(1) returns.

    python scripts/vr_null_experiment.py --seeds 200 --bins 10000 --phi 0.5
"""
import argparse

import numpy as np

from pmsignal.diagnostics import variance_ratio


def ar1(phi, n, rng):
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0] / np.sqrt(1 - phi**2)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + e[t]
    return x


def population_vr(phi, q):
    # closed form for a stationary AR(1)
    return 1 + 2 / q * sum((q - k) * phi**k for k in range(1, q))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--bins", type=int, default=10_000)
    ap.add_argument("--horizon", type=int, default=6)
    ap.add_argument("--phi", type=float, default=0.5)
    args = ap.parse_args()

    null = np.array([variance_ratio(np.random.default_rng(s).standard_normal(args.bins), args.horizon)
                     for s in range(args.seeds)])
    inside = np.mean((null >= 0.85) & (null <= 1.15))
    print(f"random walk: mean VR({args.horizon}) = {null.mean():.4f}, sd {null.std(ddof=1):.4f}, "
          f"{inside:.1%} in [0.85, 1.15]")

    alt = np.array([variance_ratio(ar1(args.phi, args.bins, np.random.default_rng(s)), args.horizon)
                    for s in range(args.seeds)])
    print(f"AR(1) phi={args.phi}: mean VR = {alt.mean():.4f}, population value "
          f"{population_vr(args.phi, args.horizon):.5f}")


if __name__ == "__main__":
    main()
