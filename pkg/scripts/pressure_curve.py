"""Tabulate P(t) for k_t over a t-grid and write the curve as CSV.

    python scripts/pressure_curve.py --map quadratic:0.1 --n 12 --out curve.csv
"""

import argparse

from gibbsldp import ratefn as R
from gibbsldp.maps import MapSpec
from gibbsldp.pressure import pressure_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--map", default="quadratic:0.1")
    ap.add_argument("--method", default="periodic")
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--lo", type=float, default=-3.0)
    ap.add_argument("--hi", type=float, default=3.0)
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--out", default="pressure_curve.csv")
    args = ap.parse_args()

    curve = pressure_curve(MapSpec.parse(args.map), args.method, args.n, R.default_grid(args.lo, args.hi, args.step))
    curve.to_csv(args.out)
    if curve.is_degenerate:
        print(f"affine curve, slope {-(curve.values[-1] - curve.values[0]) / (curve.t[-1] - curve.t[0]):.6f}")
    else:
        lo, hi = R.lyapunov_range(curve)
        print(f"P(0) = {curve(0.0):.6f}, P(1) = {curve(1.0):.6f}, resolvable chi in [{lo:.4f}, {hi:.4f}]")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
