"""Level-1 Lyapunov rate I(x) at fixed t, with the Legendre cross-check.

    python scripts/rate_curve.py --map quadratic:0.1 --t 0.5
"""

import argparse

from gibbsldp import ratefn as R
from gibbsldp.maps import MapSpec
from gibbsldp.pressure import pressure_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--map", default="quadratic:0.1")
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--t", type=float, default=0.0)
    ap.add_argument("--points", type=int, default=25)
    args = ap.parse_args()

    curve = pressure_curve(MapSpec.parse(args.map), "periodic", args.n)
    xs = R.interior_x_grid(curve, args.points)
    print(f"{'x':>10} {'I(x)':>12} {'s_x':>9} {'legendre':>12} {'gap':>9}")
    for row in R.rate_curve_rows(curve, args.t, xs, dual_check=True):
        print(f"{row['x']:10.5f} {row['I']:12.4e} {row['s_x']:9.4f} {row['legendre']:12.4e} {row['gap']:9.1e}")


if __name__ == "__main__":
    main()
