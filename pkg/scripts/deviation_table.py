"""Finite-horizon Lyapunov deviation probabilities next to the rate-function prediction.

    python scripts/deviation_table.py --map quadratic:0.1 --horizons 8,10,12 --eps 0.005,0.01,0.05
"""

import argparse

from gibbsldp import ldplab as LD
from gibbsldp import ratefn as R
from gibbsldp.errors import EmptyEvent
from gibbsldp.gibbs import LYAPUNOV, Kt, gibbs_weights
from gibbsldp.maps import MapSpec
from gibbsldp.orbitsets import periodic_points
from gibbsldp.pressure import curve_from_orbit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--map", default="quadratic:0.1")
    ap.add_argument("--horizons", default="8,10,12")
    ap.add_argument("--eps", default="0.005,0.01,0.02,0.05")
    ap.add_argument("--t", type=float, default=0.0)
    ap.add_argument("--t-lo", type=float, default=-20.0, help="wide grids resolve large deviations")
    ap.add_argument("--t-hi", type=float, default=20.0)
    args = ap.parse_args()

    m = MapSpec.parse(args.map)
    horizons = [int(v) for v in args.horizons.split(",")]
    curve = curve_from_orbit(periodic_points(m, max(horizons)), R.default_grid(args.t_lo, args.t_hi, 0.05))
    center = R.chi(curve, args.t)
    print(f"center chi(mu_t) = {center:.6f} (curve from n = {max(horizons)})")
    print(f"{'n':>3} {'eps':>7} {'estimate':>10} {'prediction':>11} {'gap':>8} {'count':>6}")
    for n in horizons:
        nu = gibbs_weights(periodic_points(m, n), Kt(args.t) if args.t else None)
        for eps in (float(v) for v in args.eps.split(",")):
            try:
                rep = LD.deviation_prob(nu, LYAPUNOV, center, eps, curve=curve)
            except EmptyEvent:
                print(f"{n:3d} {eps:7.3f} {'empty':>10}")
                continue
            gap = "" if rep.gap is None else f"{rep.gap:8.4f}"
            print(f"{n:3d} {eps:7.3f} {rep.estimate:10.4f} {rep.prediction:11.4f} {gap:>8} {rep.event_count:6d}")


if __name__ == "__main__":
    main()
