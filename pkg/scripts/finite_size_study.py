"""How fast finite-horizon pressure and barycenters settle, across orbit-set methods.

    python scripts/finite_size_study.py --map quadratic:0.1 --t 0.5
"""

import argparse

from gibbsldp import ldplab as LD
from gibbsldp import ratefn as R
from gibbsldp.gibbs import LYAPUNOV, Kt
from gibbsldp.maps import MapSpec
from gibbsldp.orbitsets import build_orbit_set, periodic_points
from gibbsldp.pressure import curve_from_orbit, pressure_estimate, pressure_sequence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--map", default="quadratic:0.1")
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--horizons", default="4,6,8,10,12")
    args = ap.parse_args()

    m = MapSpec.parse(args.map)
    horizons = [int(v) for v in args.horizons.split(",")]
    pot = Kt(args.t)
    for method in ("periodic", "preimage"):
        seq = pressure_sequence([pressure_estimate(build_orbit_set(m, method, n), pot) for n in horizons])
        print(f"{method}: " + "  ".join(
            f"n={e.horizon} P={e.value:.6f}" + ("" if e.successive_diff is None else f" (d {e.successive_diff:.1e})")
            for e in seq))

    ref = curve_from_orbit(periodic_points(m, max(horizons)))
    target = -R.dP(ref, args.t)
    rows = LD.barycenter_convergence(lambda n: periodic_points(m, n), pot, horizons, [LYAPUNOV],
                                     {LYAPUNOV.label: target})
    print(f"barycenter of k_-1 against chi(mu_t) = {target:.6f}")
    for r in rows:
        print(f"  n={r.n:3d} mean={r.means[LYAPUNOV.label]:.8f} gap={r.gap:.2e}")


if __name__ == "__main__":
    main()
