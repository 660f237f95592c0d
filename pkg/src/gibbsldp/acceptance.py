"""Acceptance battery shared by ``gibbsldp selftest`` and the test suite.

Each check returns a :class:`Result`; oracle values come from the small
closed-form functions at the top of this module, so a corrupted oracle makes
the named criterion fail.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ldplab as LD
from . import maps
from . import ratefn as R
from ._numerics import logsumexp
from .gibbs import (LYAPUNOV, ConfigSet, Kt, Poly, default_family, ensemble_mean, gibbs_weights,
                    weakstar_distances)
from .maps import MapSpec
from .orbitsets import periodic_points
from .pressure import curve_from_orbit, pressure_estimate, shift_pressure_estimate, transfer_matrix_pressure
from .shift import Box, Periodic, ShiftPotential, ShiftSpec


# -- closed-form oracles -------------------------------------------------------------

def power_pressure(d: int, t: float) -> float:
    return (1 - t) * math.log(d)


def single_site_pressure(a: float) -> float:
    """log(1 + e^a) for the two-symbol potential (0, a)."""
    return math.log1p(math.exp(a))


def nn_pressure(beta: float) -> float:
    """log of the Perron root of [[e^b, 1], [1, e^b]]."""
    return math.log(math.exp(beta) + 1)


def cramer_rate(x: float) -> float:
    """log 2 - H(x) for a fair coin."""
    return math.log(2) - R.binary_entropy(x)


def binomial_tail(n: int, center: float, eps: float) -> float:
    return LD.binomial_deviation_log_prob(n, center, eps)


def gibbs_marginal(a: float) -> float:
    return math.exp(a) / (1 + math.exp(a))


# -- harness ------------------------------------------------------------------------

@dataclass
class Result:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    limit: float | None = None

    @property
    def ok(self) -> bool:
        return self.passed and (self.limit is None or self.elapsed < self.limit)

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        budget = f" / {self.limit:g}s" if self.limit else ""
        slow = " (over time budget)" if self.passed and not self.ok else ""
        return f"[{tag}] C{self.number} {self.name}: {self.detail} [{self.elapsed:.2f}s{budget}]{slow}"


@dataclass
class Criterion:
    number: int
    name: str
    check: Callable[[], tuple[bool, str]]
    limit: float | None = None
    tags: tuple = field(default_factory=tuple)

    def run(self) -> Result:
        t0 = time.perf_counter()
        try:
            passed, detail = self.check()
        except Exception as exc:  # a crash is a failure of this criterion, not of the battery
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        return Result(self.number, self.name, passed, detail, time.perf_counter() - t0, self.limit)

    def matches(self, needle: str | None) -> bool:
        if not needle:
            return True
        needle = needle.lower()
        return needle in self.name or needle == f"c{self.number}" or needle in self.tags


# -- criteria -------------------------------------------------------------------------

def c1_power_pressure():
    worst = 0.0
    for d in (2, 3):
        orb = periodic_points(MapSpec.power(d), 12)
        for t in (-1.0, 0.0, 0.5, 1.0, 2.0):
            worst = max(worst, abs(pressure_estimate(orb, Kt(t)).value - power_pressure(d, t)))
    return worst <= 1e-3, f"max |est - (1-t)log d| = {worst:.3g} (tol 1e-3)"


def c2_degenerate_rate():
    bad = []
    for d in (2, 3):
        curve = curve_from_orbit(periodic_points(MapSpec.power(d), 8))
        ld = math.log(d)
        for t in (-1.0, 0.0, 0.5, 2.0):
            if R.rate_level1(curve, t, ld) != 0.0:
                bad.append(f"d={d} t={t} at log d")
            for x in (ld - 0.1, ld - 1e-6, ld + 1e-6, ld + 0.3):
                if not math.isinf(R.rate_level1(curve, t, x)):
                    bad.append(f"d={d} t={t} x={x:.6g}")
    return not bad, "0 at log d, +inf elsewhere" if not bad else "; ".join(bad)


def c3_shift_factorization():
    spec = ShiftSpec(2, 1)
    worst = 0.0
    for a in (-1.0, 0.3, 2.0):
        pot = ShiftPotential.single_site([0.0, a])
        exact = single_site_pressure(a)
        worst = max(worst, abs(transfer_matrix_pressure(spec, pot) - exact) / exact)
        for side in (1, 5, 20):
            v = shift_pressure_estimate(spec, Box((side,)), pot, Periodic()).value
            worst = max(worst, abs(v - exact) / exact)
    pot2 = ShiftPotential.single_site([0.0, 0.3], dimension=2)
    v = shift_pressure_estimate(ShiftSpec(2, 2), Box((3, 4)), pot2).value
    worst = max(worst, abs(v - single_site_pressure(0.3)) / single_site_pressure(0.3))
    return worst <= 1e-12, f"max relative error {worst:.3g} (tol 1e-12)"


def c4_nearest_neighbor():
    spec = ShiftSpec(2, 1)
    tm_err, box_err = 0.0, 0.0
    for beta in (0.5, 1.0):
        pot = ShiftPotential.nearest_neighbor(beta)
        tm = transfer_matrix_pressure(spec, pot)
        tm_err = max(tm_err, abs(tm - nn_pressure(beta)))
        box_err = max(box_err, abs(shift_pressure_estimate(spec, Box((16,)), pot).value - tm))
    ok = tm_err <= 1e-10 and box_err <= 0.02
    return ok, f"transfer gap {tm_err:.3g} (tol 1e-10), n=16 periodic gap {box_err:.3g} (tol 0.02)"


def c5_legendre_duality():
    curve = curve_from_orbit(periodic_points(MapSpec.quadratic(0.1), 12))
    xs = R.interior_x_grid(curve, 40)
    dual, conv, zero = 0.0, math.inf, 0.0
    for t in (0.0, 0.5, 1.0):
        I = np.array([R.rate_level1(curve, t, x) for x in xs])
        L = np.array([R.legendre_sup(curve, t, x) for x in xs])
        dual = max(dual, float(np.max(np.abs(I - L))))
        conv = min(conv, float(np.min(np.diff(I, 2))))
        zero = max(zero, abs(R.rate_level1(curve, t, R.chi(curve, t))))
    ok = dual <= 1e-5 and conv >= -1e-6 and zero <= 1e-4
    return ok, f"duality {dual:.3g} (1e-5), min 2nd diff {conv:.3g} (-1e-6), |I(chi_t)| {zero:.3g} (1e-4)"


def c6_cramer_counting():
    nu = gibbs_weights(ConfigSet(ShiftSpec(2, 1), Box((20,))), None)
    k = ShiftPotential.indicator(1)
    ex_err, asy_gap = 0.0, 0.0
    for x in (0.6, 0.7, 0.8):
        est = LD.deviation_prob(nu, k, 0.5, x - 0.5).estimate
        ex_err = max(ex_err, abs(est - binomial_tail(20, 0.5, x - 0.5)))
        asy_gap = max(asy_gap, abs(est + cramer_rate(x)))
    ok = ex_err <= 1e-12 and asy_gap <= 0.08
    return ok, f"vs exact binomial {ex_err:.3g} (1e-12), vs -(log2 - H(x)) {asy_gap:.3g} (0.08)"


def c7_lyapunov_tail():
    orb = periodic_points(MapSpec.quadratic(0.1), 12)
    curve = curve_from_orbit(orb)
    worst = 0.0
    for s in (0.0, 1.0):
        tail = LD.lyapunov_tail_weighted(orb, s, R.chi(curve, s), "above", curve).estimate
        worst = max(worst, abs(tail - pressure_estimate(orb, Kt(s)).value))
    return worst <= 0.1, f"max |tail - P(s)| = {worst:.3g} (tol 0.1)"


def c8_barycenter():
    worst_shift = 0.0
    for a in (-0.4, 0.7):
        f = ShiftPotential.single_site([0.0, a])
        rows = LD.barycenter_convergence(lambda n: ConfigSet(ShiftSpec(2, 1), Box((n,))), f,
                                         [2, 6, 10, 14], [ShiftPotential.indicator(1)],
                                         {"1[x0=1]": gibbs_marginal(a)})
        worst_shift = max(worst_shift, max(r.gap for r in rows))
    m = MapSpec.quadratic(0.1)
    target = -R.dP(curve_from_orbit(periodic_points(m, 12)), 0.5)
    rows = LD.barycenter_convergence(lambda n: periodic_points(m, n), Kt(0.5), list(range(8, 13)),
                                     [LYAPUNOV], {LYAPUNOV.label: target})
    gaps = [r.gap for r in rows]
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = worst_shift <= 1e-12 and gaps[-1] <= 0.05 and decreasing
    return ok, (f"shift marginal err {worst_shift:.3g} (1e-12); quadratic gap n=12 {gaps[-1]:.3g} (0.05), "
                f"decreasing={decreasing}")


def c9_monte_carlo():
    m = MapSpec.power(2)
    g = Poly.re_power(1, 0.3)
    mc = LD.mc_birkhoff_reference(m, 14, 10 ** 6, 20240521, g)
    ref = pressure_estimate(periodic_points(m, 14), g).value - math.log(2)
    gap = abs(mc.value - ref)
    return gap <= 0.05, f"|mc - (P(g) - log 2)| = {gap:.3g} (tol 0.05), mc stderr {mc.stderr:.2g}"


def c10_properties(cases: int = 1000, seed: int = 7):
    """Randomized property sweep; the hypothesis suite in tests/ runs the same laws."""
    rng = np.random.default_rng(seed)
    fails: dict[str, int] = {}

    def fail(name):
        fails[name] = fails.get(name, 0) + 1

    quad = periodic_points(MapSpec.quadratic(0.1), 6)
    power = periodic_points(MapSpec.power(2), 6)
    configs = ConfigSet(ShiftSpec(2, 1), Box((8,)))
    fam = default_family()
    julia = np.array(maps.sample_julia(MapSpec.quadratic(0.1), 64, seed))
    # pairing vectors of the n=6 empiricals serve as points for the metric laws
    pts = np.stack([ensemble_pairings(quad, g) for g in fam.members], axis=1)
    for _ in range(cases):
        src = [quad, power, configs][rng.integers(3)]
        if src is configs:
            pot = ShiftPotential.single_site(rng.normal(size=2))
            bump = ShiftPotential.single_site(np.abs(rng.normal(size=2)))
            higher = ShiftPotential.single_site(pot.table + bump.table)
        else:
            a, b = rng.normal(size=2)
            pot = Poly.re_power(int(rng.integers(1, 5)), a) + Kt(b)
            higher = pot + Poly.constant(abs(float(rng.normal())))
        nu = gibbs_weights(src, pot)
        if abs(nu.weights.sum() - 1) > 1e-12:
            fail("weights")
        c = float(rng.normal(scale=3))
        shifted = (ShiftPotential.single_site(pot.table + c) if src is configs else pot + Poly.constant(c))
        e0 = pressure_estimate(src, pot).value
        if abs(pressure_estimate(src, shifted).value - e0 - c) > 1e-12 * max(1, abs(c), abs(e0)):
            fail("translation")
        if pressure_estimate(src, higher).value < e0 - 1e-12:
            fail("monotonicity")
        if src is not configs:
            t1, t2 = rng.uniform(-3, 3, size=2)
            L, n = src.log_derivs, src.horizon
            mid = logsumexp(-(t1 + t2) / 2 * L) / n
            if mid > (logsumexp(-t1 * L) + logsumexp(-t2 * L)) / (2 * n) + 1e-12:
                fail("convexity")
        i, j, k = rng.integers(len(pts), size=3)
        dij = weakstar_distances(pts[i], pts[j], fam)[0]
        dji = weakstar_distances(pts[j], pts[i], fam)[0]
        dik = weakstar_distances(pts[i], pts[k], fam)[0]
        dkj = weakstar_distances(pts[k], pts[j], fam)[0]
        if dij < 0 or abs(dij - dji) > 0 or dij > dik + dkj + 1e-15 or weakstar_distances(pts[i], pts[i], fam)[0] != 0:
            fail("metric")
        z = complex(julia[rng.integers(len(julia))])
        p, q = (int(v) for v in rng.integers(1, 8, size=2))
        mq = MapSpec.quadratic(0.1)
        lhs = maps.log_deriv_birkhoff(mq, z, p + q)
        rhs = maps.log_deriv_birkhoff(mq, z, p) + maps.log_deriv_birkhoff(mq, maps.iterate(mq, z, p), q)
        if abs(lhs - rhs) > 1e-9 * max(1.0, abs(lhs)):
            fail("chain-rule")
        x = rng.normal(scale=20, size=int(rng.integers(1, 70_000)))
        if logsumexp(x, workers=1) != logsumexp(x, workers=int(rng.integers(2, 6))):
            fail("workers")
    total = sum(fails.values())
    detail = f"{cases} cases x 8 laws, failures: {fails}" if total else f"{cases} cases x 8 laws, 0 failures"
    return total == 0, detail


def ensemble_pairings(orbit, g) -> np.ndarray:
    return gibbs_weights(orbit, None).pairings(g)


CRITERIA = [
    Criterion(1, "power-pressure", c1_power_pressure, 2.0, ("pressure",)),
    Criterion(2, "degenerate-rate", c2_degenerate_rate, None, ("rate",)),
    Criterion(3, "shift-factorization", c3_shift_factorization, 1.0, ("pressure", "shift")),
    Criterion(4, "nearest-neighbor", c4_nearest_neighbor, 2.0, ("pressure", "shift")),
    Criterion(5, "legendre-duality", c5_legendre_duality, 30.0, ("rate",)),
    Criterion(6, "cramer-counting", c6_cramer_counting, 1.0, ("deviation", "shift")),
    Criterion(7, "lyapunov-tail", c7_lyapunov_tail, 10.0, ("deviation",)),
    Criterion(8, "barycenter", c8_barycenter, 30.0, ("deviation",)),
    Criterion(9, "monte-carlo", c9_monte_carlo, 20.0, ("deviation",)),
    Criterion(10, "properties", c10_properties, None, ("properties",)),
]


def run(filter: str | None = None, echo: Callable[[str], None] | None = None) -> list[Result]:
    out = []
    for crit in CRITERIA:
        if crit.matches(filter):
            res = crit.run()
            if echo:
                echo(res.line())
            out.append(res)
    return out
