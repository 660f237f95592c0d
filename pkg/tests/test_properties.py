"""Invariant laws as hypothesis properties."""

import math
from functools import lru_cache

import numpy as np
from hypothesis import given, settings, strategies as st

from gibbsldp import maps
from gibbsldp import ratefn as R
from gibbsldp._numerics import logsumexp
from gibbsldp.gibbs import ConfigSet, Kt, Poly, default_family, gibbs_weights, weakstar_distances
from gibbsldp.maps import MapSpec
from gibbsldp.orbitsets import periodic_points
from gibbsldp.pressure import curve_from_orbit, pressure_estimate
from gibbsldp.shift import Box, ShiftPotential, ShiftSpec

PROPS = settings(max_examples=1000, deadline=None)
QUAD = MapSpec.quadratic(0.1)

coef = st.floats(-3, 3, allow_nan=False)
degree = st.integers(1, 4)
which = st.sampled_from(["quad", "power", "shift"])


@lru_cache(maxsize=None)
def source(name):
    if name == "quad":
        return periodic_points(QUAD, 6)
    if name == "power":
        return periodic_points(MapSpec.power(2), 6)
    return ConfigSet(ShiftSpec(2, 1), Box((8,)))


@lru_cache(maxsize=None)
def julia():
    return np.array(maps.sample_julia(QUAD, 64, 7))


@lru_cache(maxsize=None)
def pairing_points():
    fam = default_family()
    nu = gibbs_weights(source("quad"), None)
    return fam, np.stack([nu.pairings(g) for g in fam.members], axis=1)


@lru_cache(maxsize=None)
def small_curve():
    return curve_from_orbit(source("quad"))


def potential(name, a, b, j):
    if name == "shift":
        return ShiftPotential.single_site([a, b])
    return Poly.re_power(j, a) + Kt(b)


def translated(name, pot, c):
    if name == "shift":
        return ShiftPotential.single_site(pot.table + c)
    return pot + Poly.constant(c)


@PROPS
@given(which, coef, coef, degree)
def test_gibbs_weights_sum_to_one(name, a, b, j):
    nu = gibbs_weights(source(name), potential(name, a, b, j))
    assert abs(nu.weights.sum() - 1) <= 1e-12
    assert np.all(nu.weights >= 0)


@PROPS
@given(which, coef, coef, degree, st.floats(-10, 10, allow_nan=False))
def test_pressure_translation(name, a, b, j, c):
    pot = potential(name, a, b, j)
    src = source(name)
    e0 = pressure_estimate(src, pot).value
    e1 = pressure_estimate(src, translated(name, pot, c)).value
    assert abs(e1 - e0 - c) <= 1e-12 * max(1.0, abs(c), abs(e0))


@PROPS
@given(which, coef, coef, degree, st.floats(0, 5), st.floats(0, 5))
def test_pressure_monotone(name, a, b, j, u, v):
    src = source(name)
    pot = potential(name, a, b, j)
    if name == "shift":
        higher = ShiftPotential.single_site(pot.table + np.array([u, v]))
    else:
        # adding a nonnegative constant raises the potential pointwise
        higher = pot + Poly.constant(u + v)
    assert pressure_estimate(src, higher).value >= pressure_estimate(src, pot).value - 1e-12


@PROPS
@given(st.sampled_from(["quad", "power"]), coef, coef, st.floats(0, 1))
def test_pressure_convex_in_t(name, t1, t2, lam):
    L, n = source(name).log_derivs, source(name).horizon
    mid = logsumexp(-(lam * t1 + (1 - lam) * t2) * L) / n
    chord = (lam * logsumexp(-t1 * L) + (1 - lam) * logsumexp(-t2 * L)) / n
    assert mid <= chord + 1e-12


@PROPS
@given(st.integers(0, 62), st.integers(0, 62), st.integers(0, 62))
def test_weakstar_metric_axioms(i, j, k):
    fam, pts = pairing_points()

    def d(p, q):
        return weakstar_distances(pts[p], pts[q], fam)[0]

    assert d(i, i) == 0
    assert d(i, j) >= 0
    assert d(i, j) == d(j, i)
    assert d(i, j) <= d(i, k) + d(k, j) + 1e-15


@PROPS
@given(st.integers(0, 63), st.integers(1, 7), st.integers(1, 7))
def test_log_derivative_chain_rule(idx, p, q):
    z = complex(julia()[idx])
    lhs = maps.log_deriv_birkhoff(QUAD, z, p + q)
    rhs = maps.log_deriv_birkhoff(QUAD, z, p) + maps.log_deriv_birkhoff(QUAD, maps.iterate(QUAD, z, p), q)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


@PROPS
@given(st.integers(1, 70_000), st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_logsumexp_independent_of_workers(size, workers, seed):
    x = np.random.default_rng(seed).normal(scale=20, size=size)
    assert logsumexp(x, workers=1) == logsumexp(x, workers=workers)


@PROPS
@given(st.floats(0, 1))
def test_level1_rate_nonnegative(frac):
    P = small_curve()
    lo, hi = R.lyapunov_range(P)
    x = lo + frac * (hi - lo)
    assert R.rate_level1(P, 0.0, x) >= -1e-9


@PROPS
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=4),
       st.lists(st.floats(0.01, 1), min_size=4, max_size=4))
def test_level2_rate_nonnegative_bernoulli(f, raw):
    # variational principle for single-site potentials on the full shift
    p = np.array(raw[: len(f)])
    p = p / p.sum()
    p[-1] = 1 - p[:-1].sum()
    if p[-1] < 0:
        return
    mu = R.Bernoulli(tuple(p))
    r = R.rate_level2(logsumexp(np.array(f)), mu, float(np.dot(p, f)))
    assert r >= -1e-12
