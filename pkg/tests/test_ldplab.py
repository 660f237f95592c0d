import math

import numpy as np
import pytest

from gibbsldp import ldplab as LD
from gibbsldp import ratefn as R
from gibbsldp.errors import EmptyEvent
from gibbsldp.gibbs import (LYAPUNOV, ConfigSet, Kt, Poly, bernoulli_reference, default_family, gibbs_weights,
                            single_site_family, uniform_circle_reference)
from gibbsldp.maps import MapSpec
from gibbsldp.orbitsets import periodic_points
from gibbsldp.pressure import curve_from_orbit, pressure_estimate
from gibbsldp.shift import Box, ShiftPotential, ShiftSpec

LOG2 = math.log(2)


def binomial_count_log(n, js):
    return math.log(sum(math.comb(n, j) for j in js)) / n


@pytest.fixture(scope="module")
def coin20():
    return gibbs_weights(ConfigSet(ShiftSpec(2, 1), Box((20,))), None)


@pytest.fixture(scope="module")
def wide_curve(quad_orbit12):
    # the default [-3, 3] grid resolves only chi in (0.670, 0.705) for c = 0.1
    return curve_from_orbit(quad_orbit12, R.default_grid(-20, 20, 0.05))


def test_power_map_lyapunov_deviation_is_empty(power2_orbit12):
    nu = gibbs_weights(power2_orbit12, Kt(0.3))
    with pytest.raises(EmptyEvent):
        LD.deviation_prob(nu, LYAPUNOV, LOG2, 0.01)


def test_shift_deviation_matches_binomial(coin20):
    k = ShiftPotential.indicator(1)
    rep = LD.deviation_prob(coin20, k, 0.5, 0.2, rate=R.indicator_rate_full_shift)
    exact = math.log(sum(math.comb(20, j) for j in range(21) if abs(j - 10) >= 4) / 2 ** 20) / 20
    assert rep.estimate == pytest.approx(exact, abs=1e-12)
    assert rep.estimate == pytest.approx(LD.binomial_deviation_log_prob(20, 0.5, 0.2), abs=1e-12)
    assert rep.prediction == pytest.approx(-(LOG2 - R.binary_entropy(0.7)), abs=1e-14)
    assert rep.gap <= 0.08


@pytest.mark.parametrize("eps", [0.05, 0.15, 0.25, 0.35, 0.45])
def test_shift_deviation_exactness_across_eps(coin20, eps):
    est = LD.deviation_prob(coin20, ShiftPotential.indicator(1), 0.5, eps).estimate
    assert est == pytest.approx(LD.binomial_deviation_log_prob(20, 0.5, eps), abs=1e-12)


def test_binomial_oracle_biased_coin():
    # P(|j/10 - 0.5| >= 0.5) = p^10 + (1 - p)^10
    p = 0.25
    got = LD.binomial_deviation_log_prob(10, 0.5, 0.5, p)
    assert got == pytest.approx(math.log(p ** 10 + (1 - p) ** 10) / 10, abs=1e-14)


def test_complementarity(coin20, quad_orbit12):
    k = ShiftPotential.indicator(1)
    for nu, obs, center, eps in [(coin20, k, 0.5, 0.15), (gibbs_weights(quad_orbit12, None), LYAPUNOV, 0.69, 0.01)]:
        a = LD.deviation_prob(nu, obs, center, eps)
        b = LD.complement_prob(nu, obs, center, eps)
        n = nu.horizon
        assert math.exp(n * a.estimate) + math.exp(n * b.estimate) == pytest.approx(1, abs=1e-12)
        assert a.event_count + b.event_count == len(nu)


def test_quadratic_deviation_small_eps(quad_orbit12, wide_curve):
    nu = gibbs_weights(quad_orbit12, None)
    rep = LD.deviation_prob(nu, LYAPUNOV, R.chi(wide_curve, 0.0), 0.01, curve=wide_curve)
    assert rep.estimate <= 0
    assert rep.gap < 0.1


def test_quadratic_deviation_eps_005_regression(quad_orbit12, wide_curve):
    """At eps = 0.05 the n = 12 gap is 0.167; the asymptotic agreement is not yet visible."""
    nu = gibbs_weights(quad_orbit12, None)
    rep = LD.deviation_prob(nu, LYAPUNOV, R.chi(wide_curve, 0.0), 0.05, curve=wide_curve)
    assert rep.estimate == pytest.approx(-0.3119, abs=1e-3)
    assert rep.prediction == pytest.approx(-0.1452, abs=1e-3)
    assert rep.estimate <= rep.prediction + 0.15


def test_default_grid_cannot_resolve_wide_thresholds(quad_orbit12, quad_curve12):
    nu = gibbs_weights(quad_orbit12, None)
    rep = LD.deviation_prob(nu, LYAPUNOV, R.chi(quad_curve12, 0.0), 0.05, curve=quad_curve12)
    assert rep.prediction == -math.inf and rep.gap is None


@pytest.mark.parametrize("t", [0.0, 0.5])
def test_upper_bound_direction(quad_orbit12, wide_curve, t):
    nu = gibbs_weights(quad_orbit12, Kt(t) if t else None)
    center = R.chi(wide_curve, t)
    for eps in (0.003, 0.01, 0.02, 0.04):
        rep = LD.deviation_prob(nu, LYAPUNOV, center, eps, curve=wide_curve)
        assert rep.estimate <= rep.prediction + 0.15


def test_power_map_tail_counts_everything(power2_orbit12):
    P2 = curve_from_orbit(power2_orbit12)
    rep = LD.lyapunov_tail_weighted(power2_orbit12, 0.0, LOG2 - 1e-6, "above", P2)
    assert rep.estimate == pytest.approx(math.log(2 ** 12 - 1) / 12, abs=1e-12)
    assert rep.prediction == pytest.approx(LOG2, abs=1e-4)
    assert rep.event_count == 2 ** 12 - 1


@pytest.mark.parametrize("s", [0.0, 1.0])
def test_tail_at_the_mean_recovers_pressure(quad_orbit12, quad_curve12, s):
    x = R.chi(quad_curve12, s)
    P = pressure_estimate(quad_orbit12, Kt(s)).value
    for side in ("above", "below"):
        rep = LD.lyapunov_tail_weighted(quad_orbit12, s, x, side, quad_curve12)
        # s_x is bisected to 1e-9, so the prediction matches P(s) to that order
        assert rep.prediction == pytest.approx(R.entropy_of_s(quad_curve12, s) - s * x, abs=1e-7)
        assert rep.prediction == pytest.approx(P, abs=1e-7)
        assert abs(rep.estimate - P) < 0.1
        assert rep.estimate < P


def test_entropy_by_counting_below(quad_orbit12, quad_curve12):
    x = R.chi(quad_curve12, 1.0)
    rep = LD.entropy_by_counting(quad_orbit12, x, "below", quad_curve12)
    h1 = R.entropy_of_s(quad_curve12, 1.0)
    assert rep.prediction == pytest.approx(h1, abs=1e-9)
    assert abs(rep.estimate - h1) < 0.1
    weighted = LD.lyapunov_tail_weighted(quad_orbit12, 0.0, x, "below", quad_curve12)
    assert weighted.estimate == rep.estimate


def test_tail_side_rule_falls_back_to_pressure(quad_orbit12, quad_curve12):
    # s_x = 1 > t = 0 on the "above" side: the tail holds chi(mu_0), so the limit is P(0)
    rep = LD.lyapunov_tail_weighted(quad_orbit12, 0.0, R.chi(quad_curve12, 1.0), "above", quad_curve12)
    assert rep.prediction == pytest.approx(quad_curve12(0.0))
    with pytest.raises(ValueError):
        LD.lyapunov_tail_weighted(quad_orbit12, 0.0, 0.7, "sideways")


def test_empty_tail(quad_orbit12):
    with pytest.raises(EmptyEvent):
        LD.entropy_by_counting(quad_orbit12, 5.0, "above")


def test_ball_counting_power_map_regression(power2_orbit12):
    fam = default_family()
    rep = LD.entropy_by_ball_counting(power2_orbit12, uniform_circle_reference(fam), 0.05, fam)
    # low-period points carry large moments and sit outside the ball at n = 12
    assert rep.event_count == 1002
    assert rep.estimate == pytest.approx(math.log(1002) / 12, abs=1e-12)
    assert rep.estimate < LOG2


def test_ball_counting_shift_binomial(coin20):
    fam = single_site_family(2)
    ref = bernoulli_reference([0.3, 0.7], fam)
    rep = LD.entropy_by_ball_counting(coin20, ref, 0.02, fam)
    # weight 1/2 and scale 1: the ball is |freq - 0.7| < 0.08, i.e. j in {13, 14, 15}
    assert rep.estimate == pytest.approx(binomial_count_log(20, [13, 14, 15]), abs=1e-12)
    assert abs(rep.estimate - R.binary_entropy(0.7)) < 0.1


def test_ball_counting_with_potential(coin20):
    fam = single_site_family(2)
    a = 0.8
    f = ShiftPotential.single_site([0.0, a])
    ref = bernoulli_reference([0.3, 0.7], fam)
    ref.pairings[f.label] = 0.7 * a
    plain = LD.entropy_by_ball_counting(coin20, ref, 0.02, fam)
    weighted = LD.entropy_by_ball_counting(coin20, ref, 0.02, fam, f)
    # on the ball S_n f / n stays within a * 0.08 of ref(f)
    assert abs(weighted.estimate - plain.estimate) <= a * 0.08


def test_ball_counting_empty(coin20):
    fam = single_site_family(2)
    with pytest.raises(EmptyEvent):
        LD.entropy_by_ball_counting(coin20, bernoulli_reference([0.29, 0.71], fam), 1e-6, fam)


def test_mc_zero_potential_is_zero():
    mc = LD.mc_birkhoff_reference(MapSpec.power(2), 9, 1000, 1)
    assert mc.value == 0.0


def test_mc_matches_periodic_pressure():
    m = MapSpec.power(2)
    g = Poly.re_power(1, 0.3)
    mc = LD.mc_birkhoff_reference(m, 10, 200_000, 3, g)
    ref = pressure_estimate(periodic_points(m, 10), g).value - LOG2
    assert abs(mc.value - ref) < 0.05
    assert abs(mc.value - ref) < 10 * mc.stderr + 1e-3


def test_mc_reproducible_and_chunk_independent():
    m = MapSpec.power(2)
    g = Poly.im_power(2, 0.5)
    a = LD.mc_birkhoff_reference(m, 6, LD.MC_CHUNK + 123, 9, g)
    b = LD.mc_birkhoff_reference(m, 6, LD.MC_CHUNK + 123, 9, g)
    assert a == b


def test_mc_null_event_flagged():
    est = LD.mc_event_log_prob(MapSpec.power(2), 8, 10_000, 2, LYAPUNOV, LOG2, 1e-3)
    assert est.infinite and est.value == -math.inf
    full = LD.mc_event_log_prob(MapSpec.power(2), 8, 10_000, 2, Poly.re_power(1), 0.0, 1e-9)
    assert full.value <= 0 and not full.infinite


def test_mc_rejects_quadratic():
    with pytest.raises(ValueError):
        LD.mc_birkhoff_reference(MapSpec.quadratic(0.1), 4, 10, 0, Poly.re_power(1))


def test_barycenter_shift_single_site():
    a = 1.3
    f = ShiftPotential.single_site([0.0, a])
    rows = LD.barycenter_convergence(lambda n: ConfigSet(ShiftSpec(2, 1), Box((n,))), f, [3, 7, 15],
                                     [ShiftPotential.indicator(1)],
                                     {"1[x0=1]": LD.shift_marginal_exact([0.0, a])[1]})
    assert all(r.gap <= 1e-12 for r in rows)
    assert all(r.successive_diff <= 1e-12 for r in rows[1:])


def test_barycenter_power_map_lyapunov():
    m = MapSpec.power(3)
    rows = LD.barycenter_convergence(lambda n: periodic_points(m, n), Kt(0.7), [3, 5, 7], [LYAPUNOV],
                                     {LYAPUNOV.label: math.log(3)})
    assert all(r.gap <= 1e-12 for r in rows)


def test_barycenter_quadratic_gap_decreases(quad, quad_curve12):
    target = -R.dP(quad_curve12, 0.5)
    rows = LD.barycenter_convergence(lambda n: periodic_points(quad, n), Kt(0.5), range(8, 13), [LYAPUNOV],
                                     {LYAPUNOV.label: target})
    gaps = [r.gap for r in rows]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 0.05


def test_barycenter_needs_two_horizons():
    with pytest.raises(ValueError):
        LD.barycenter_convergence(lambda n: None, None, [4], [])


def test_report_row_layout(coin20):
    row = LD.deviation_prob(coin20, ShiftPotential.indicator(1), 0.5, 0.2).row()
    for key in ("n", "estimate", "prediction", "gap", "event_count", "thr_eps", "thr_center"):
        assert key in row
