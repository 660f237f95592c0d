import math

import numpy as np
import pytest

from gibbsldp import ratefn as R
from gibbsldp.errors import DegenerateCurve, NegativeRate, OutOfDomain, OutOfRange
from gibbsldp.maps import MapSpec
from gibbsldp.orbitsets import periodic_points
from gibbsldp.pressure import curve_from_orbit

LOG2 = math.log(2)


@pytest.fixture(scope="module")
def power_curve():
    return curve_from_orbit(periodic_points(MapSpec.power(2), 10))


def affine(a, b, grid=None):
    grid = R.default_grid() if grid is None else grid
    return R.PressureCurve.from_function(lambda t: a - b * t, grid)


def test_dp_power_map(power_curve):
    for t in (-2.0, 0.0, 0.35, 2.5):
        assert R.dP(power_curve, t) == pytest.approx(-LOG2, abs=1e-10)


def test_dp_affine_and_domain():
    c = affine(1.0, 0.4)
    assert R.dP(c, 0.5) == pytest.approx(-0.4, abs=1e-13)
    with pytest.raises(OutOfDomain):
        R.dP(c, 2.95)


def test_dp_quadratic_bracket(quad_curve12):
    lo, hi = R.lyapunov_range(quad_curve12)
    assert 0 < lo < hi
    for t in np.linspace(-2.9, 2.9, 30):
        assert -hi - 1e-12 <= R.dP(quad_curve12, t) <= -lo + 1e-12
    # regression bracket on the default grid, n = 12
    assert lo == pytest.approx(0.67030, abs=1e-4)
    assert hi == pytest.approx(0.70546, abs=1e-4)


def test_dp_richardson_beats_plain_difference():
    P = lambda t: math.log(math.exp(t) + math.exp(-2 * t))  # noqa: E731
    dP_true = lambda t: (math.exp(t) - 2 * math.exp(-2 * t)) / (math.exp(t) + math.exp(-2 * t))  # noqa: E731
    h = 0.05
    c = R.PressureCurve.from_function(P, R.default_grid(-1, 1, h))
    plain = (P(0.3 + h) - P(0.3 - h)) / (2 * h)
    err = abs(R.dP(c, 0.3) - dP_true(0.3))
    assert err < 1e-5
    assert err < abs(plain - dP_true(0.3)) / 100


def test_entropy_examples(power_curve, quad_curve12):
    for s in (-1.0, 0.0, 1.5):
        assert R.entropy_of_s(power_curve, s) == pytest.approx(LOG2 + math.log1p(-2.0 ** -10) / 10, abs=1e-9)
    assert R.entropy_of_s(quad_curve12, 0.0) == quad_curve12(0.0)
    h1 = R.entropy_of_s(quad_curve12, 1.0)
    assert 0 < h1 <= LOG2
    assert h1 == pytest.approx(0.68988, abs=1e-4)


def test_solve_s_x(quad_curve12, power_curve):
    c = quad_curve12
    assert R.solve_s_x(c, R.chi(c, 0.0)) == pytest.approx(0.0, abs=1e-6)
    assert R.solve_s_x(c, R.chi(c, 1.0)) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(DegenerateCurve):
        R.solve_s_x(power_curve, LOG2)
    with pytest.raises(OutOfRange):
        R.solve_s_x(c, 0.9)


def test_rate_level1_examples(power_curve, quad_curve12):
    assert R.rate_level1(power_curve, 0.7, R.chi(power_curve, 0.0)) == 0.0
    assert math.isinf(R.rate_level1(power_curve, 0.7, LOG2 + 0.01))
    for t in (0.0, 0.5, 1.0):
        assert abs(R.rate_level1(quad_curve12, t, R.chi(quad_curve12, t))) <= 1e-6
    assert math.isinf(R.rate_level1(quad_curve12, 0.0, 0.9))


@pytest.mark.parametrize("t", [0.0, 0.5])
def test_duality_on_interior_grid(quad_curve12, t):
    xs = R.interior_x_grid(quad_curve12, 40)
    gap = max(abs(R.rate_level1(quad_curve12, t, x) - R.legendre_sup(quad_curve12, t, x)) for x in xs)
    assert gap <= 1e-5


def test_legendre_of_affine_is_indicator():
    c = affine(0.3, 0.5)
    assert R.legendre_sup(c, 0.2, 0.5) == pytest.approx(0.0, abs=1e-12)
    assert R.legendre_sup(c, 0.2, 0.6) > 1e3
    assert R.legendre_sup(c, 0.2, 0.4) > 1e3


def test_legendre_nonnegative(quad_curve12):
    xs = np.linspace(0.6, 0.75, 31)
    for x in xs:
        assert R.legendre_sup(quad_curve12, 0.5, x) >= -1e-12


def test_rate_convex_and_minimized_at_mean(quad_curve12):
    t = 0.5
    xs = R.interior_x_grid(quad_curve12, 60)
    I = np.array([R.rate_level1(quad_curve12, t, x) for x in xs])
    assert np.min(np.diff(I, 2)) >= -1e-6
    assert np.all(I >= -1e-9)
    assert abs(xs[np.argmin(I)] - R.chi(quad_curve12, t)) <= (xs[1] - xs[0])


def test_tangency_identity(quad_curve12):
    c = quad_curve12
    for x in R.interior_x_grid(c, 10):
        for t, tp in [(0.0, 1.0), (-1.5, 0.5)]:
            lhs = R.rate_level1(c, t, x) - R.rate_level1(c, tp, x)
            assert lhs == pytest.approx(c(t) - c(tp) + (t - tp) * x, abs=1e-9)


def test_contraction_consistency(quad_curve12):
    c = quad_curve12
    for t in (0.0, 0.7):
        for x in R.interior_x_grid(c, 8):
            s = R.solve_s_x(c, x)
            lvl2 = R.rate_level2(c(t), R.MuS(s), -t * x, curve=c)
            assert lvl2 == pytest.approx(R.rate_level1(c, t, x), abs=1e-5)


def test_rate_level2_examples(quad_curve12):
    assert R.rate_level2(LOG2, R.Bernoulli((0.5, 0.5)), 0.0) == pytest.approx(0.0, abs=1e-15)
    p = 0.3
    H = -p * math.log(p) - (1 - p) * math.log(1 - p)
    assert R.rate_level2(LOG2, R.Bernoulli((p, 1 - p)), 0.0) == pytest.approx(LOG2 - H, abs=1e-14)
    c, t = quad_curve12, 0.4
    assert abs(R.rate_level2(c(t), R.MuS(t), -t * R.chi(c, t), curve=c)) <= 1e-5
    with pytest.raises(NegativeRate):
        R.rate_level2(0.1, R.Bernoulli((0.5, 0.5)), 0.0)


def test_markov_entropy():
    P = np.array([[0.9, 0.1], [0.4, 0.6]])
    mk = R.Markov(P)
    pi = mk.stationary()
    assert np.allclose(pi @ P, pi)
    expected = -sum(pi[i] * P[i, j] * math.log(P[i, j]) for i in range(2) for j in range(2))
    assert R.measure_entropy(mk) == pytest.approx(expected, abs=1e-14)
    iid = R.Markov(np.array([[0.3, 0.7], [0.3, 0.7]]))
    assert R.measure_entropy(iid) == pytest.approx(R.binary_entropy(0.3), abs=1e-14)
    with pytest.raises(ValueError):
        R.Markov(np.array([[0.5, 0.4], [0.5, 0.5]]))


def test_degenerate_detection(power_curve, quad_curve12):
    assert power_curve.is_degenerate
    assert not quad_curve12.is_degenerate


def test_curve_csv_roundtrip(quad_curve12):
    text = quad_curve12.to_csv()
    assert text.startswith("# map=quadratic:0.1")
    back = R.PressureCurve.from_csv(text)
    assert np.array_equal(back.t, quad_curve12.t) and np.array_equal(back.values, quad_curve12.values)
    # a sample-only curve differentiates on grid nodes
    assert R.dP(back, 0.5) == pytest.approx(R.dP(quad_curve12, 0.5), abs=1e-12)
    with pytest.raises(OutOfDomain):
        back(0.123)


def test_rate_csv_flags_infinity(power_curve):
    text = R.rate_curve_csv(power_curve, 0.0, [0.5, LOG2])
    rows = [line.split(",") for line in text.splitlines() if not line.startswith("#")]
    assert rows[0] == ["x", "I", "s_x", "h", "infinite"]
    assert rows[1][4] == "1" and float(rows[1][1]) == R.SENTINEL
    assert rows[2][4] == "0"


def test_indicator_rate():
    assert R.indicator_rate_full_shift(0.5) == pytest.approx(0, abs=1e-15)
    assert R.indicator_rate_full_shift(0.7) == pytest.approx(LOG2 - R.binary_entropy(0.7))
    assert math.isinf(R.indicator_rate_full_shift(1.2))
