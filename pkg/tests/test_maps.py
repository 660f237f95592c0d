import cmath
import math

import numpy as np
import pytest

from gibbsldp import maps
from gibbsldp.errors import DerivativeVanishes
from gibbsldp.maps import Family, MapSpec


def quad_fixed_points(c):
    disc = cmath.sqrt(1 - 4 * c)
    return (1 + disc) / 2, (1 - disc) / 2


def test_parse_and_str_roundtrip():
    for text in ["powermap:3", "quadratic:0.1", "quadratic:(0.1+0.05j)"]:
        m = MapSpec.parse(text)
        assert MapSpec.parse(str(m)) == m
    assert MapSpec.parse("quadratic:0.1+0.05j").c == 0.1 + 0.05j
    with pytest.raises(ValueError):
        MapSpec.parse("cubic:1")
    with pytest.raises(ValueError):
        MapSpec.power(1)


def test_certified_regime():
    assert MapSpec.power(2).certified
    assert MapSpec.quadratic(0.2).certified
    assert not MapSpec.quadratic(0.25).certified


@pytest.mark.parametrize("m,z,expected", [
    (MapSpec.power(2), 1j, -1),
    (MapSpec.quadratic(0.1), 0, 0.1),
    (MapSpec.power(3), 2, 8),
])
def test_apply_examples(m, z, expected):
    assert maps.apply(m, z) == expected


def test_log_deriv_on_unit_circle():
    z = cmath.exp(0.37j)
    assert maps.log_deriv_birkhoff(MapSpec.power(2), z, 5) == pytest.approx(5 * math.log(2), abs=1e-12)
    assert maps.log_deriv_birkhoff(MapSpec.power(3), z, 4) == pytest.approx(4 * math.log(3), abs=1e-12)


def test_log_deriv_at_quadratic_fixed_point():
    p = max(quad_fixed_points(0.1), key=abs)
    assert maps.log_deriv_birkhoff(MapSpec.quadratic(0.1), p, 2) == pytest.approx(2 * math.log(abs(2 * p)), abs=1e-12)


def test_derivative_vanishes_at_critical_point():
    with pytest.raises(DerivativeVanishes):
        maps.log_deriv_birkhoff(MapSpec.quadratic(0.1), 0j, 3)


def test_log_deriv_sums_match_scalar_path():
    m = MapSpec.quadratic(0.1)
    pts = maps.sample_julia(m, 20, 4)
    vec = maps.log_deriv_sums(m, maps.orbit(m, pts, 9))
    assert np.allclose(vec, [maps.log_deriv_birkhoff(m, z, 9) for z in pts], rtol=0, atol=1e-12)


@pytest.mark.parametrize("m,z,expected", [
    (MapSpec.power(2), 1, [1, -1]),
    (MapSpec.quadratic(0.1), 0.1, [0, 0]),
    (MapSpec.power(4), 1, [1, 1j, -1, -1j]),
])
def test_preimage_examples(m, z, expected):
    got = maps.preimages(m, z)
    assert len(got) == len(expected)
    for w in expected:
        assert min(abs(g - w) for g in got) < 1e-12


def test_preimages_invert_apply():
    rng = np.random.default_rng(0)
    for m in [MapSpec.power(2), MapSpec.power(5), MapSpec.quadratic(0.1 + 0.05j)]:
        for z in rng.normal(size=20) + 1j * rng.normal(size=20):
            for w in maps.preimages(m, z):
                assert abs(maps.apply(m, w) - z) <= 1e-12 * max(1, abs(z))


def test_preimage_array_matches_scalar_branches():
    m = MapSpec.quadratic(0.1)
    z = np.array(maps.sample_julia(m, 30, 2))
    arr = maps.preimage_array(m, z)
    for i, zi in enumerate(z):
        assert np.allclose(arr[i], maps.preimages(m, zi), atol=1e-14)


def test_sample_julia_power_map_on_circle():
    pts = np.array(maps.sample_julia(MapSpec.power(2), 1000, 7))
    assert len(pts) == 1000
    assert np.max(np.abs(np.abs(pts) - 1)) < 1e-10


def test_sample_julia_c0_is_the_square_map():
    a = maps.sample_julia(MapSpec.quadratic(0), 5, 1)
    b = maps.sample_julia(MapSpec.power(2), 5, 1)
    assert np.allclose(a, b, atol=1e-15)


def test_sample_julia_quasicircle_bounds_and_reproducibility(quad):
    pts = np.abs(maps.sample_julia(quad, 1000, 7))
    assert 0.8 < pts.min() and pts.max() < 1.2
    assert maps.sample_julia(quad, 50, 9) == maps.sample_julia(quad, 50, 9)


def test_hyperbolicity_probe_examples(quad):
    assert maps.hyperbolicity_probe(MapSpec.power(2), 10, 100, 3) == pytest.approx(math.log(2), abs=1e-9)
    assert maps.hyperbolicity_probe(MapSpec.power(5), 4, 10, 1) == pytest.approx(math.log(5), abs=1e-9)
    probe = maps.hyperbolicity_probe(quad, 12, 500, 3)
    assert probe > 0
    # regression value for this seed
    assert probe == pytest.approx(0.6190, abs=5e-3)


def test_repelling_fixed_point():
    assert maps.repelling_fixed_point(MapSpec.power(4)) == 1
    p = maps.repelling_fixed_point(MapSpec.quadratic(0.1))
    assert abs(p * p + 0.1 - p) < 1e-14 and abs(2 * p) > 1
