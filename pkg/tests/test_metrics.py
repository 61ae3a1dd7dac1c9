import math

import pytest
from hypothesis import given, settings, strategies as st

from shiftlab.metrics import (ATOL, MetricParams, Point, coarsest_valid_scale,
                              cylinder_diameter, depth_for_scale,
                              product_cell_diameter, rho1, rho2,
                              shift_distance, space_diameter)

D1 = MetricParams("d1")
D2 = MetricParams("d2", 0.5, 1.0)

naturals = st.integers(min_value=1, max_value=10 ** 6)


def test_rho1_values():
    assert rho1(1, 2) == pytest.approx(0.5)
    assert rho1(3, 3) == 0.0
    assert rho1(1, 10 ** 9) == pytest.approx(1.0 - 1e-9)


def test_rho2_values():
    assert rho2(1, 2, 1.0) == pytest.approx(math.exp(-1) - math.exp(-2))
    assert rho2(5, 5, 2.0) == 0.0


@given(a=naturals, b=naturals, c=naturals)
def test_rho1_metric_axioms(a, b, c):
    assert rho1(a, b) == rho1(b, a)
    assert rho1(a, b) >= 0.0
    assert (rho1(a, b) == 0.0) == (a == b)
    assert rho1(a, c) <= rho1(a, b) + rho1(b, c) + 1e-15


small_naturals = st.integers(min_value=1, max_value=200)


@given(a=small_naturals, b=small_naturals, c=small_naturals,
       alpha=st.floats(min_value=0.05, max_value=3.0))
def test_rho2_metric_axioms(a, b, c, alpha):
    assert rho2(a, b, alpha) == rho2(b, a, alpha)
    assert (rho2(a, b, alpha) == 0.0) == (a == b)
    assert rho2(a, c, alpha) <= rho2(a, b, alpha) + rho2(b, c, alpha) + 1e-15


def test_params_validation():
    with pytest.raises(ValueError):
        MetricParams("d3")
    with pytest.raises(ValueError):
        MetricParams("d1", 1.0)
    with pytest.raises(ValueError):
        MetricParams("d2", 0.5, None)
    with pytest.raises(ValueError):
        MetricParams("d2", 0.5, -1.0)


def test_sandwich_constant():
    assert D1.sandwich_constant == pytest.approx(3.0)
    assert MetricParams("d1", 0.9).sandwich_constant == pytest.approx(11.0)


def test_point_coordinates():
    x = Point((5, 2, 7), tail=3)
    assert [x.coordinate(i) for i in range(6)] == [5, 2, 7, 3, 3, 3]
    assert x.window(5) == (5, 2, 7, 3, 3)
    with pytest.raises(ValueError):
        Point((0, 1))
    with pytest.raises(ValueError):
        Point((1,), tail=0)


def test_shift_distance_examples():
    x = Point((1, 1, 1), 1)
    y = Point((1, 2, 1), 1)
    # only coordinate 1 differs: weight theta = 1/2, rho1(1,2) = 1/2
    assert shift_distance(x, y, D1) == pytest.approx(0.25)
    assert shift_distance(x, x, D1) == 0.0


def test_shift_distance_tail_term_exact():
    # different repeating tails: geometric series from the first tail index
    x = Point((1,), 1)
    y = Point((1,), 2)
    want = sum(0.5 ** n * rho1(1, 2) for n in range(1, 60))
    assert shift_distance(x, y, D1) == pytest.approx(want, abs=1e-15)


@given(p=st.lists(naturals, min_size=1, max_size=6),
       q=st.lists(naturals, min_size=1, max_size=6),
       tails=st.tuples(naturals, naturals))
@settings(max_examples=200)
def test_shift_distance_metric(p, q, tails):
    x = Point(tuple(p), tails[0])
    y = Point(tuple(q), tails[1])
    d = shift_distance(x, y, D1)
    assert d == shift_distance(y, x, D1)
    assert d <= space_diameter(D1) + ATOL
    z = Point((1,), 1)
    assert d <= shift_distance(x, z, D1) + shift_distance(z, y, D1) + 1e-12


def test_space_diameter():
    assert space_diameter(D1) == pytest.approx(2.0)
    assert space_diameter(D2) == pytest.approx(2.0 * math.exp(-1))


def test_cylinder_diameter():
    # theta^k/(1-theta), and the d2 variant carries e^-alpha
    assert cylinder_diameter(3, D1) == pytest.approx(0.25)
    assert cylinder_diameter(3, D2) == pytest.approx(0.25 * math.exp(-1))


def test_product_cell_diameter():
    assert product_cell_diameter(3, 0.25, D1) == pytest.approx(
        0.25 * (1 - 0.125) / 0.5 + 0.125 / 0.5)
    # cell diameter never exceeds T * delta at the construction depth
    for delta in (0.5, 0.25, 0.1, 0.05, 0.01):
        k = depth_for_scale(delta, D1)
        assert product_cell_diameter(k, delta, D1) <= D1.sandwich_constant * delta + ATOL


def test_depth_for_scale_d1():
    # smallest k with theta^k/(1-theta) <= delta
    assert depth_for_scale(0.25, D1) == 3
    assert depth_for_scale(0.5, D1) == 2
    assert depth_for_scale(0.1, D1) == 5
    assert depth_for_scale(1.0, D1) == 1
    # valid up to the space diameter; the cover builders clamp earlier
    assert depth_for_scale(1.5, D1) == 1
    with pytest.raises(ValueError):
        depth_for_scale(3.0, D1)
    with pytest.raises(ValueError):
        depth_for_scale(-0.1, D1)


def test_depth_for_scale_d2():
    # the d2 cylinder diameter carries e^-alpha, so the depth is one lower
    # than d1 would need only when e^alpha covers the gap
    assert depth_for_scale(0.01, D2) == 7
    assert cylinder_diameter(7, D2) <= 0.01 + ATOL
    assert cylinder_diameter(6, D2) > 0.01


@given(delta=st.floats(min_value=1e-9, max_value=1.0))
@settings(max_examples=300)
def test_depth_is_minimal(delta):
    k = depth_for_scale(delta, D1)
    assert cylinder_diameter(k, D1) <= delta + ATOL
    if k > 1:
        assert cylinder_diameter(k - 1, D1) > delta - ATOL


def test_coarsest_valid_scale():
    assert coarsest_valid_scale(D1) == 1.0
    c2 = coarsest_valid_scale(D2)
    assert 0.0 < c2 < 1.0
    assert c2 == pytest.approx(min(1.0 / (math.e * 0.5), 1.0 - 1e-12))
