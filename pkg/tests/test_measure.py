import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from haagerup_lab.errors import InputError
from haagerup_lab.measure import (
    FiniteMeasureSpace,
    LpVector,
    gauge_convention,
    gauge_report,
    inner_product,
    lp_gauge,
    mazur_map,
    mazur_modulus_estimate,
    mazur_values,
    power_sum,
)

PS = [0.5, 1.0, 1.5, 2.0, 3.0]
# magnitudes below ~1e-80 underflow under |x|^4 and lose their sign
finite = st.one_of(st.just(0.0), st.floats(1e-6, 50), st.floats(-50, -1e-6))


def test_conventions():
    assert gauge_convention(0.5) == "delta_p"
    assert gauge_convention(1.0) == "norm"
    assert gauge_convention(3.0) == "norm"
    with pytest.raises(InputError):
        gauge_convention(0.0)


def test_space_validation():
    with pytest.raises(InputError):
        FiniteMeasureSpace(np.array([1.0, -1.0]))
    with pytest.raises(InputError):
        FiniteMeasureSpace(np.array([]))
    assert FiniteMeasureSpace.uniform(4).is_probability()


def test_gauge_values():
    space = FiniteMeasureSpace(np.array([0.5, 0.5]))
    v = LpVector(space, np.array([1.0, -2.0]), 1.0)
    assert lp_gauge(v) == 1.5
    assert lp_gauge(v.with_p(2.0)) == pytest.approx(math.sqrt(2.5), rel=1e-15)
    # below 1 the gauge is the unrooted power sum
    assert lp_gauge(v.with_p(0.5)) == pytest.approx(0.5 * (1 + math.sqrt(2)), rel=1e-15)
    assert gauge_report(v.with_p(0.5))["convention"] == "delta_p"


def test_delta_p_is_a_metric_below_one():
    rng = np.random.default_rng(3)
    space = FiniteMeasureSpace(rng.uniform(0.1, 1.0, 6))
    for _ in range(200):
        x, y, z = (LpVector(space, rng.standard_normal(6), 0.5) for _ in range(3))
        assert lp_gauge(x - z) <= lp_gauge(x - y) + lp_gauge(y - z) + 1e-12


def test_vector_arithmetic_and_mismatch():
    space = FiniteMeasureSpace.uniform(3)
    u = LpVector(space, np.array([1.0, 2.0, 3.0]), 2.0)
    w = LpVector(space, np.array([0.0, 1.0, -1.0]), 2.0)
    assert np.array_equal((u - w + w).values, u.values)
    assert inner_product(u, w) == pytest.approx((2 - 3) / 3)
    with pytest.raises(InputError):
        u + w.with_p(1.0)
    with pytest.raises(InputError):
        inner_product(u.with_p(1.0), w.with_p(1.0))


def test_json_round_trip():
    space = FiniteMeasureSpace(np.array([0.25, 0.75]))
    v = LpVector(space, np.array([1.0, -2.0]), 1.5)
    back = LpVector.from_json(v.to_json())
    assert back.p == v.p and np.array_equal(back.values, v.values)
    assert set(v.to_json()) == {"weights", "values", "p"}


def test_mazur_identity_exponent():
    v = np.array([0.0, -1.5, 2.0])
    assert np.array_equal(mazur_values(v, 1.5, 1.5), v)


@settings(max_examples=200, deadline=None)
@given(
    arrays(np.float64, st.integers(1, 16), elements=finite),
    st.sampled_from(PS),
    st.sampled_from(PS),
)
def test_mazur_transfer_and_round_trip(v, a, b):
    w = np.linspace(0.1, 1.0, v.size)
    out = mazur_values(v, a, b)
    lhs, rhs = power_sum(w, out, b), power_sum(w, v, a)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, rhs)
    assert np.allclose(mazur_values(out, b, a), v, rtol=1e-12, atol=1e-12)
    assert np.array_equal(np.sign(out), np.sign(v))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 8, elements=finite), st.permutations(range(8)))
def test_mazur_equivariance(v, perm):
    perm = np.array(perm)
    assert np.array_equal(mazur_values(v[perm], 1.0, 2.0), mazur_values(v, 1.0, 2.0)[perm])


def test_mazur_map_sphere_to_sphere():
    space = FiniteMeasureSpace.uniform(5)
    v = LpVector(space, np.array([1.0, -1.0, 2.0, 0.0, -0.5]), 1.0)
    v = v.scale(1 / lp_gauge(v))
    out = mazur_map(v, 1.0, 3.0)
    assert out.p == 3.0
    assert lp_gauge(out) == pytest.approx(1.0, rel=1e-14)


def test_modulus_bounds():
    # |sqrt a - sqrt b|^2 <= 2|a - b| pointwise, so 1 -> 2 is sqrt(2) d^(1/2)-continuous
    t = mazur_modulus_estimate(1.0, 2.0, 500, seed=1)
    assert np.all(t["output_dist"] <= math.sqrt(2) * np.sqrt(t["input_dist"]) + 1e-12)
    assert np.all(t["output_dist"] <= 3 * t["input_dist"] ** 0.5)
    # Cauchy-Schwarz: ||u|u| - v|v|||_1 <= 2 ||u - v||_2 on the unit sphere
    t = mazur_modulus_estimate(2.0, 1.0, 500, seed=1)
    assert np.all(t["output_dist"] <= 2 * t["input_dist"] + 1e-12)
    assert np.all(np.diff(t["input_dist"]) >= 0)
    assert np.all(np.diff(t["envelope"]) >= 0)


def test_modulus_deterministic():
    a = mazur_modulus_estimate(1.5, 0.5, 100, seed=7)
    b = mazur_modulus_estimate(1.5, 0.5, 100, seed=7)
    assert np.array_equal(a["output_dist"], b["output_dist"])
    with pytest.raises(InputError):
        mazur_modulus_estimate(1.0, 2.0, 0, seed=0)
