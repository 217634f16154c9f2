import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ritzansatz.errors import InvalidArgument
from ritzansatz.quadrature import gauss_legendre_rule, tensor_rule
from ritzansatz.transform import AffineMap


def test_identity_map():
    T = AffineMap.identity(2)
    u = np.array([0.3, 0.8])
    np.testing.assert_array_equal(T.map(u), u)
    np.testing.assert_array_equal(T.pullback_gradient([[1.0, 2.0]]), [[1.0, 2.0]])
    assert T.jacobian_det_abs() == 1.0


def test_interval_map():
    T = AffineMap.from_box([0.0], [10.0])
    assert T.map([0.3])[0] == pytest.approx(3.0, abs=1e-15)
    assert T.jacobian_det_abs() == 10.0
    np.testing.assert_allclose(T.pullback_gradient([[5.0]]), [[0.5]])


def test_centered_cube_map():
    T = AffineMap.from_box([-3] * 3, [3] * 3)
    np.testing.assert_allclose(T.map([0.5, 0.5, 0.5]), [0, 0, 0], atol=1e-15)
    assert T.jacobian_det_abs() == 216.0
    assert T.face_measure(0) == 36.0


def test_zero_scale_rejected():
    with pytest.raises(InvalidArgument):
        AffineMap([1.0, 0.0], [0.0, 0.0])


def test_pullback_matches_chain_rule(rng):
    scale = rng.uniform(0.5, 3, 2) * rng.choice([-1, 1], 2)
    T = AffineMap(scale, rng.normal(size=2))
    f = lambda x: np.sin(x[0]) * x[1] ** 2  # noqa: E731
    grad_x = lambda x: np.array([np.cos(x[0]) * x[1] ** 2, 2 * np.sin(x[0]) * x[1]])  # noqa: E731
    u, h = rng.uniform(size=2), 1e-6
    grad_u = np.array([(f(T.map(u + h * e)) - f(T.map(u - h * e))) / (2 * h) for e in np.eye(2)])
    np.testing.assert_allclose(T.pullback_gradient(grad_u), grad_x(T.map(u)), rtol=1e-7, atol=1e-8)


finite = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(arrays(float, 3, elements=st.floats(0.1, 10)), arrays(float, 3, elements=finite),
       arrays(float, 3, elements=st.floats(0, 1)))
def test_round_trip(scale, offset, u):
    T = AffineMap(scale, offset)
    np.testing.assert_allclose(T.inverse_map(T.map(u)), u, atol=1e-14 * 100 / scale.min())


@settings(max_examples=30, deadline=None)
@given(lo=arrays(float, 2, elements=st.floats(-3, 3)), width=arrays(float, 2, elements=st.floats(0.2, 4)))
def test_change_of_variables(lo, width):
    T = AffineMap.from_box(lo, lo + width)
    f = lambda x: 1 + x[:, 0] ** 2 - 3 * x[:, 0] * x[:, 1] ** 3  # noqa: E731
    rule = tensor_rule(gauss_legendre_rule(6), 2)
    pulled = T.jacobian_det_abs() * (rule.weights @ f(T.map(rule.points)))
    a, b = lo, lo + width
    exact = ((b[0] - a[0]) * (b[1] - a[1]) + (b[0] ** 3 - a[0] ** 3) / 3 * (b[1] - a[1])
             - 3 * (b[0] ** 2 - a[0] ** 2) / 2 * (b[1] ** 4 - a[1] ** 4) / 4)
    assert abs(pulled - exact) <= 1e-12 * max(1, abs(exact))
