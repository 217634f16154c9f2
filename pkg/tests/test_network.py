import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import central_diff, rel_err
from ritzansatz.errors import InvalidArgument
from ritzansatz.network import (NetParams, TwoLayerParams, init_gaussian, load_params,
                                save_params)


def one_unit(alpha, w, b):
    return NetParams(np.array([[alpha]]), np.array([[[w]]]), np.array([[b]]))


def test_forward_examples():
    assert one_unit(1, 0, 0).forward(0.7)[0] == 0.0
    p = one_unit(2, 1, 0)
    assert p.forward(0.0)[0] == 0.0
    assert p.forward(50.0)[0] == pytest.approx(2.0, abs=1e-15)
    pair = NetParams(np.array([[1.0, -1.0]]), np.ones((1, 2, 1)), np.zeros((1, 2)))
    for u in (-3.0, 0.1, 2.5):
        assert pair.forward(u)[0] == 0.0


def test_grad_input_examples():
    assert one_unit(1, 1, 0).grad_input(0.0)[0, 0] == 1.0
    assert one_unit(3, 2, 0).grad_input(0.0)[0, 0] == 6.0


def test_grad_params_zero_alpha_and_zero_input(rng):
    p = init_gaussian(2, 3, 4, 0.0, 1.0, seed=3)
    zero_alpha = NetParams(np.zeros_like(p.alpha), p.w, p.b)
    g = zero_alpha.grad_params(rng.uniform(size=3))
    a = p.alpha.size
    assert np.all(g[:, a:] == 0)
    g0 = p.grad_params(np.zeros(3))
    assert np.all(g0[:, a:a + p.w.size] == 0)


def test_mixed_second_examples():
    assert one_unit(1, 1, 0).mixed_second(0.0)[0, 0, 0] == 1.0
    p = init_gaussian(1, 2, 3, 0.0, 1.0, seed=5)
    zero_alpha = NetParams(np.zeros_like(p.alpha), p.w, p.b)
    ms = zero_alpha.mixed_second(np.array([0.2, 0.6]))
    assert np.all(ms[:, -p.b.size:, :] == 0)


def test_init_gaussian():
    p = init_gaussian(1, 1, 3, mean=10.0, std=0.0, seed=9)
    assert np.all(p.flatten() == 10.0)
    a = init_gaussian(2, 3, 5, 0.5, 0.1, seed=42).flatten()
    b = init_gaussian(2, 3, 5, 0.5, 0.1, seed=42).flatten()
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, init_gaussian(2, 3, 5, 0.5, 0.1, seed=43).flatten())
    s = init_gaussian(1, 1, 2, 10.0, 0.1, seed=42).flatten()
    assert abs(s.mean() - 10.0) <= 0.3
    with pytest.raises(InvalidArgument):
        init_gaussian(1, 1, 2, 0.0, -1.0)


def test_parameter_counts_and_order():
    p = init_gaussian(2, 3, 4, seed=0)
    assert p.size == NetParams.count(2, 3, 4) == 2 * 4 * (3 + 2)
    flat = p.flatten()
    np.testing.assert_array_equal(flat[:8], p.alpha.ravel())
    np.testing.assert_array_equal(flat[8:32], p.w.ravel())
    np.testing.assert_array_equal(flat[32:], p.b.ravel())
    q = init_gaussian(1, 2, 3, seed=0, layers=2)
    assert q.size == TwoLayerParams.count(1, 2, 3) == 3 * (2 + 3 + 3)


def test_rejects_non_finite():
    with pytest.raises(InvalidArgument):
        one_unit(np.nan, 0, 0)


@pytest.mark.parametrize("layers", [1, 2])
@settings(max_examples=25, deadline=None)
@given(v=st.lists(st.floats(-1e6, 1e6), min_size=30, max_size=30))
def test_flatten_round_trip(layers, v):
    m, n, N = 1, 2, 2
    cls = NetParams if layers == 1 else TwoLayerParams
    theta = np.array(v[:cls.count(m, n, N)])
    p = cls.unflatten(theta, m, n, N)
    assert p.flatten().tobytes() == theta.tobytes()


def _fd_checks(p, u, h=1e-6):
    theta = p.flatten()
    fd_u = central_diff(lambda x: p.forward(x), u, h)
    fd_t = central_diff(lambda t: p.with_flat(t).forward(u), theta, h)
    fd_ut = central_diff(lambda t: p.with_flat(t).grad_input(u), theta, h)  # (m, n, P)
    return (rel_err(p.grad_input(u), fd_u), rel_err(p.grad_params(u), fd_t),
            rel_err(p.mixed_second(u), fd_ut.transpose(0, 2, 1)))


@pytest.mark.parametrize("layers", [1, 2])
def test_derivatives_match_finite_differences(layers):
    rng = np.random.default_rng(layers)
    worst = np.zeros(3)
    for trial in range(100):
        m, n, N = rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 5)
        p = init_gaussian(m, n, N, 0.0, 1.0, seed=trial, layers=layers)
        worst = np.maximum(worst, _fd_checks(p, rng.uniform(-1, 1, n)))
    assert worst.max() <= 1e-5, worst


def test_grad_input_random_n2_tight(rng):
    p = init_gaussian(1, 2, 6, 0.0, 1.0, seed=11)
    u = rng.uniform(size=2)
    assert rel_err(p.grad_input(u), central_diff(p.forward, u)) <= 1e-6


@pytest.mark.parametrize("layers", [1, 2])
def test_batched_vjp_matches_dense_derivatives(layers, rng):
    p = init_gaussian(2, 3, 4, 0.2, 0.7, seed=4, layers=layers)
    U = rng.uniform(size=(6, 3))
    cy, cdy = rng.normal(size=(6, 2)), rng.normal(size=(6, 2, 3))
    dense = (np.einsum("qi,qis->s", cy, p.grad_params(U))
             + np.einsum("qij,qisj->s", cdy, p.mixed_second(U)))
    np.testing.assert_allclose(p.vjp(U, cy, cdy), dense, rtol=1e-12, atol=1e-12)


def test_tanh_is_affine_sigmoid():
    t = np.linspace(-20, 20, 2001)
    sigma = 1 / (1 + np.exp(-2 * t))
    np.testing.assert_allclose(np.tanh(t), 2 * sigma - 1, atol=1e-15)


@pytest.mark.parametrize("layers", [1, 2])
def test_snapshot_round_trip(tmp_path, layers):
    p = init_gaussian(1, 3, 4, 0.1, 0.5, seed=2, layers=layers)
    path = tmp_path / "p.bin"
    save_params(path, p)
    raw = path.read_bytes()
    assert raw[:4] == b"RZNP" and len(raw) == 4 + 16 + 8 * p.size
    q = load_params(path)
    assert type(q) is type(p) and q.shape() == p.shape()
    assert q.flatten().tobytes() == p.flatten().tobytes()


def test_snapshot_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"nope" + bytes(16))
    with pytest.raises(InvalidArgument):
        load_params(path)
