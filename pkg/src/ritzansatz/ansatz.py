"""Boundary-conforming trial functions ``y(u) = B(u) + p(u) * N(u)``.

``B`` matches the Dirichlet data on the boundary of the box and ``p`` vanishes
there, so every parameter vector gives an admissible function. Also provides
:class:`NetworkTrial`, the bare network used by the penalty baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import InconsistentBoundaryData, InvalidArgument
from .network import _as_batch, _unbatch

CORNER_TOL = 1e-10


@dataclass(frozen=True)
class PolynomialFactor:
    """Scalar factor ``p`` and its gradient, both vectorized over ``(Q, n)``."""

    dim: int
    value: Callable
    gradient: Callable
    descriptor: str

    def __call__(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(self.value(U), single)

    def grad(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(self.gradient(U), single)


@dataclass(frozen=True)
class BoundaryExtension:
    """``B`` with gradient, plus the boundary data ``data`` it reproduces.

    ``value`` maps ``(Q, n)`` to ``(Q, m)``, ``gradient`` to ``(Q, m, n)``.
    """

    dim: int
    out_dim: int
    value: Callable
    gradient: Callable
    data: Callable
    descriptor: str

    def __call__(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(self.value(U), single)

    def grad(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(self.gradient(U), single)


def _product_rule(factors, dfactors):
    """Value and gradient of ``prod_j f_j(u_j)`` from per-axis arrays ``(Q, n)``."""
    value = np.prod(factors, axis=1)
    n = factors.shape[1]
    grad = np.empty_like(factors)
    for j in range(n):
        others = np.prod(np.delete(factors, j, axis=1), axis=1) if n > 1 else 1.0
        grad[:, j] = dfactors[:, j] * others
    return value, grad


def unit_bubble(n: int) -> PolynomialFactor:
    """``p(u) = prod_j u_j (1 - u_j)`` on ``[0, 1]^n``."""
    if n < 1:
        raise InvalidArgument("dimension must be >= 1")
    return PolynomialFactor(
        n,
        lambda U: _product_rule(U * (1 - U), 1 - 2 * U)[0],
        lambda U: _product_rule(U * (1 - U), 1 - 2 * U)[1],
        f"prod_j u_j(1-u_j), n={n}",
    )


def scaled_box_bubble(half_width: float, n: int) -> PolynomialFactor:
    """``p(x) = prod_j (1 - (x_j / L)^2)`` on ``[-L, L]^n``."""
    L = float(half_width)
    if not L > 0:
        raise InvalidArgument("half-width must be positive")
    if n < 1:
        raise InvalidArgument("dimension must be >= 1")

    def parts(X):
        return _product_rule(1 - (X / L) ** 2, -2 * X / L**2)

    return PolynomialFactor(
        n, lambda X: parts(X)[0], lambda X: parts(X)[1], f"prod_j (1-(x_j/{L:g})^2), n={n}"
    )


def linear_extension_1d(b0: float, b1: float) -> BoundaryExtension:
    """``B(u) = (1 - u) b0 + u b1``."""
    b0, b1 = float(b0), float(b1)

    def data(U):
        return np.where(U[:, :1] < 0.5, b0, b1)

    return BoundaryExtension(
        1, 1,
        lambda U: (1 - U) * b0 + U * b1,
        lambda U: np.full((U.shape[0], 1, 1), b1 - b0),
        data,
        f"linear 1-D extension b(0)={b0:g}, b(1)={b1:g}",
    )


def zero_extension(n: int, m: int = 1) -> BoundaryExtension:
    return constant_extension(0.0, n, m)


def constant_extension(c: float, n: int, m: int = 1) -> BoundaryExtension:
    c = float(c)
    return BoundaryExtension(
        n, m,
        lambda U: np.full((U.shape[0], m), c),
        lambda U: np.zeros((U.shape[0], m, n)),
        lambda U: np.full((U.shape[0], m), c),
        f"constant extension {c:g}",
    )


def coons_patch(left, right, bottom, top, d_left, d_right, d_bottom, d_top,
                descriptor: str = "coons patch") -> BoundaryExtension:
    """Bilinearly blended transfinite interpolation on ``[0, 1]^2``.

    ``left(s) = b(0, s)``, ``right(s) = b(1, s)``, ``bottom(s) = b(s, 0)`` and
    ``top(s) = b(s, 1)``; the ``d_*`` arguments are their derivatives. All are
    vectorized scalar functions. Corner values are read from the edges and must
    agree to ``CORNER_TOL``.
    """
    zero, one = np.array([0.0]), np.array([1.0])
    pairs = {
        "(0,0)": (left(zero), bottom(zero)),
        "(1,0)": (right(zero), bottom(one)),
        "(0,1)": (left(one), top(zero)),
        "(1,1)": (right(one), top(one)),
    }
    for name, (a, b) in pairs.items():
        if abs(float(a[0]) - float(b[0])) > CORNER_TOL:
            raise InconsistentBoundaryData(
                f"edge functions disagree at corner {name}: {float(a[0])!r} vs {float(b[0])!r}")
    c00, c10, c01, c11 = (float(v[0][0]) for v in pairs.values())

    def value(U):
        s, t = U[:, 0], U[:, 1]
        lofts = (1 - s) * left(t) + s * right(t) + (1 - t) * bottom(s) + t * top(s)
        corners = (1 - s) * (1 - t) * c00 + s * (1 - t) * c10 + (1 - s) * t * c01 + s * t * c11
        return (lofts - corners)[:, None]

    def gradient(U):
        s, t = U[:, 0], U[:, 1]
        ds = (-left(t) + right(t) + (1 - t) * d_bottom(s) + t * d_top(s)
              - (-(1 - t) * c00 + (1 - t) * c10 - t * c01 + t * c11))
        dt = ((1 - s) * d_left(t) + s * d_right(t) - bottom(s) + top(s)
              - (-(1 - s) * c00 - s * c10 + (1 - s) * c01 + s * c11))
        return np.stack([ds, dt], axis=-1)[:, None, :]

    def data(U):
        s, t = U[:, 0], U[:, 1]
        out = np.select(
            [s == 0, s == 1, t == 0, t == 1],
            [left(t), right(t), bottom(s), top(s)],
            default=np.nan,
        )
        return out[:, None]

    return BoundaryExtension(2, 1, value, gradient, data, descriptor)


@dataclass(frozen=True)
class AnsatzSpec:
    """``y(v) = B(v) + sign * p(v) * N(v)``.

    ``sign`` only matters for gradient-descent dynamics: both signs span the
    same function set because ``N`` is linear in its output weights.
    """

    extension: BoundaryExtension
    bubble: PolynomialFactor
    net: object
    sign: float = 1.0

    def __post_init__(self):
        n = self.net.in_dim
        if self.extension.dim != n or self.bubble.dim != n:
            raise InvalidArgument("extension, bubble and network input dimensions differ")
        if self.extension.out_dim != self.net.out_dim:
            raise InvalidArgument("extension and network output dimensions differ")

    @property
    def dim(self) -> int:
        return self.net.in_dim

    @property
    def out_dim(self) -> int:
        return self.net.out_dim

    def with_flat(self, theta) -> "AnsatzSpec":
        return replace(self, net=self.net.with_flat(theta))

    def boundary_data(self, U):
        return self.extension.data(U)

    def value_and_grad_input(self, U):
        y, dy, _ = self.linearize(U)
        return y, dy

    def linearize(self, U):
        """``(y, dy/du, vjp)`` with the network's activations computed once."""
        B, dB = self.extension.value(U), self.extension.gradient(U)
        p, dp = self.bubble.value(U), self.bubble.gradient(U)
        N, dN, net_vjp = self.net.linearize(U)
        y = B + self.sign * p[:, None] * N
        dy = dB + self.sign * (N[:, :, None] * dp[:, None, :] + p[:, None, None] * dN)

        def vjp(cy, cdy):
            c0 = self.sign * (cy * p[:, None] + np.einsum("qij,qj->qi", cdy, dp))
            c1 = self.sign * p[:, None, None] * cdy
            return net_vjp(c0, c1)

        return y, dy, vjp

    def eval(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(self.value_and_grad_input(U)[0], single)

    def grad_u(self, u):
        U, single = _as_batch(u, self.dim)
        return _unbatch(self.value_and_grad_input(U)[1], single)

    def grad_theta(self, u):
        U, single = _as_batch(u, self.dim)
        p = self.bubble.value(U)
        out = self.sign * p[:, None, None] * self.net.grad_params(U).reshape(len(U), self.out_dim, -1)
        return _unbatch(out, single)

    def mixed_theta_u(self, u):
        U, single = _as_batch(u, self.dim)
        Q = len(U)
        p, dp = self.bubble.value(U), self.bubble.gradient(U)
        g = self.net.grad_params(U).reshape(Q, self.out_dim, -1)
        h = self.net.mixed_second(U).reshape(Q, self.out_dim, -1, self.dim)
        out = self.sign * (g[..., None] * dp[:, None, None, :] + p[:, None, None, None] * h)
        return _unbatch(out, single)

    def vjp(self, U, cy, cdy):
        return self.linearize(U)[2](cy, cdy)


@dataclass(frozen=True)
class NetworkTrial:
    """The network itself as trial function; boundary data is only carried."""

    net: object
    data: Callable | None = None

    @property
    def dim(self) -> int:
        return self.net.in_dim

    @property
    def out_dim(self) -> int:
        return self.net.out_dim

    def with_flat(self, theta) -> "NetworkTrial":
        return replace(self, net=self.net.with_flat(theta))

    def boundary_data(self, U):
        if self.data is None:
            raise InvalidArgument("this trial carries no boundary data")
        return self.data(U)

    def value_and_grad_input(self, U):
        return self.net.value_and_grad_input(U)

    def linearize(self, U):
        return self.net.linearize(U)

    def eval(self, u):
        return self.net.forward(u)

    def grad_u(self, u):
        return self.net.grad_input(u)

    def grad_theta(self, u):
        return self.net.grad_params(u)

    def mixed_theta_u(self, u):
        return self.net.mixed_second(u)

    def vjp(self, U, cy, cdy):
        return self.net.vjp(U, cy, cdy)
