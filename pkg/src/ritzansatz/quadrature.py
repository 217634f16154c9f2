"""Gauss-Legendre rules on the unit interval, box and box boundary.

Nodes come from Newton iteration on the three-term Legendre recurrence, so the
module has no dependency beyond numpy. All rules live on ``[0, 1]`` (or
``[0, 1]^n``); use :meth:`QuadratureRule1D.mapped` for other intervals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericalError

NEWTON_TOL = 1e-15
NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class QuadratureRule1D:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    def mapped(self, a: float, b: float) -> "QuadratureRule1D":
        """Affine image of the rule on ``[a, b]``."""
        return QuadratureRule1D(a + (b - a) * self.nodes, (b - a) * self.weights)


@dataclass(frozen=True)
class QuadratureRuleND:
    dim: int
    points: np.ndarray  # (Q, dim)
    weights: np.ndarray  # (Q,)

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class FaceRule:
    """Per-face quadrature on the boundary of ``[0, 1]^dim``.

    Faces are ordered ``(axis 0, u=0), (axis 0, u=1), (axis 1, u=0), ...``.
    """

    dim: int
    face_points: tuple  # 2*dim arrays of shape (Qf, dim)
    face_weights: tuple  # 2*dim arrays of shape (Qf,)

    @property
    def points(self) -> np.ndarray:
        return np.concatenate(self.face_points)

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate(self.face_weights)

    def faces(self):
        """Yield ``(axis, side, points, weights)`` per face."""
        for f, (p, w) in enumerate(zip(self.face_points, self.face_weights)):
            yield f // 2, f % 2, p, w


def _legendre_and_derivative(k: int, x: np.ndarray):
    p_prev = np.ones_like(x)
    p = x.copy()
    for j in range(1, k):
        p_prev, p = p, ((2 * j + 1) * x * p - j * p_prev) / (j + 1)
    dp = k * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def gauss_legendre_rule(k: int) -> QuadratureRule1D:
    """k-node Gauss-Legendre rule on ``[0, 1]``.

    The rule is exact for polynomials of degree ``2k - 1``.
    """
    if int(k) != k or k < 1:
        raise InvalidArgument(f"number of nodes must be a positive integer, got {k!r}")
    k = int(k)
    if k == 1:
        return QuadratureRule1D(np.array([0.5]), np.array([1.0]))
    i = np.arange(1, k + 1)
    # Tricomi-style initial guess, descending roots on [-1, 1]
    x = np.cos(np.pi * (i - 0.25) / (k + 0.5))
    for _ in range(NEWTON_MAX_ITER):
        p, dp = _legendre_and_derivative(k, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= NEWTON_TOL:
            break
    _, dp = _legendre_and_derivative(k, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # symmetrize to kill the last ulp of asymmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    return QuadratureRule1D(nodes, weights)


def tensor_rule(rule: QuadratureRule1D, dim: int) -> QuadratureRuleND:
    if dim < 1:
        raise InvalidArgument(f"dim must be >= 1, got {dim}")
    grids = np.meshgrid(*([rule.nodes] * dim), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([rule.weights] * dim), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return QuadratureRuleND(dim, points, weights)


def face_rule(rule: QuadratureRule1D, dim: int) -> FaceRule:
    if dim < 1:
        raise InvalidArgument(f"dim must be >= 1, got {dim}")
    if dim == 1:
        return FaceRule(1, (np.zeros((1, 1)), np.ones((1, 1))), (np.ones(1), np.ones(1)))
    sub = tensor_rule(rule, dim - 1)
    pts, wts = [], []
    for axis, side in itertools.product(range(dim), (0.0, 1.0)):
        p = np.insert(sub.points, axis, side, axis=1)
        pts.append(p)
        wts.append(sub.weights.copy())
    return FaceRule(dim, tuple(pts), tuple(wts))


def integrate(rule, f) -> float:
    """Weighted sum ``sum_i w_i f(p_i)``.

    ``f`` is vectorized: it receives the ``(Q, dim)`` point array (``(Q,)`` for
    a 1-D rule) and returns ``Q`` values.
    """
    points = rule.nodes if isinstance(rule, QuadratureRule1D) else rule.points
    values = np.asarray(f(points), dtype=float).reshape(len(rule.weights))
    bad = ~np.isfinite(values)
    if bad.any():
        where = points[np.argmax(bad)]
        raise NumericalError(f"integrand is not finite at {where}", point=where)
    return float(np.dot(rule.weights, values))


def default_nodes(dim: int) -> int:
    """Node count per axis used when the caller does not choose one."""
    return 32 if dim <= 2 else 16
