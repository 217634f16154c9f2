"""Actions, their parameter gradients, penalty terms and the Rayleigh quotient.

The action of a trial function ``y`` on the physical box ``T([0, 1]^n)`` is
evaluated on the reference box::

    S = int_[0,1]^n L(y, dy/dx, T(u)) |det J_T| du

with ``dy/dx = J_T^{-T} dy/du``. The parameter gradient is assembled from the
Lagrangian partials and the trial's vector-Jacobian product, so no finite
differences enter the training path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DegenerateState, InvalidArgument, NumericalError
from .quadrature import FaceRule, QuadratureRuleND
from .transform import AffineMap

REFERENCE = "reference"
PHYSICAL = "physical"


@dataclass(frozen=True)
class LagrangianSpec:
    """Vectorized Lagrangian density.

    All callables take ``y (Q, m)``, ``dy (Q, m, n)`` in physical coordinates
    and ``x (Q, n)``; ``value`` returns ``(Q,)``, ``d_y`` ``(Q, m)`` and
    ``d_dy`` ``(Q, m, n)``.
    """

    value: Callable
    d_y: Callable
    d_dy: Callable
    descriptor: str


def example1_lagrangian() -> LagrangianSpec:
    """``L = y + (dy/dx)^2``."""
    return LagrangianSpec(
        lambda y, dy, x: y[:, 0] + dy[:, 0, 0] ** 2,
        lambda y, dy, x: np.ones_like(y),
        lambda y, dy, x: 2.0 * dy,
        "y + (dy/dx)^2",
    )


def example2_source(x) -> np.ndarray:
    """Right-hand side ``exp(-x1) (2 - x1 - x2^3 - 6 x2)`` of the Poisson example."""
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return np.exp(-x1) * (2.0 - x1 - x2**3 - 6.0 * x2)


def poisson_lagrangian(source: Callable = example2_source,
                       gradient_coefficient: float = 0.5) -> LagrangianSpec:
    """``L = c |grad y|^2 - f y``.

    With ``c = 1/2`` the minimizer solves ``-laplace(y) = f``. ``c = 1`` is the
    unscaled energy, whose minimizer solves ``-laplace(y) = f / 2`` instead.
    """
    c = float(gradient_coefficient)
    return LagrangianSpec(
        lambda y, dy, x: c * np.sum(dy**2, axis=(1, 2)) - source(x) * y[:, 0],
        lambda y, dy, x: -source(x)[:, None] * np.ones_like(y),
        lambda y, dy, x: 2.0 * c * dy,
        f"{c:g}|grad y|^2 - f y",
    )


def oscillator_lagrangian(potential_power: int = 2) -> LagrangianSpec:
    """``L = |grad y|^2 + |x|^2 y^k`` with ``k = 2`` (physical) or ``k = 1``."""
    if potential_power not in (1, 2):
        raise InvalidArgument("potential_power must be 1 or 2")
    k = potential_power

    def value(y, dy, x):
        return np.sum(dy**2, axis=(1, 2)) + np.sum(x**2, axis=1) * np.sum(y**k, axis=1)

    def d_y(y, dy, x):
        r2 = np.sum(x**2, axis=1)[:, None]
        return r2 * (2.0 * y if k == 2 else np.ones_like(y))

    return LagrangianSpec(value, d_y, lambda y, dy, x: 2.0 * dy, f"|grad y|^2 + |x|^2 y^{k}")


@dataclass(frozen=True)
class PenaltyTerm:
    """``boundary``: ``weight * int_dOmega |y - b|^2``;
    ``normalization``: ``weight * (int_Omega |y|^2 - 1)^2``."""

    kind: str
    weight: float

    def __post_init__(self):
        if self.kind not in ("boundary", "normalization"):
            raise InvalidArgument(f"unknown penalty kind {self.kind!r}")
        if not self.weight >= 0:
            raise InvalidArgument("penalty weight must be nonnegative")


def boundary_penalty(beta: float) -> PenaltyTerm:
    return PenaltyTerm("boundary", float(beta))


def normalization_penalty(gamma: float) -> PenaltyTerm:
    return PenaltyTerm("normalization", float(gamma))


@dataclass(frozen=True)
class Problem:
    """A discretized minimization problem.

    ``trial_coords`` says what the trial function takes as input: reference
    points ``u`` or physical points ``x = T(u)``. ``boundary_data`` maps
    points in those coordinates to ``(Q, m)`` Dirichlet values.
    """

    lagrangian: LagrangianSpec
    transform: AffineMap
    volume_rule: QuadratureRuleND
    boundary_data: Callable
    face_rule: FaceRule | None = None
    penalties: tuple = ()
    trial_coords: str = REFERENCE
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.trial_coords not in (REFERENCE, PHYSICAL):
            raise InvalidArgument(f"trial_coords must be {REFERENCE!r} or {PHYSICAL!r}")
        if self.volume_rule.dim != self.transform.dim:
            raise InvalidArgument("quadrature and transform dimensions differ")
        if any(p.kind == "boundary" for p in self.penalties) and self.face_rule is None:
            raise InvalidArgument("a boundary penalty needs a face rule")

    @property
    def dim(self) -> int:
        return self.transform.dim

    def to_trial(self, U):
        return self.transform.map(U) if self.trial_coords == PHYSICAL else np.asarray(U, float)

    def from_trial(self, V):
        return np.asarray(V, float) if self.trial_coords == PHYSICAL else self.transform.map(V)

    @cached_property
    def gradient_factor(self) -> np.ndarray:
        """Multiplier turning trial-coordinate gradients into physical ones."""
        if self.trial_coords == PHYSICAL:
            return np.ones(self.dim)
        return 1.0 / self.transform.scale

    @cached_property
    def volume(self):
        U = self.volume_rule.points
        X = self.transform.map(U)
        W = self.volume_rule.weights * self.transform.jacobian_det_abs()
        return self.to_trial(U), X, W

    @cached_property
    def boundary(self):
        pts, wts = [], []
        for axis, _side, p, w in self.face_rule.faces():
            pts.append(p)
            wts.append(w * self.transform.face_measure(axis))
        V = self.to_trial(np.concatenate(pts))
        return V, np.concatenate(wts), np.asarray(self.boundary_data(V), dtype=float)

    def penalty(self, kind: str) -> float:
        return sum(p.weight for p in self.penalties if p.kind == kind)


def _check_finite(values, points, what):
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.argmax(bad.reshape(len(points), -1).any(axis=1))
        raise NumericalError(f"non-finite {what} at x={points[idx]}", point=points[idx])


def evaluate(problem: Problem, trial, theta=None, gradient: bool = True, stats=None):
    """Return ``(action, gradient or None)`` for ``trial`` (optionally re-parameterized).

    If ``stats`` is a dict it receives the moments ``mass`` (int |y|^2),
    ``dirichlet`` (int |grad y|^2) and ``moment2`` (int |x|^2 |y|^2).
    """
    if theta is not None:
        trial = trial.with_flat(theta)
    with np.errstate(over="ignore", invalid="ignore"):
        return _evaluate(problem, trial, gradient, stats)


def _evaluate(problem, trial, gradient, stats):
    V, X, W = problem.volume
    lag = problem.lagrangian
    conv = problem.gradient_factor
    y, dyv, vjp = trial.linearize(V)
    dy = dyv * conv
    dens = lag.value(y, dy, X)
    _check_finite(dens, X, "Lagrangian")
    action = np.dot(W, dens)
    if stats is not None:
        r2 = np.sum(X**2, axis=1)
        yy = np.sum(y * y, axis=1)
        stats["mass"] = float(np.dot(W, yy))
        stats["dirichlet"] = float(np.dot(W, np.sum(dy**2, axis=(1, 2))))
        stats["moment2"] = float(np.dot(W, r2 * yy))

    gamma = problem.penalty("normalization")
    beta = problem.penalty("boundary")
    if gamma:
        mass = np.dot(W, np.sum(y * y, axis=1))
        action += gamma * (mass - 1.0) ** 2
    if beta:
        Vb, Wb, bb = problem.boundary
        yb, _, vjp_b = trial.linearize(Vb)
        resid = yb - bb
        _check_finite(resid, problem.from_trial(Vb), "boundary value")
        action += beta * float(np.dot(Wb, np.sum(resid**2, axis=1)))
    if not np.isfinite(action):
        raise NumericalError("action is not finite")
    action = float(action)
    if not gradient:
        return action, None

    cy = W[:, None] * lag.d_y(y, dy, X)
    cdy = W[:, None, None] * lag.d_dy(y, dy, X) * conv
    if gamma:
        cy = cy + 4.0 * gamma * (mass - 1.0) * W[:, None] * y
    grad = vjp(cy, cdy)
    if beta:
        grad = grad + vjp_b(2.0 * beta * Wb[:, None] * resid, np.zeros(yb.shape + (problem.dim,)))
    if not np.all(np.isfinite(grad)):
        raise NumericalError("action gradient is not finite")
    return action, grad


def action(problem: Problem, trial, theta=None) -> float:
    return evaluate(problem, trial, theta, gradient=False)[0]


def action_gradient(problem: Problem, trial, theta=None) -> np.ndarray:
    return evaluate(problem, trial, theta)[1]


def boundary_integral(problem: Problem, trial, theta=None) -> float:
    """``int_dOmega |y - b|^2`` on the face rule, independent of any penalty weight."""
    if theta is not None:
        trial = trial.with_flat(theta)
    Vb, Wb, bb = problem.boundary
    resid = trial.value_and_grad_input(Vb)[0] - bb
    return float(np.dot(Wb, np.sum(resid**2, axis=1)))


def rayleigh_quotient(problem: Problem, trial, theta=None, potential_power: int = 2) -> float:
    """``int (|grad y|^2 + |x|^2 y^k) / int y^2`` on the problem's volume rule."""
    if theta is not None:
        trial = trial.with_flat(theta)
    V, X, W = problem.volume
    y, dyv = trial.value_and_grad_input(V)
    dy = dyv * problem.gradient_factor
    r2 = np.sum(X**2, axis=1)
    numer = np.dot(W, np.sum(dy**2, axis=(1, 2)) + r2 * np.sum(y**potential_power, axis=1))
    denom = np.dot(W, np.sum(y * y, axis=1))
    if not denom > 0:
        raise DegenerateState("trial state has zero norm")
    return float(numer / denom)


def sample_boundary_points(dim: int, count: int = 256, seed: int = 0) -> np.ndarray:
    """Points on the boundary of ``[0, 1]^dim``, spread round-robin over the faces.

    For ``dim == 1`` the boundary is just ``{0, 1}``.
    """
    if dim == 1:
        return np.array([[0.0], [1.0]])
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    pts = rng.random((count, dim))
    faces = np.arange(count) % (2 * dim)
    pts[np.arange(count), faces // 2] = (faces % 2).astype(float)
    return pts


def boundary_residual(problem: Problem, trial, points_u, theta=None) -> float:
    """Max ``|y - b|`` over reference boundary points ``points_u``."""
    if theta is not None:
        trial = trial.with_flat(theta)
    V = problem.to_trial(points_u)
    y = trial.value_and_grad_input(V)[0]
    return float(np.max(np.abs(y - np.asarray(problem.boundary_data(V), dtype=float))))
