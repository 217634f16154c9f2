"""Neural Ritz solver with a boundary-conforming ansatz.

Trial functions have the form ``y = B(u) + p(u) * N(u, theta)``: ``B``
matches the Dirichlet data, ``p`` vanishes on the boundary of the box and
``N`` is a shallow tanh network. A penalty-based Deep Ritz trial (bare
network plus a boundary mismatch term) is provided as a baseline.
"""

from .ansatz import (AnsatzSpec, BoundaryExtension, NetworkTrial, PolynomialFactor,
                     constant_extension, coons_patch, linear_extension_1d, scaled_box_bubble,
                     unit_bubble, zero_extension)
from .errors import DegenerateState, InconsistentBoundaryData, InvalidArgument, NumericalError
from .functional import (LagrangianSpec, PenaltyTerm, Problem, action, action_gradient,
                         boundary_penalty, evaluate, normalization_penalty, rayleigh_quotient)
from .network import NetParams, TwoLayerParams, init_gaussian, load_params, save_params
from .optimizer import TrainConfig, TrainTrace, convergence_iteration, gd_step, train
from .quadrature import face_rule, gauss_legendre_rule, integrate, tensor_rule
from .transform import AffineMap

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "AnsatzSpec",
    "BoundaryExtension",
    "DegenerateState",
    "InconsistentBoundaryData",
    "InvalidArgument",
    "LagrangianSpec",
    "NetParams",
    "NetworkTrial",
    "NumericalError",
    "PenaltyTerm",
    "PolynomialFactor",
    "Problem",
    "TrainConfig",
    "TrainTrace",
    "TwoLayerParams",
    "action",
    "action_gradient",
    "boundary_penalty",
    "constant_extension",
    "convergence_iteration",
    "coons_patch",
    "evaluate",
    "face_rule",
    "gauss_legendre_rule",
    "gd_step",
    "init_gaussian",
    "integrate",
    "linear_extension_1d",
    "load_params",
    "normalization_penalty",
    "rayleigh_quotient",
    "save_params",
    "scaled_box_bubble",
    "tensor_rule",
    "train",
    "unit_bubble",
    "zero_extension",
]
