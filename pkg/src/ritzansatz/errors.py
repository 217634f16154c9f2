"""Exception types raised by the solver."""

from __future__ import annotations

import numpy as np


class InvalidArgument(ValueError):
    """A parameter violates an operation's precondition."""


class InconsistentBoundaryData(ValueError):
    """Edge functions disagree at a shared corner."""


class NumericalError(ArithmeticError):
    """A non-finite value appeared during an evaluation.

    ``point`` holds the offending location when one is known.
    """

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = None if point is None else np.asarray(point, dtype=float)


class DegenerateState(ArithmeticError):
    """The trial state has zero norm, so a quotient is undefined."""
