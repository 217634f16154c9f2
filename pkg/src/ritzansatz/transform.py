"""Diagonal affine maps from the reference box ``[0, 1]^n`` onto a physical box."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class AffineMap:
    """``x_j = scale_j * u_j + offset_j``."""

    scale: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        scale = np.atleast_1d(np.asarray(self.scale, dtype=float))
        offset = np.atleast_1d(np.asarray(self.offset, dtype=float))
        if scale.shape != offset.shape:
            raise InvalidArgument("scale and offset must have the same length")
        if np.any(scale == 0) or not np.all(np.isfinite(scale)):
            raise InvalidArgument("scale entries must be finite and nonzero")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "offset", offset)

    @property
    def dim(self) -> int:
        return len(self.scale)

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.ones(dim), np.zeros(dim))

    @classmethod
    def from_box(cls, lower, upper) -> "AffineMap":
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        return cls(upper - lower, lower)

    def map(self, u):
        return np.asarray(u, dtype=float) * self.scale + self.offset

    def inverse_map(self, x):
        return (np.asarray(x, dtype=float) - self.offset) / self.scale

    def pullback_gradient(self, grad_u):
        """Convert ``dy/du`` (last axis = n) into ``dy/dx``.

        For a diagonal Jacobian ``(J^-1)^T`` just divides column j by ``scale_j``.
        """
        return np.asarray(grad_u, dtype=float) / self.scale

    def jacobian_det_abs(self) -> float:
        return float(abs(np.prod(self.scale)))

    def face_measure(self, axis: int) -> float:
        """Area element of the physical face orthogonal to ``axis``."""
        others = np.delete(self.scale, axis)
        return float(abs(np.prod(others))) if others.size else 1.0
