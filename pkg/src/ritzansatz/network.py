"""Shallow tanh networks with closed-form derivatives.

A single-hidden-layer network with ``m`` outputs, ``n`` inputs and ``N`` hidden
units is, per output ``i``::

    N_i(u) = sum_l alpha[i, l] * tanh(w[i, l] . u + b[i, l])

Each output has its own hidden layer and there is no output bias. The flat
parameter vector is ``(alpha, w, b)``, each block row-major.

Every evaluator accepts a single point of shape ``(n,)`` or a batch ``(Q, n)``
and returns correspondingly unbatched or batched arrays. Training code only
needs :meth:`value_and_grad_input` and :meth:`vjp`, which never build the full
``(Q, m, P, n)`` mixed-derivative tensor.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgument

SNAPSHOT_MAGIC = b"RZNP"
_HEADER = struct.Struct("<4s4I")


def _as_batch(u, n):
    """Return ``(U, single)`` with ``U`` of shape ``(Q, n)``.

    A 1-D array of length ``n`` is one point; for ``n == 1`` a longer 1-D
    array is read as a batch of scalars.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u.reshape(1)
    if u.ndim == 1:
        if u.shape[0] == n:
            return u.reshape(1, n), True
        if n == 1:
            return u.reshape(-1, 1), False
    if u.ndim != 2 or u.shape[1] != n:
        raise InvalidArgument(f"expected points with {n} coordinates, got shape {u.shape}")
    return u, False


def _unbatch(arr, single):
    return arr[0] if single else arr


@dataclass
class NetParams:
    alpha: np.ndarray  # (m, N)
    w: np.ndarray  # (m, N, n)
    b: np.ndarray  # (m, N)

    layers = 1

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        m, N = self.alpha.shape
        if self.w.shape[:2] != (m, N) or self.w.ndim != 3 or self.b.shape != (m, N):
            raise InvalidArgument("inconsistent parameter shapes")
        if not (np.isfinite(self.alpha).all() and np.isfinite(self.w).all()
                and np.isfinite(self.b).all()):
            raise InvalidArgument("parameters must be finite")

    @property
    def out_dim(self) -> int:
        return self.alpha.shape[0]

    @property
    def in_dim(self) -> int:
        return self.w.shape[2]

    @property
    def width(self) -> int:
        return self.alpha.shape[1]

    @property
    def size(self) -> int:
        m, N, n = self.w.shape
        return m * N * (n + 2)

    @staticmethod
    def count(m: int, n: int, N: int) -> int:
        return m * N * (n + 2)

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.alpha.ravel(), self.w.ravel(), self.b.ravel()])

    @classmethod
    def unflatten(cls, theta, m: int, n: int, N: int) -> "NetParams":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (cls.count(m, n, N),):
            raise InvalidArgument(f"expected {cls.count(m, n, N)} parameters, got {theta.shape}")
        i = m * N
        j = i + m * N * n
        return cls(theta[:i].reshape(m, N).copy(), theta[i:j].reshape(m, N, n).copy(),
                   theta[j:].reshape(m, N).copy())

    def with_flat(self, theta) -> "NetParams":
        return type(self).unflatten(theta, self.out_dim, self.in_dim, self.width)

    def shape(self):
        return (self.out_dim, self.in_dim, self.width)

    def _offsets(self):
        m, N, n = self.w.shape
        return 0, m * N, m * N + m * N * n

    def _hidden(self, U):
        """``tanh`` activations and their derivatives, laid out ``(m, Q, N)``."""
        t = np.matmul(U, self.w.transpose(0, 2, 1))
        t += self.b[:, None, :]
        np.tanh(t, out=t)
        s = t * t
        np.subtract(1.0, s, out=s)
        return t, s

    def forward(self, u):
        U, single = _as_batch(u, self.in_dim)
        return _unbatch(self.value_and_grad_input(U)[0], single)

    def grad_input(self, u):
        U, single = _as_batch(u, self.in_dim)
        return _unbatch(self.value_and_grad_input(U)[1], single)

    def value_and_grad_input(self, U):
        """Batched ``(N(U), dN/du)`` with shapes ``(Q, m)`` and ``(Q, m, n)``."""
        y, dy, _ = self.linearize(U)
        return y, dy

    def linearize(self, U):
        """``(y, dy/du, vjp)`` at the batch ``U``, sharing one activation pass.

        ``vjp(cy, cdy)`` returns the flat
        ``sum_q [cy . dN/dtheta + cdy : d^2N/(dtheta du)]`` for ``cy (Q, m)``
        and ``cdy (Q, m, n)``.
        """
        t, s = self._hidden(U)
        alpha = self.alpha
        aw = alpha[:, :, None] * self.w  # (m, N, n)
        y = np.matmul(t, alpha[:, :, None])[:, :, 0].T
        dy = np.matmul(s, aw).transpose(1, 0, 2)

        def vjp(cy, cdy):
            # Only O(Q N) temporaries are r*s and t*r*s; everything else is a
            # matmul against the (Q, n) or (Q, 1) cotangents.
            cyT = cy.T[:, None, :]  # (m, 1, Q)
            cdy_ = cdy.transpose(1, 0, 2)  # (m, Q, n)
            rs = np.matmul(cdy_, self.w.transpose(0, 2, 1))  # r = cdy . w
            rs *= s
            trs = t * rs
            ones = np.ones((1, 1, U.shape[0]))
            g_alpha = (np.matmul(cyT, t) + np.matmul(ones, rs))[:, 0, :]
            cyU = cy.T[:, :, None] * U[None]  # (m, Q, n)
            sT = s.transpose(0, 2, 1)
            g_w = alpha[:, :, None] * (
                np.matmul(sT, cyU) - 2.0 * np.matmul(trs.transpose(0, 2, 1), U)
                + np.matmul(sT, cdy_)
            )
            g_b = alpha * (np.matmul(cyT, s) - 2.0 * np.matmul(ones, trs))[:, 0, :]
            return np.concatenate([g_alpha.ravel(), g_w.ravel(), g_b.ravel()])

        return y, dy, vjp

    def grad_params(self, u):
        """``dN_i/dtheta_s`` as an ``(m, P)`` matrix (``(Q, m, P)`` batched)."""
        U, single = _as_batch(u, self.in_dim)
        m, N, n = self.w.shape
        t, s = self._hidden(U)
        t, s = t.transpose(1, 0, 2), s.transpose(1, 0, 2)
        Q = U.shape[0]
        out = np.zeros((Q, m, self.size))
        oa, ow, ob = self._offsets()
        asx = self.alpha * s  # (Q, m, N)
        for i in range(m):
            out[:, i, oa + i * N: oa + (i + 1) * N] = t[:, i]
            dw = asx[:, i, :, None] * U[:, None, :]
            out[:, i, ow + i * N * n: ow + (i + 1) * N * n] = dw.reshape(Q, N * n)
            out[:, i, ob + i * N: ob + (i + 1) * N] = asx[:, i]
        return _unbatch(out, single)

    def mixed_second(self, u):
        """``d^2 N_i / dtheta_s du_j`` as ``(m, P, n)`` (``(Q, m, P, n)`` batched)."""
        U, single = _as_batch(u, self.in_dim)
        m, N, n = self.w.shape
        t, s = self._hidden(U)
        t, s = t.transpose(1, 0, 2), s.transpose(1, 0, 2)
        ds = -2.0 * t * s  # derivative of 1 - tanh^2
        Q = U.shape[0]
        out = np.zeros((Q, m, self.size, n))
        oa, ow, ob = self._offsets()
        eye = np.eye(n)
        for i in range(m):
            a = self.alpha[i]
            wi = self.w[i]  # (N, n)
            out[:, i, oa + i * N: oa + (i + 1) * N] = s[:, i, :, None] * wi
            # d/dw_lk d/du_j = alpha_l (s_l delta_kj + ds_l w_lj u_k)
            blk = a[None, :, None, None] * (
                s[:, i, :, None, None] * eye[None, None]
                + ds[:, i, :, None, None] * U[:, None, :, None] * wi[None, :, None, :]
            )
            out[:, i, ow + i * N * n: ow + (i + 1) * N * n] = blk.reshape(Q, N * n, n)
            out[:, i, ob + i * N: ob + (i + 1) * N] = (a * ds[:, i])[:, :, None] * wi
        return _unbatch(out, single)

    def vjp(self, U, cy, cdy) -> np.ndarray:
        """See :meth:`linearize`."""
        return self.linearize(U)[2](cy, cdy)


@dataclass
class TwoLayerParams:
    """Two tanh hidden layers of equal width, linear output, per output ``i``::

        N_i(u) = alpha_i . tanh(w2_i tanh(w1_i u + b1_i) + b2_i)

    Flat order: ``alpha, w1, b1, w2, b2``.
    """

    alpha: np.ndarray  # (m, N)
    w1: np.ndarray  # (m, N, n)
    b1: np.ndarray  # (m, N)
    w2: np.ndarray  # (m, N, N)
    b2: np.ndarray  # (m, N)

    layers = 2

    def __post_init__(self):
        for name in ("alpha", "w1", "b1", "w2", "b2"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        m, N = self.alpha.shape
        ok = (self.w1.ndim == 3 and self.w1.shape[:2] == (m, N) and self.b1.shape == (m, N)
              and self.w2.shape == (m, N, N) and self.b2.shape == (m, N))
        if not ok:
            raise InvalidArgument("inconsistent parameter shapes")
        if not all(np.isfinite(getattr(self, k)).all() for k in ("alpha", "w1", "b1", "w2", "b2")):
            raise InvalidArgument("parameters must be finite")

    @property
    def out_dim(self) -> int:
        return self.alpha.shape[0]

    @property
    def in_dim(self) -> int:
        return self.w1.shape[2]

    @property
    def width(self) -> int:
        return self.alpha.shape[1]

    @staticmethod
    def count(m: int, n: int, N: int) -> int:
        return m * N * (n + N + 3)

    @property
    def size(self) -> int:
        return self.count(self.out_dim, self.in_dim, self.width)

    def shape(self):
        return (self.out_dim, self.in_dim, self.width)

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in (self.alpha, self.w1, self.b1, self.w2, self.b2)])

    @classmethod
    def unflatten(cls, theta, m: int, n: int, N: int) -> "TwoLayerParams":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (cls.count(m, n, N),):
            raise InvalidArgument(f"expected {cls.count(m, n, N)} parameters, got {theta.shape}")
        shapes = [(m, N), (m, N, n), (m, N), (m, N, N), (m, N)]
        parts, k = [], 0
        for sh in shapes:
            size = int(np.prod(sh))
            parts.append(theta[k:k + size].reshape(sh).copy())
            k += size
        return cls(*parts)

    def with_flat(self, theta) -> "TwoLayerParams":
        return type(self).unflatten(theta, self.out_dim, self.in_dim, self.width)

    def _layers(self, U):
        t1 = np.tanh(np.einsum("qj,ilj->qil", U, self.w1) + self.b1)
        s1 = 1.0 - t1 * t1
        t2 = np.tanh(np.einsum("qil,ikl->qik", t1, self.w2) + self.b2)
        s2 = 1.0 - t2 * t2
        return t1, s1, t2, s2

    def value_and_grad_input(self, U):
        y, dy, _ = self.linearize(U)
        return y, dy

    def forward(self, u):
        U, single = _as_batch(u, self.in_dim)
        return _unbatch(self.value_and_grad_input(U)[0], single)

    def grad_input(self, u):
        U, single = _as_batch(u, self.in_dim)
        return _unbatch(self.value_and_grad_input(U)[1], single)

    def linearize(self, U):
        """Same contract as :meth:`NetParams.linearize`; the vjp is a hand-written
        reverse pass through both layers and the input-gradient graph."""
        t1, s1, t2, s2 = self._layers(U)
        a = self.alpha
        d1 = s1[..., None] * self.w1  # dt1/du, (Q, m, N, n)
        e = np.einsum("ikl,qilj->qikj", self.w2, d1, optimize=True)  # dz2/du
        y = np.einsum("qik,ik->qi", t2, a)
        dy = np.einsum("ik,qik,qikj->qij", a, s2, e, optimize=True)

        def vjp(cy, cdy):
            g_alpha = np.einsum("qi,qik->ik", cy, t2) + np.einsum(
                "qij,qik,qikj->ik", cdy, s2, e, optimize=True)
            t2_bar = cy[:, :, None] * a
            e_bar = np.einsum("qij,ik,qik->qikj", cdy, a, s2, optimize=True)
            s2_bar = a * np.einsum("qij,qikj->qik", cdy, e, optimize=True)
            z2_bar = (t2_bar - 2.0 * t2 * s2_bar) * s2
            g_b2 = z2_bar.sum(axis=0)
            g_w2 = np.einsum("qik,qil->ikl", z2_bar, t1, optimize=True) + np.einsum(
                "qikj,qilj->ikl", e_bar, d1, optimize=True)
            f = np.einsum("qikj,ikl->qilj", e_bar, self.w2, optimize=True)  # adjoint of d1
            t1_bar = np.einsum("qik,ikl->qil", z2_bar, self.w2, optimize=True)
            s1_bar = np.einsum("qilj,ilj->qil", f, self.w1, optimize=True)
            z1_bar = (t1_bar - 2.0 * t1 * s1_bar) * s1
            g_b1 = z1_bar.sum(axis=0)
            g_w1 = np.einsum("qilj,qil->ilj", f, s1, optimize=True) + np.einsum(
                "qil,qj->ilj", z1_bar, U, optimize=True)
            return np.concatenate([g.ravel() for g in (g_alpha, g_w1, g_b1, g_w2, g_b2)])

        return y, dy, vjp

    def vjp(self, U, cy, cdy) -> np.ndarray:
        return self.linearize(U)[2](cy, cdy)

    def grad_params(self, u):
        U, single = _as_batch(u, self.in_dim)
        m, n = self.out_dim, self.in_dim
        out = np.zeros((U.shape[0], m, self.size))
        for q in range(U.shape[0]):
            for i in range(m):
                cy = np.zeros((1, m))
                cy[0, i] = 1.0
                out[q, i] = self.vjp(U[q:q + 1], cy, np.zeros((1, m, n)))
        return _unbatch(out, single)

    def mixed_second(self, u):
        U, single = _as_batch(u, self.in_dim)
        m, n = self.out_dim, self.in_dim
        out = np.zeros((U.shape[0], m, self.size, n))
        for q in range(U.shape[0]):
            for i in range(m):
                for j in range(n):
                    c = np.zeros((1, m, n))
                    c[0, i, j] = 1.0
                    out[q, i, :, j] = self.vjp(U[q:q + 1], np.zeros((1, m)), c)
        return _unbatch(out, single)


def init_gaussian(m: int, n: int, N: int, mean: float = 0.0, std: float = 0.1,
                  seed: int = 0, layers: int = 1):
    """Draw every parameter independently from ``Normal(mean, std)``.

    Uses numpy's PCG64 generator seeded through ``SeedSequence(seed)``; the
    whole flat vector is drawn in one call, so the same seed and shape always
    give bit-identical parameters.
    """
    if std < 0:
        raise InvalidArgument("std must be nonnegative")
    if min(m, n, N) < 1:
        raise InvalidArgument("m, n and N must be positive")
    cls = {1: NetParams, 2: TwoLayerParams}.get(layers)
    if cls is None:
        raise InvalidArgument(f"layers must be 1 or 2, got {layers}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    theta = mean + std * rng.standard_normal(cls.count(m, n, N))
    return cls.unflatten(theta, m, n, N)


def save_params(path, params) -> None:
    """Write a parameter snapshot.

    Layout (little-endian): 4-byte magic ``RZNP``; uint32 ``m, n, N, layers``;
    then the flat parameter vector as float64.
    """
    m, n, N = params.shape()
    header = _HEADER.pack(SNAPSHOT_MAGIC, m, n, N, params.layers)
    Path(path).write_bytes(header + params.flatten().astype("<f8").tobytes())


def load_params(path):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise InvalidArgument("snapshot file is truncated")
    magic, m, n, N, layers = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise InvalidArgument("not a parameter snapshot")
    cls = {1: NetParams, 2: TwoLayerParams}.get(layers)
    if cls is None:
        raise InvalidArgument(f"unsupported layer count {layers}")
    theta = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(float)
    return cls.unflatten(theta, m, n, N)
