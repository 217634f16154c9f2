"""Fixed-step gradient descent with trace recording."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidArgument, NumericalError
from .functional import Problem, boundary_residual, evaluate, sample_boundary_points

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    max_iters: int = 1000
    record_every: int = 1
    seed: int = 0
    init_mean: float = 0.0
    init_std: float = 0.1
    boundary_samples: int = 256

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidArgument("learning rate must be positive")
        if self.max_iters < 1:
            raise InvalidArgument("max_iters must be >= 1")
        if self.record_every < 1:
            raise InvalidArgument("record_every must be >= 1")


@dataclass
class TrainTrace:
    iters: list = field(default_factory=list)
    action: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    boundary_residual: list = field(default_factory=list)
    lam: list | None = None
    theta: np.ndarray | None = None
    status: str = "completed"
    message: str = ""

    @property
    def diverged(self) -> bool:
        return self.status == "diverged"

    def __len__(self) -> int:
        return len(self.iters)

    def rows(self):
        cols = [self.iters, self.action, self.grad_norm, self.boundary_residual]
        if self.lam is not None:
            cols.append(self.lam)
        return zip(*cols)

    def header(self):
        h = ["iter", "action", "grad_norm", "boundary_residual"]
        return h + ["lambda"] if self.lam is not None else h

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.header())
            for row in self.rows():
                writer.writerow([str(row[0])] + [fmt_float(v) for v in row[1:]])

    def to_json(self, config: TrainConfig | None = None) -> dict:
        out = {name: list(map(float, getattr(self, name))) for name in
               ("action", "grad_norm", "boundary_residual")}
        out["iter"] = list(self.iters)
        if self.lam is not None:
            out["lambda"] = list(map(float, self.lam))
        out["status"] = self.status
        if config is not None:
            out["config"] = asdict(config)
        return out

    def write_json(self, path, config: TrainConfig | None = None) -> None:
        with open(path, "w") as fh:
            fh.write(dumps(self.to_json(config)))


def fmt_float(v) -> str:
    return format(float(v), ".17g")


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    def conv(o):
        if isinstance(o, (float, np.floating)):
            return _Raw(fmt_float(o) if np.isfinite(o) else "null")
        if isinstance(o, dict):
            return {k: conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [conv(v) for v in o]
        if isinstance(o, np.integer):
            return int(o)
        return o

    return _encode(conv(obj))


class _Raw(str):
    pass


def _encode(o, indent=0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(o, _Raw):
        return str(o)
    if isinstance(o, dict):
        if not o:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent + 1)}" for k, v in o.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(o, list):
        return "[" + ", ".join(_encode(v, indent + 1) for v in o) + "]"
    return json.dumps(o)


def gd_step(theta, grad, learning_rate: float) -> np.ndarray:
    return np.asarray(theta, dtype=float) - learning_rate * np.asarray(grad, dtype=float)


def train(problem: Problem, trial, config: TrainConfig,
          monitor: Callable | None = None) -> TrainTrace:
    """Run ``config.max_iters`` gradient-descent steps starting from ``trial``.

    Values are recorded at iteration 0, every ``record_every`` iterations and
    at the last one. ``monitor(trial, stats)`` may return an extra scalar that
    is stored in ``trace.lam``. A non-finite action or gradient stops the run
    with ``status == "diverged"``; ``trace.theta`` then holds the last finite
    parameters.
    """
    theta = trial.net.flatten()
    bpts = sample_boundary_points(problem.dim, config.boundary_samples, seed=config.seed)
    trace = TrainTrace(lam=[] if monitor is not None else None)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(config.max_iters + 1):
            current = trial.with_flat(theta)
            stats = {}
            try:
                value, grad = evaluate(problem, current, stats=stats)
            except NumericalError as exc:
                trace.status, trace.message = "diverged", f"iteration {k}: {exc}"
                log.warning("run diverged at iteration %d: %s", k, exc)
                break
            if k % config.record_every == 0 or k == config.max_iters:
                trace.iters.append(k)
                trace.action.append(value)
                trace.grad_norm.append(float(np.max(np.abs(grad))))
                trace.boundary_residual.append(boundary_residual(problem, current, bpts))
                if monitor is not None:
                    trace.lam.append(float(monitor(current, stats)))
            if k == config.max_iters:
                break
            step = gd_step(theta, grad, config.learning_rate)
            if not np.all(np.isfinite(step)):
                trace.status, trace.message = "diverged", f"iteration {k}: non-finite parameters"
                break
            theta = step
    trace.theta = theta
    return trace


def _round_sig(v: float, digits: int) -> str:
    return format(float(v), f".{digits - 1}e")


def convergence_iteration(values, iters=None, significant_digits: int = 4,
                          window: int = 500):
    """First recorded iteration from which ``window`` further records all
    round to the final value's ``significant_digits``-digit representation.

    Returns ``None`` if no full window after any index qualifies.
    """
    values = list(values)
    if not values:
        raise InvalidArgument("trace is empty")
    iters = list(range(len(values))) if iters is None else list(iters)
    target = _round_sig(values[-1], significant_digits)
    match = [_round_sig(v, significant_digits) == target for v in values]
    # run[i] = length of the matching run starting at i
    run = [0] * (len(values) + 1)
    for i in range(len(values) - 1, -1, -1):
        run[i] = run[i + 1] + 1 if match[i] else 0
    for i in range(len(values)):
        if run[i] >= window + 1:
            return iters[i]
    return None
