"""The three benchmark problems, each solved with the boundary-conforming
ansatz and with the penalty (Deep Ritz) baseline.

1. ``int_a^b y + y'^2 dx`` with ``y(a)=A, y(b)=B`` (defaults ``a=A=0, b=B=10``).
2. Dirichlet energy minus source on ``[0, 1]^2`` with exact solution
   ``exp(-x1) (x1 + x2^3)``.
3. Ground state of ``-laplace + |x|^2`` on ``[-3, 3]^3`` (eigenvalue 3).
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import quadrature as quad
from .ansatz import (AnsatzSpec, NetworkTrial, coons_patch, linear_extension_1d,
                     scaled_box_bubble, unit_bubble, zero_extension)
from .errors import InvalidArgument
from .functional import (PHYSICAL, REFERENCE, Problem, action, boundary_penalty, evaluate,
                         example1_lagrangian, normalization_penalty, oscillator_lagrangian,
                         poisson_lagrangian, rayleigh_quotient)
from .network import init_gaussian, load_params, save_params
from .optimizer import TrainConfig, TrainTrace, convergence_iteration, dumps, fmt_float, train
from .transform import AffineMap

log = logging.getLogger(__name__)

ANSATZ = "ansatz"
DEEP_RITZ = "deep-ritz"
OSCILLATOR_GROUND = 3.0

# name -> (value, provenance)
DEFAULTS = {
    "example1": {
        "neurons": (2, "N=2 for the ansatz run"),
        "dr_neurons": ((2, 30), "Deep Ritz widths N=2 and N=30 are both reported"),
        "iters": (50000, "horizon of the action-vs-iteration plot"),
        "lr": (0.001, "eta=0.001"),
        "beta": (50.0, "beta=50"),
        "gamma": (0.0, "no normalization term"),
        "init_mean": (10.0, "Gaussian init, mean 10"),
        "init_std": (0.1, "Gaussian init, standard deviation 0.1"),
        "dr_layers": (1, "single hidden layer"),
    },
    "example2": {
        "neurons": (5, "N=5, single hidden layer"),
        "dr_neurons": ((10,), "N=10 with an additional hidden layer"),
        "iters": (15000, "horizon of the action-vs-iteration plot"),
        "lr": (0.001, "eta=0.001"),
        "beta": (30.0, "beta=30"),
        "gamma": (0.0, "no normalization term"),
        "init_mean": (1.0, "Gaussian init, mean 1"),
        "init_std": (0.1, "Gaussian init, standard deviation 0.1"),
        "dr_layers": (2, "two hidden layers for the baseline"),
    },
    "example3": {
        "neurons": (50, "N=50"),
        "dr_neurons": ((50,), "N=50"),
        "iters": (20000, "horizon of the eigenvalue-vs-iteration plot"),
        "lr": (0.001, "eta=0.001"),
        "beta": (15.0, "beta=15"),
        "gamma": (15.0, "gamma=15"),
        "init_mean": (0.0, "Gaussian init, mean 0"),
        "init_std": (0.1, "Gaussian init, standard deviation 0.1"),
        "dr_layers": (1, "single hidden layer"),
    },
}


@dataclass
class ExperimentConfig:
    example: str = "example1"
    neurons: int | None = None
    dr_neurons: tuple | None = None  # one baseline run per width; the first is the primary
    dr_layers: int | None = None
    iters: int | None = None
    lr: float | None = None
    beta: float | None = None
    gamma: float | None = None
    quad: int | None = None
    seed: int = 0
    init_mean: float | None = None
    init_std: float | None = None
    record_every: int = 1
    initial_params: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.example not in DEFAULTS:
            raise InvalidArgument(f"unknown example {self.example!r}")
        for name, (value, _) in DEFAULTS[self.example].items():
            if getattr(self, name) is None:
                setattr(self, name, value)
        if self.quad is None:
            self.quad = quad.default_nodes(self.dim)
        if isinstance(self.dr_neurons, int):
            self.dr_neurons = (self.dr_neurons,)
        self.dr_neurons = tuple(int(w) for w in self.dr_neurons)
        if not self.dr_neurons or self.neurons < 1 or min(self.dr_neurons) < 1:
            raise InvalidArgument("neurons must be positive")
        if self.quad < 1:
            raise InvalidArgument("quad must be positive")
        if self.beta < 0 or self.gamma < 0:
            raise InvalidArgument("penalty weights must be nonnegative")

    @property
    def dim(self) -> int:
        return {"example1": 1, "example2": 2, "example3": 3}[self.example]

    def train_config(self) -> TrainConfig:
        return TrainConfig(learning_rate=self.lr, max_iters=self.iters,
                           record_every=self.record_every, seed=self.seed,
                           init_mean=self.init_mean, init_std=self.init_std)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("initial_params")
        d["dr_neurons"] = list(self.dr_neurons)
        return d

    def trials(self, method: str):
        """``(method tag, width, layers)`` for every run of ``method``."""
        if method == ANSATZ:
            return [(ANSATZ, self.neurons, 1)]
        first, *rest = self.dr_neurons
        return [(DEEP_RITZ, first, self.dr_layers)] + [
            (f"{DEEP_RITZ}-N{w}", w, self.dr_layers) for w in rest]


# ---------------------------------------------------------------- example 1

def example1_exact(a=0.0, b=10.0, A=0.0, B=10.0):
    """Minimizer ``x^2/4 + c1 x + c0`` as a function of the reference ``u``."""
    c1 = (B - A - (b * b - a * a) / 4.0) / (b - a)
    c0 = A - a * a / 4.0 - c1 * a

    def exact(u):
        x = a + (b - a) * np.asarray(u, dtype=float)
        return x * x / 4.0 + c1 * x + c0

    return exact


def example1_problem(quad_nodes=32, beta=0.0, a=0.0, b=10.0, A=0.0, B=10.0) -> Problem:
    rule = quad.gauss_legendre_rule(quad_nodes)

    def data(U):
        return np.where(np.asarray(U)[:, :1] < 0.5, A, B)

    penalties = (boundary_penalty(beta),) if beta else ()
    return Problem(example1_lagrangian(), AffineMap.from_box([a], [b]), quad.tensor_rule(rule, 1),
                   data, quad.face_rule(rule, 1), penalties, REFERENCE, "example1")


def example1_ansatz(net, A=0.0, B=10.0) -> AnsatzSpec:
    # literal form A(1-u) + Bu - u(1-u)N
    return AnsatzSpec(linear_extension_1d(A, B), unit_bubble(1), net, sign=-1.0)


# ---------------------------------------------------------------- example 2

def example2_exact(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-x[..., 0]) * (x[..., 0] + x[..., 1] ** 3)


def example2_boundary_data(X):
    """Dirichlet data on the four edges of the unit square (NaN inside)."""
    x1, x2 = X[:, 0], X[:, 1]
    out = np.select(
        [x1 == 0, x1 == 1, x2 == 0, x2 == 1],
        [x2**3, math.exp(-1) * (1 + x2**3), x1 * np.exp(-x1), (x1 + 1) * np.exp(-x1)],
        default=np.nan,
    )
    return out[:, None]


def example2_extension():
    e1 = math.exp(-1)
    return coons_patch(
        lambda s: s**3,
        lambda s: e1 * (1 + s**3),
        lambda s: s * np.exp(-s),
        lambda s: (s + 1) * np.exp(-s),
        lambda s: 3 * s**2,
        lambda s: 3 * e1 * s**2,
        lambda s: (1 - s) * np.exp(-s),
        lambda s: -s * np.exp(-s),
        descriptor="coons patch of the example-2 edge data",
    )


def example2_problem(quad_nodes=32, beta=0.0, gradient_coefficient=0.5) -> Problem:
    rule = quad.gauss_legendre_rule(quad_nodes)
    penalties = (boundary_penalty(beta),) if beta else ()
    return Problem(poisson_lagrangian(gradient_coefficient=gradient_coefficient),
                   AffineMap.identity(2), quad.tensor_rule(rule, 2), example2_boundary_data,
                   quad.face_rule(rule, 2), penalties, REFERENCE, "example2")


def example2_ansatz(net) -> AnsatzSpec:
    return AnsatzSpec(example2_extension(), unit_bubble(2), net)


# ---------------------------------------------------------------- example 3

def example3_problem(quad_nodes=16, beta=0.0, gamma=15.0, d=3, half_width=3.0,
                     potential_power=2) -> Problem:
    rule = quad.gauss_legendre_rule(quad_nodes)
    penalties = [normalization_penalty(gamma)] if gamma else []
    if beta:
        penalties.append(boundary_penalty(beta))
    return Problem(oscillator_lagrangian(potential_power),
                   AffineMap.from_box([-half_width] * d, [half_width] * d),
                   quad.tensor_rule(rule, d), lambda X: np.zeros((len(X), 1)),
                   quad.face_rule(rule, d), tuple(penalties), PHYSICAL, "example3",
                   meta={"potential_power": potential_power})


def example3_ansatz(net, half_width=3.0) -> AnsatzSpec:
    d = net.in_dim
    return AnsatzSpec(zero_extension(d), scaled_box_bubble(half_width, d), net)


def lambda_monitor(trial, stats):
    return (stats["dirichlet"] + stats["moment2"]) / stats["mass"]


# ---------------------------------------------------------------- reports

@dataclass
class RunReport:
    example: str
    method: str
    config: dict
    trace: TrainTrace
    grid: np.ndarray
    samples: np.ndarray
    exact: np.ndarray | None
    final_action: float
    final_error_max: float | None
    final_error_rms: float | None
    boundary_residual: float
    lam: float | None = None
    convergence_iter_4sig: int | None = None
    params: object = field(default=None, repr=False)

    @property
    def tag(self) -> str:
        return f"{self.example}_{self.method}_{self.config['seed']}"

    def summary(self) -> dict:
        out = {
            "example": self.example,
            "method": self.method,
            "config": self.config,
            "status": self.trace.status,
            "final_action": self.final_action,
            "final_error_max": self.final_error_max,
            "final_error_rms": self.final_error_rms,
            "boundary_residual": self.boundary_residual,
            "grid_points": int(len(self.grid)),
        }
        if self.lam is not None:
            out["lambda"] = self.lam
        out["convergence_iter_4sig"] = self.convergence_iter_4sig
        return out

    def write(self, out_dir) -> Path:
        run_dir = Path(out_dir) / self.tag
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "report.json").write_text(dumps(self.summary()) + "\n")
        self.trace.write_csv(run_dir / "trace.csv")
        self.trace.write_json(run_dir / "trace.json", None)
        header = [f"u{j + 1}" for j in range(self.grid.shape[1])] + ["y"]
        cols = [self.grid, self.samples[:, None]]
        if self.exact is not None:
            header += ["exact", "abs_error"]
            cols += [self.exact[:, None], np.abs(self.samples - self.exact)[:, None]]
        table = np.hstack(cols)
        lines = [",".join(header)] + [",".join(fmt_float(v) for v in row) for row in table]
        (run_dir / "solution.csv").write_text("\n".join(lines) + "\n")
        return run_dir


def error_report(samples, exact_values):
    """Max-abs and RMS error plus the pointwise absolute error field."""
    err = np.abs(np.asarray(samples, dtype=float) - np.asarray(exact_values, dtype=float))
    with np.errstate(over="ignore"):
        rms = float(np.sqrt(np.mean(err**2)))
    return {"max_abs": float(err.max()), "rms": rms, "field": err}


def uniform_grid(dim: int, points: int) -> np.ndarray:
    g = np.linspace(0.0, 1.0, points)
    mesh = np.meshgrid(*([g] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _finish(example, method, cfg, problem, trial, trace, grid_u, exact_fn, lam_fn=None):
    final = trial.with_flat(trace.theta)
    V = problem.to_trial(grid_u)
    samples = final.value_and_grad_input(V)[0][:, 0]
    exact = None if exact_fn is None else exact_fn(grid_u)
    metrics = error_report(samples, exact) if exact is not None else None
    lam = None
    if lam_fn is not None:
        lam = trace.lam[-1] if trace.lam else float("nan")
    conv_series = trace.lam if lam_fn is not None else trace.action
    conv = convergence_iteration(conv_series, trace.iters, 4, 500) if conv_series else None
    echo = cfg.echo()
    echo["method"] = method
    echo["width"] = final.net.width
    echo["layers"] = final.net.layers
    return RunReport(
        example, method, echo, trace, grid_u, samples, exact,
        final_action=trace.action[-1] if trace.action else float("nan"),
        final_error_max=None if metrics is None else metrics["max_abs"],
        final_error_rms=None if metrics is None else metrics["rms"],
        boundary_residual=trace.boundary_residual[-1] if trace.boundary_residual else float("nan"),
        lam=lam, convergence_iter_4sig=conv, params=final.net,
    )


def _initial_net(cfg: ExperimentConfig, width: int, layers: int):
    m, n = 1, cfg.dim
    p = cfg.initial_params
    if p is not None and p.shape() == (m, n, width) and p.layers == layers:
        return p
    if p is not None:
        raise InvalidArgument(
            f"loaded parameters {p.shape()} x{p.layers} do not match width {width}, layers {layers}")
    return init_gaussian(m, n, width, cfg.init_mean, cfg.init_std, cfg.seed, layers)


def methods(method: str):
    if method == "both":
        return (ANSATZ, DEEP_RITZ)
    if method not in (ANSATZ, DEEP_RITZ):
        raise InvalidArgument(f"unknown method {method!r}")
    return (method,)


def _run(example, cfg, method, make, grid, exact_fn, monitor=None):
    reports = []
    for m in methods(method):
        for tag, width, layers in cfg.trials(m):
            problem, trial = make(m, _initial_net(cfg, width, layers))
            trace = train(problem, trial, cfg.train_config(), monitor=monitor)
            reports.append(_finish(example, tag, cfg, problem, trial, trace, grid, exact_fn, monitor))
    return reports


def run_example1(cfg: ExperimentConfig, method: str = "both"):
    exact = example1_exact()

    def make(m, net):
        if m == ANSATZ:
            return example1_problem(cfg.quad), example1_ansatz(net)
        return example1_problem(cfg.quad, beta=cfg.beta), NetworkTrial(net)

    return _run("example1", cfg, method, make, uniform_grid(1, 101), lambda u: exact(u[:, 0]))


def run_example2(cfg: ExperimentConfig, method: str = "both"):
    def make(m, net):
        if m == ANSATZ:
            return example2_problem(cfg.quad), example2_ansatz(net)
        return example2_problem(cfg.quad, beta=cfg.beta), NetworkTrial(net)

    return _run("example2", cfg, method, make, uniform_grid(2, 51), example2_exact)


def run_example3(cfg: ExperimentConfig, method: str = "both"):
    def make(m, net):
        if m == ANSATZ:
            return example3_problem(cfg.quad, gamma=cfg.gamma), example3_ansatz(net)
        return example3_problem(cfg.quad, beta=cfg.beta, gamma=cfg.gamma), NetworkTrial(net)

    return _run("example3", cfg, method, make, uniform_grid(3, 21), None, lambda_monitor)


RUNNERS = {"example1": run_example1, "example2": run_example2, "example3": run_example3}


def run(cfg: ExperimentConfig, method: str = "both"):
    return RUNNERS[cfg.example](cfg, method)


def build(example: str, method: str, quad_nodes=None, beta=None, gamma=None, net=None):
    """Problem and trial for one example/method pair (used by checks and the CLI)."""
    cfg = ExperimentConfig(example=example, quad=quad_nodes, beta=beta, gamma=gamma)
    width = cfg.neurons if method == ANSATZ else cfg.dr_neurons[0]
    layers = 1 if method == ANSATZ else cfg.dr_layers
    net = net if net is not None else init_gaussian(1, cfg.dim, width, cfg.init_mean, cfg.init_std, 0, layers)
    if example == "example1":
        if method == ANSATZ:
            return example1_problem(cfg.quad), example1_ansatz(net)
        return example1_problem(cfg.quad, beta=cfg.beta), NetworkTrial(net)
    if example == "example2":
        if method == ANSATZ:
            return example2_problem(cfg.quad), example2_ansatz(net)
        return example2_problem(cfg.quad, beta=cfg.beta), NetworkTrial(net)
    if method == ANSATZ:
        return example3_problem(cfg.quad, gamma=cfg.gamma), example3_ansatz(net)
    return example3_problem(cfg.quad, beta=cfg.beta, gamma=cfg.gamma), NetworkTrial(net)


def gradient_check(example: str, method: str, trials: int = 25, step: float = 1e-6,
                   seed: int = 0, scatter: float = 0.5) -> float:
    """Worst relative mismatch between the analytic directional derivative
    ``grad . v`` and its central difference, over ``trials`` random
    ``(theta, v)`` pairs drawn around the example's initialization."""
    problem, trial = build(example, method)
    rng = np.random.default_rng(seed)
    theta0 = trial.net.flatten()
    worst = 0.0
    for _ in range(trials):
        theta = theta0 + scatter * rng.standard_normal(theta0.size)
        v = rng.standard_normal(theta0.size)
        v /= np.linalg.norm(v)
        _, g = evaluate(problem, trial, theta)
        fd = (action(problem, trial, theta + step * v) - action(problem, trial, theta - step * v)) / (2 * step)
        an = float(g @ v)
        worst = max(worst, abs(fd - an) / max(abs(fd), abs(an), 1e-8))
    return worst


__all__ = [
    "ANSATZ", "DEEP_RITZ", "DEFAULTS", "ExperimentConfig", "RunReport", "build", "error_report",
    "gradient_check", "methods",
    "example1_exact", "example2_exact", "rayleigh_quotient", "run", "run_example1",
    "run_example2", "run_example3", "save_params", "load_params", "uniform_grid",
]
