import json
import math

import numpy as np
import pytest

from ritzansatz.errors import InvalidArgument
from ritzansatz.experiments import (DEFAULTS, ExperimentConfig, build, error_report,
                                    example1_exact, example2_exact, example2_problem, run,
                                    uniform_grid)
from ritzansatz.functional import action, example2_source, rayleigh_quotient
from ritzansatz.network import NetParams, init_gaussian


def test_example1_exact_solution():
    y = example1_exact()
    assert y(0.5) == pytest.approx(-1.25, abs=1e-14)
    u = np.linspace(0, 1, 11)
    np.testing.assert_allclose(y(u), 25 * u**2 - 15 * u, atol=1e-12)
    assert y(0.0) == 0.0 and y(1.0) == pytest.approx(10.0, abs=1e-13)


def test_example2_exact_value_and_boundary():
    assert example2_exact(np.array([0.5, 0.5])) == pytest.approx(math.exp(-0.5) * 0.625, abs=1e-15)
    assert abs(math.exp(-0.5) * 0.625 - 0.3790816) < 1e-7
    problem, _ = build("example2", "ansatz", quad_nodes=4)
    Vb = problem.boundary[0]
    np.testing.assert_allclose(problem.boundary[2][:, 0], example2_exact(Vb), atol=1e-15)


def test_example2_exact_solves_poisson(rng):
    X = rng.uniform(0.05, 0.95, (20, 2))
    lap_closed = np.exp(-X[:, 0]) * (X[:, 0] + X[:, 1] ** 3 - 2 + 6 * X[:, 1])
    np.testing.assert_allclose(-lap_closed, example2_source(X), atol=1e-12)
    h = 1e-3
    lap_fd = sum(
        (-example2_exact(X + 2 * h * e) + 16 * example2_exact(X + h * e) - 30 * example2_exact(X)
         + 16 * example2_exact(X - h * e) - example2_exact(X - 2 * h * e)) / (12 * h * h)
        for e in np.eye(2))
    np.testing.assert_allclose(-lap_fd, example2_source(X), atol=1e-8)


class ExactPlus:
    def __init__(self, eps):
        self.eps = eps

    def linearize(self, V):
        s, t = V[:, 0], V[:, 1]
        bump = s * (1 - s) * t * (1 - t)
        dbump = np.stack([(1 - 2 * s) * t * (1 - t), s * (1 - s) * (1 - 2 * t)], axis=1)
        y = example2_exact(V) + self.eps * bump
        dy = np.stack([np.exp(-s) * (1 - s - t**3), 3 * t**2 * np.exp(-s)], axis=1) + self.eps * dbump
        return y[:, None], dy[:, None, :], None


def test_example2_exact_solution_minimizes_half_dirichlet_energy():
    problem = example2_problem(24)
    base = action(problem, ExactPlus(0.0))
    for eps in (-0.05, -0.01, 0.01, 0.05):
        assert action(problem, ExactPlus(eps)) > base
    unscaled = example2_problem(24, gradient_coefficient=1.0)
    assert min(action(unscaled, ExactPlus(e)) for e in (-0.5, 0.5)) < action(unscaled, ExactPlus(0.0))


def test_error_report_examples(rng):
    exact = rng.normal(size=200)
    zero = error_report(exact, exact)
    assert zero["max_abs"] == 0.0 and zero["rms"] == 0.0
    assert error_report(exact + 0.3, exact)["max_abs"] == pytest.approx(0.3, abs=1e-15)
    noise = rng.uniform(-1e-3, 1e-3, 200)
    noise[17] = 4e-3
    rep = error_report(exact + noise, exact)
    assert rep["max_abs"] == pytest.approx(4e-3, abs=1e-15)
    assert rep["field"].shape == (200,)


def test_uniform_grids():
    assert uniform_grid(1, 101).shape == (101, 1)
    g2 = uniform_grid(2, 51)
    assert g2.shape == (2601, 2) and g2.min() == 0.0 and g2.max() == 1.0


def test_config_defaults_and_validation():
    c1 = ExperimentConfig("example1")
    assert (c1.neurons, c1.dr_neurons, c1.iters, c1.lr, c1.beta, c1.init_mean, c1.init_std) == (
        2, (2, 30), 50000, 0.001, 50.0, 10.0, 0.1)
    assert [t[:2] for t in c1.trials("deep-ritz")] == [("deep-ritz", 2), ("deep-ritz-N30", 30)]
    c2 = ExperimentConfig("example2")
    assert (c2.neurons, c2.dr_neurons, c2.dr_layers, c2.iters, c2.beta, c2.init_mean) == (
        5, (10,), 2, 15000, 30.0, 1.0)
    c3 = ExperimentConfig("example3")
    assert (c3.neurons, c3.iters, c3.beta, c3.gamma, c3.init_mean, c3.quad) == (
        50, 20000, 15.0, 15.0, 0.0, 16)
    for ex in DEFAULTS.values():
        assert all(isinstance(prov, str) and prov for _, prov in ex.values())
    with pytest.raises(InvalidArgument):
        ExperimentConfig("example4")
    with pytest.raises(InvalidArgument):
        ExperimentConfig("example1", beta=-1.0)


def test_example1_short_run_writes_reports(tmp_path):
    cfg = ExperimentConfig("example1", iters=40, seed=7, quad=16)
    reports = run(cfg, "both")
    assert [r.tag for r in reports] == ["example1_ansatz_7", "example1_deep-ritz_7",
                                        "example1_deep-ritz-N30_7"]
    for r in reports:
        d = r.write(tmp_path)
        summary = json.loads((d / "report.json").read_text())
        for key in ("example", "method", "config", "final_action", "final_error_max",
                    "final_error_rms", "boundary_residual", "convergence_iter_4sig"):
            assert key in summary
        assert (d / "trace.csv").read_text().startswith("iter,action,grad_norm,boundary_residual\n")
        assert len((d / "solution.csv").read_text().splitlines()) == 102
    ansatz = reports[0]
    assert max(ansatz.trace.boundary_residual) <= 1e-12
    assert len(ansatz.grid) == 101


def test_example3_short_run_records_lambda(tmp_path):
    cfg = ExperimentConfig("example3", iters=5, quad=6, neurons=4, dr_neurons=4)
    ansatz, baseline = run(cfg, "both")
    assert len(ansatz.trace.lam) == 6 and ansatz.lam == ansatz.trace.lam[-1]
    assert max(ansatz.trace.boundary_residual) == 0.0
    assert baseline.boundary_residual > 0
    d = ansatz.write(tmp_path)
    assert (d / "trace.csv").read_text().splitlines()[0].endswith(",lambda")
    assert "lambda" in json.loads((d / "report.json").read_text())


def test_lambda_scale_invariance_in_alpha():
    problem, trial = build("example3", "ansatz", quad_nodes=10)
    theta = trial.net.flatten() + 0.3 * np.random.default_rng(0).standard_normal(trial.net.size)
    net = trial.net.with_flat(theta)
    doubled = NetParams(2 * net.alpha, net.w, net.b)
    a = rayleigh_quotient(problem, trial.with_flat(theta))
    b = rayleigh_quotient(problem, trial.with_flat(doubled.flatten()))
    assert abs(a - b) <= 1e-10 * a


def test_loaded_params_are_used_and_checked(tmp_path):
    net = init_gaussian(1, 1, 2, 1.0, 0.5, seed=3)
    cfg = ExperimentConfig("example1", iters=1, initial_params=net)
    (r,) = run(cfg, "ansatz")
    assert r.trace.iters == [0, 1]
    bad = ExperimentConfig("example1", iters=1, initial_params=init_gaussian(1, 1, 5))
    with pytest.raises(InvalidArgument):
        run(bad, "ansatz")
