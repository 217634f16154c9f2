"""Command-line entry point.

Exit status: 0 on success, 1 on usage errors, 2 when a run diverges or a
check fails its tolerance.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import quadrature as quad
from .errors import InvalidArgument
from .network import load_params, save_params

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
EXAMPLES = {"1": "example1", "2": "example2", "3": "example3"}
DESCRIPTIONS = {
    "example1": "minimize int_0^10 y + y'^2 dx with y(0)=0, y(10)=10",
    "example2": "Dirichlet energy with source on the unit square, Coons-patch boundary data",
    "example3": "ground state of the 3-D harmonic oscillator on [-3, 3]^3",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Parser that reports usage errors with exit status 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _default_help(example, name, text):
    value, provenance = ex.DEFAULTS[example][name]
    if isinstance(value, tuple):
        value = " ".join(map(str, value))
    return f"{text} (default: {value}; {provenance})"


def _add_example_parser(sub, example):
    dim = {"example1": 1, "example2": 2, "example3": 3}[example]
    p = sub.add_parser(example, help=DESCRIPTIONS[example], description=DESCRIPTIONS[example])
    h = lambda name, text: _default_help(example, name, text)  # noqa: E731
    p.add_argument("--method", choices=("ansatz", "deep-ritz", "both"), default="both",
                   help="which trial function to train (default: both)")
    p.add_argument("--neurons", type=int, help=h("neurons", "hidden width of the ansatz network"))
    p.add_argument("--dr-neurons", type=int, nargs="+",
                   help=h("dr_neurons", "hidden width(s) of the Deep Ritz network"))
    p.add_argument("--dr-layers", type=int, choices=(1, 2),
                   help=h("dr_layers", "hidden layers of the Deep Ritz network"))
    p.add_argument("--iters", type=int, help=h("iters", "gradient-descent iterations"))
    p.add_argument("--lr", type=float, help=h("lr", "learning rate"))
    p.add_argument("--beta", type=float, help=h("beta", "boundary penalty weight (Deep Ritz only)"))
    p.add_argument("--gamma", type=float, help=h("gamma", "normalization penalty weight"))
    p.add_argument("--init-mean", type=float, help=h("init_mean", "mean of the parameter init"))
    p.add_argument("--init-std", type=float, help=h("init_std", "std of the parameter init"))
    p.add_argument("--quad", type=int,
                   help=f"Gauss-Legendre nodes per axis (default: {quad.default_nodes(dim)}; "
                        "artifact choice, not stated in the source)")
    p.add_argument("--seed", type=int, default=0, help="initialization seed (default: 0)")
    p.add_argument("--record-every", type=int, default=1,
                   help="trace recording stride in iterations (default: 1)")
    p.add_argument("--out", default="runs", help="output directory (default: runs)")
    p.add_argument("--save-params", metavar="PATH",
                   help="write final parameters; with several runs the run tag is appended")
    p.add_argument("--load-params", metavar="PATH",
                   help="start from a saved parameter file (requires a single --method)")
    p.set_defaults(func=_cmd_example, example=example)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ritzansatz",
                     description="Boundary-conforming neural Ritz solver and Deep Ritz baseline.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for example in ex.DEFAULTS:
        _add_example_parser(sub, example)

    g = sub.add_parser("gradcheck", help="compare analytic action gradients with finite differences")
    g.add_argument("--example", choices=sorted(EXAMPLES), required=True)
    g.add_argument("--method", choices=("ansatz", "deep-ritz", "both"), default="both")
    g.add_argument("--trials", type=int, default=25, help="random parameter vectors (default: 25)")
    g.add_argument("--step", type=float, default=1e-6, help="central difference step (default: 1e-6)")
    g.add_argument("--tol", type=float, default=1e-5, help="relative tolerance (default: 1e-5)")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=_cmd_gradcheck)

    q = sub.add_parser("quadcheck", help="check Gauss-Legendre polynomial exactness")
    q.add_argument("--nodes", type=int, nargs="+", default=[2, 4, 8, 16, 32])
    q.add_argument("--tol", type=float, default=1e-12)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=_cmd_quadcheck)
    return parser


def _params_path(path: Path, tag: str, many: bool) -> Path:
    return path.with_name(f"{path.stem}.{tag}{path.suffix}") if many else path


def _cmd_example(args) -> int:
    if args.load_params and args.method == "both":
        raise UsageError("--load-params requires --method ansatz or --method deep-ritz")
    initial = load_params(args.load_params) if args.load_params else None
    cfg = ex.ExperimentConfig(
        example=args.example, neurons=args.neurons, dr_neurons=args.dr_neurons,
        dr_layers=args.dr_layers, iters=args.iters, lr=args.lr, beta=args.beta,
        gamma=args.gamma, quad=args.quad, seed=args.seed, init_mean=args.init_mean,
        init_std=args.init_std, record_every=args.record_every, initial_params=initial)
    reports = ex.run(cfg, args.method)
    status = EXIT_OK
    for r in reports:
        run_dir = r.write(args.out)
        if args.save_params:
            save_params(_params_path(Path(args.save_params), r.tag, len(reports) > 1), r.params)
        line = (f"{r.tag}: status={r.trace.status} action={r.final_action:.10g} "
                f"boundary_residual={r.boundary_residual:.3g}")
        if r.final_error_max is not None:
            line += f" max_error={r.final_error_max:.3g}"
        if r.lam is not None:
            line += f" lambda={r.lam:.6g}"
        print(f"{line} -> {run_dir}")
        if r.trace.diverged:
            print(f"{r.tag}: {r.trace.message}", file=sys.stderr)
            status = EXIT_NUMERIC
    return status


def _cmd_gradcheck(args) -> int:
    if args.trials < 1 or not args.step > 0:
        raise UsageError("--trials and --step must be positive")
    example = EXAMPLES[args.example]
    worst = 0.0
    for method in ex.methods(args.method):
        err = ex.gradient_check(example, method, trials=args.trials, step=args.step, seed=args.seed)
        print(f"{example} {method}: max relative gradient error {err:.3e}")
        worst = max(worst, err)
    print(f"max relative gradient error {worst:.3e} (tolerance {args.tol:g})")
    return EXIT_OK if worst <= args.tol else EXIT_NUMERIC


def _cmd_quadcheck(args) -> int:
    if min(args.nodes) < 1:
        raise UsageError("--nodes must be positive")
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for k in args.nodes:
        rule = quad.gauss_legendre_rule(k)
        coeffs = rng.uniform(-1.0, 1.0, 2 * k)
        exact = float(np.sum(coeffs / np.arange(1, 2 * k + 1)))
        approx = float(rule.weights @ np.polynomial.polynomial.polyval(rule.nodes, coeffs))
        err = abs(approx - exact)
        print(f"k={k}: degree {2 * k - 1} error {err:.3e}")
        worst = max(worst, err)
    return EXIT_OK if worst <= args.tol else EXIT_NUMERIC


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except (InvalidArgument, OSError) as e:
        parser.print_usage(sys.stderr)
        print(f"ritzansatz: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
