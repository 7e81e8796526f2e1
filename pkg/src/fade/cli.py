"""Command-line front end.

::

    fade solve        [--case example1] [--N 8] [--M 20] ...
    fade convergence  --vary 4,8,16 [--refine space|time] ...
    fade table        --sweep beta|alpha|gamma|spacetime
    fade weights      --order beta --N 8
    fade selftest
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass

import numpy as np

from fade.errors import ConfigurationError, NumericalError, SolverError
from fade.fractional import FracOrder
from fade.solver import Grid, error_norms, solve
from fade.quadrature import pi_weights
from fade.verification import CASES, build_case, run_convergence, run_sweep

SUBCOMMANDS = ("solve", "convergence", "table", "weights", "selftest")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    alpha: float = 0.4
    beta: float = 1.5
    gamma: float = 0.5
    kappa1: float = 0.001
    kappa2: float = 2.0
    T: float = 1.0
    N: int = 8
    M: int = 20
    case: str = "example1"
    output_path: str = "-"
    vary: tuple[int, ...] | None = None
    refine: str = "space"
    sweep: str = "beta"
    order: str = "beta"


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("refinement levels must be positive")
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=0.4, help="temporal order in (0, 1)")
    common.add_argument("--beta", type=float, default=1.5, help="dispersive order in (1, 2)")
    common.add_argument("--gamma", type=float, default=0.5, help="advective order in (0, 1)")
    common.add_argument("--kappa1", type=float, default=0.001, help="dispersion coefficient")
    common.add_argument("--kappa2", type=float, default=2.0, help="advection coefficient")
    common.add_argument("--T", type=float, default=1.0, help="final time")
    common.add_argument("--N", type=int, default=8, help="spatial cells (Bernstein degree)")
    common.add_argument("--M", type=int, default=20, help="time steps, tau = T / M")
    common.add_argument("--case", choices=CASES, default="example1")
    common.add_argument("--out", dest="output_path", default="-", help="output CSV, '-' for stdout")

    parser = argparse.ArgumentParser(prog="fade", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("solve", parents=[common], help="single solve, nodal values at T")

    conv = sub.add_parser("convergence", parents=[common], help="refinement study with rates")
    conv.add_argument("--vary", type=_int_list, required=True, help="resolutions, e.g. 4,8,16")
    conv.add_argument("--refine", choices=("space", "time"), default="space",
                      help="vary N with M fixed, or M with N fixed")

    table = sub.add_parser("table", parents=[common], help="full parameter sweep")
    table.add_argument("--sweep", choices=("beta", "alpha", "gamma", "spacetime"), default="beta")
    table.add_argument("--vary", type=_int_list, default=(4, 8, 16))

    weights = sub.add_parser("weights", parents=[common], help="dump product-integration weights")
    weights.add_argument("--order", choices=("beta", "gamma"), default="beta")

    sub.add_parser("selftest", parents=[common], help="run the built-in consistency checks")
    return parser


def parse_args(argv=None) -> RunConfig:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    fields = {k: v for k, v in vars(ns).items() if v is not None}
    config = RunConfig(**fields)

    try:
        FracOrder.temporal(config.alpha)
        FracOrder.dispersive(config.beta)
        FracOrder.advective(config.gamma)
        for name in ("kappa1", "kappa2"):
            if not getattr(config, name) >= 0.0:
                raise ConfigurationError(f"{name} must be non-negative")
        Grid(config.N, config.M, config.T)
    except (ConfigurationError, ValueError) as exc:
        parser.error(str(exc))

    return config


def emit_csv(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _case(config: RunConfig, **overrides):
    params = dict(
        alpha=config.alpha, beta=config.beta, gamma=config.gamma,
        kappa1=config.kappa1, kappa2=config.kappa2, T=config.T,
    )
    params.update(overrides)
    return build_case(config.case, **params)


def _cmd_solve(config: RunConfig) -> str:
    case = _case(config)
    grid = Grid(config.N, config.M, config.T)
    history = solve(case.spec, grid)
    e2, einf = error_norms(history, case.exact, grid)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("x", "u_h", "u_exact", "error"))
    x = grid.x
    uh = np.concatenate([[0.0], history.node_values[-1], [0.0]])
    ue = np.asarray(case.exact(x, config.T), dtype=np.float64)
    for xi, a, b in zip(x, uh, ue):
        writer.writerow((f"{xi:.16e}", f"{a:.16e}", f"{b:.16e}", f"{b - a:.16e}"))
    print(f"# E2 = {e2:.6e}, Einf = {einf:.6e}", file=sys.stderr)
    return buf.getvalue()


def _cmd_convergence(config: RunConfig) -> str:
    case = _case(config)
    if config.refine == "space":
        report = run_convergence(case, M=config.M, vary=config.vary)
    else:
        report = run_convergence(case, N=config.N, vary=config.vary)
    return report.to_csv()


def _cmd_table(config: RunConfig) -> str:
    return run_sweep(config.sweep, vary=config.vary, M=config.M, T=config.T).to_csv()


def _cmd_weights(config: RunConfig) -> str:
    if config.order == "beta":
        eta = FracOrder.dispersive(config.beta)
    else:
        eta = FracOrder.advective(config.gamma)
    table = pi_weights(eta, config.N)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("r", "j", "w"))
    for r in range(1, config.N):
        for j, w in enumerate(table.row(r)):
            writer.writerow((r, j, f"{w:.16e}"))
    return buf.getvalue()


def _cmd_selftest(config: RunConfig) -> tuple[str, bool]:
    from fade.selftest import run_all

    results = run_all()
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    return "\n".join(lines) + "\n", all(ok for _, ok, _ in results)


def main(argv=None) -> int:
    config = parse_args(argv)
    ok = True
    try:
        if config.subcommand == "selftest":
            text, ok = _cmd_selftest(config)
        else:
            handler = {
                "solve": _cmd_solve,
                "convergence": _cmd_convergence,
                "table": _cmd_table,
                "weights": _cmd_weights,
            }[config.subcommand]
            text = handler(config)
        emit_csv(text, config.output_path)
    except OSError as exc:
        print(f"fade: cannot write output: {exc}", file=sys.stderr)
        return 1
    except (ConfigurationError, NumericalError, SolverError) as exc:
        print(f"fade: {exc}", file=sys.stderr)
        return 1

    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
