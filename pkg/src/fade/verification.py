"""Manufactured solutions, convergence studies and CSV reports.

Two separable exact solutions are supported:

``example1``
    :math:`u = x^2 (1 - x)^2 e^{-t}`, initial profile :math:`x^2 (1 - x)^2`.
``example2``
    :math:`u = \\sin(\\pi x) t^2`, zero initial profile.

The forcing is assembled analytically from the closed-form Caputo
derivatives of each factor, so the manufactured truth never depends on the
discretization under test.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from fade.errors import ConfigurationError, SolverError
from fade.fractional import (
    FracOrder,
    caputo_exp_decay,
    caputo_monomial,
    caputo_sin_pi,
    gamma_real,
)
from fade.solver import Grid, ProblemSpec, error_norms, solve

__all__ = [
    "CASES",
    "ManufacturedCase",
    "ConvergenceRow",
    "ConvergenceReport",
    "build_case",
    "forcing_residual",
    "run_convergence",
    "run_table4",
    "SWEEPS",
    "run_sweep",
    "worker_count",
]

CASES = ("example1", "example2")
RESIDUAL_ATOL = 1.0e-8
CSV_HEADER = ("param", "h", "tau", "E2", "rate2", "Einf", "rateInf")


@dataclass(frozen=True)
class ManufacturedCase:
    name: str
    exact: Callable
    spec: ProblemSpec
    #: analytic Caputo derivatives of ``exact``, used for the residual check
    dt_alpha: Callable = field(repr=False)
    dx_beta: Callable = field(repr=False)
    dx_gamma: Callable = field(repr=False)


def _quartic_caputo(eta: FracOrder, x):
    """Caputo derivative of x^2 - 2x^3 + x^4."""
    return caputo_monomial(2, eta, x) - 2.0 * caputo_monomial(3, eta, x) + caputo_monomial(4, eta, x)


def _example1(alpha: FracOrder, beta: FracOrder, gamma: FracOrder):
    def g(x):
        x = np.asarray(x, dtype=np.float64)
        return x**2 * (1.0 - x) ** 2

    def exact(x, t):
        return g(x) * math.exp(-t)

    def dt_alpha(x, t):
        return g(x) * caputo_exp_decay(alpha, t)

    def dx_beta(x, t):
        return math.exp(-t) * _quartic_caputo(beta, x)

    def dx_gamma(x, t):
        return math.exp(-t) * _quartic_caputo(gamma, x)

    return g, exact, dt_alpha, dx_beta, dx_gamma


def _example2(alpha: FracOrder, beta: FracOrder, gamma: FracOrder):
    scale = 2.0 / gamma_real(3.0 - alpha.value)

    def g(x):
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def exact(x, t):
        return np.sin(np.pi * np.asarray(x, dtype=np.float64)) * t**2

    def dt_alpha(x, t):
        # D_t^alpha t^2 = 2 t^(2 - alpha) / Gamma(3 - alpha)
        return np.sin(np.pi * np.asarray(x, dtype=np.float64)) * scale * t ** (2.0 - alpha.value)

    def dx_beta(x, t):
        return t**2 * caputo_sin_pi(beta, x)

    def dx_gamma(x, t):
        return t**2 * caputo_sin_pi(gamma, x)

    return g, exact, dt_alpha, dx_beta, dx_gamma


def forcing_residual(case: ManufacturedCase, x, t) -> float:
    """Largest ``|D_t u - k1 D_x^beta u + k2 D_x^gamma u - h|`` over the points."""
    spec = case.spec
    worst = 0.0
    for xi, ti in zip(np.atleast_1d(x), np.atleast_1d(t)):
        lhs = (
            case.dt_alpha(xi, ti)
            - spec.kappa1 * case.dx_beta(xi, ti)
            + spec.kappa2 * case.dx_gamma(xi, ti)
        )
        worst = max(worst, abs(float(lhs) - float(spec.h(xi, ti))))
    return worst


def build_case(
    name: str,
    alpha: float,
    beta: float,
    gamma: float,
    kappa1: float,
    kappa2: float,
    T: float = 1.0,
    *,
    check: bool = True,
    seed: int = 0,
) -> ManufacturedCase:
    """Build a manufactured problem and the forcing that closes it.

    With ``check=True`` the forcing is verified at 50 random points of
    ``(0, 1) x (0, T]`` against closed-form Caputo derivatives.
    """
    a = FracOrder.temporal(alpha)
    b = FracOrder.dispersive(beta)
    c = FracOrder.advective(gamma)

    if name == "example1":
        g, exact, dt_alpha, dx_beta, dx_gamma = _example1(a, b, c)
    elif name == "example2":
        g, exact, dt_alpha, dx_beta, dx_gamma = _example2(a, b, c)
    else:
        raise ConfigurationError(f"unknown case {name!r}, expected one of {CASES}")

    def forcing(x, t):
        return dt_alpha(x, t) - kappa1 * dx_beta(x, t) + kappa2 * dx_gamma(x, t)

    spec = ProblemSpec(a, b, c, kappa1, kappa2, T, g=g, h=forcing)
    case = ManufacturedCase(name, exact, spec, dt_alpha, dx_beta, dx_gamma)

    if check:
        rng = np.random.default_rng(seed)
        xs = rng.uniform(0.0, 1.0, 50)
        ts = T * (1.0 - rng.uniform(0.0, 1.0, 50))
        worst = forcing_residual(case, xs, ts)
        if not worst <= RESIDUAL_ATOL:
            raise ConfigurationError(f"forcing does not close the equation: residual {worst:.3e}")

    return case


# {{{ convergence studies


@dataclass(frozen=True)
class ConvergenceRow:
    param: str
    h: float
    tau: float
    E2: float
    Einf: float
    rate2: float | None = None
    rateInf: float | None = None


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def extend(self, other: ConvergenceReport) -> None:
        self.rows.extend(other.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([
                row.param,
                _fmt(row.h),
                _fmt(row.tau),
                _fmt(row.E2),
                _fmt(row.rate2),
                _fmt(row.Einf),
                _fmt(row.rateInf),
            ])
        return buf.getvalue()


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.5e}"


def rate(coarse: float, fine: float) -> float:
    """Observed order under halving, ``log2(coarse / fine)``."""
    return math.log2(coarse / fine)


def worker_count() -> int:
    env = os.environ.get("FADE_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigurationError(f"FADE_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigurationError(f"FADE_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _map_cells(fn, cells: Sequence, workers: int | None):
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(cells) <= 1:
        return [fn(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(fn, cells))


def _solve_cell(case: ManufacturedCase, N: int, M: int) -> tuple[float, float]:
    grid = Grid(N, M, case.spec.T)
    try:
        history = solve(case.spec, grid)
    except SolverError as exc:
        raise SolverError(f"{case.name} cell N={N}, M={M} failed: {exc}") from exc
    return error_norms(history, case.exact, grid, case.spec.T)


def _is_doubling(values: Sequence[int]) -> bool:
    return all(b == 2 * a for a, b in zip(values, values[1:]))


def run_convergence(
    case: ManufacturedCase,
    *,
    N: int | None = None,
    M: int | None = None,
    vary: Sequence[int],
    label: str | None = None,
    workers: int | None = None,
) -> ConvergenceReport:
    """Refine in space (fix ``M``, vary ``N``) or in time (fix ``N``, vary ``M``).

    Exactly one of *N* and *M* is given; *vary* lists the other resolution.
    Rates are reported for doubling sequences only.
    """
    if (N is None) == (M is None):
        raise ConfigurationError("fix exactly one of N (time refinement) or M (space refinement)")
    vary = [int(v) for v in vary]
    if len(vary) < 2:
        raise ConfigurationError("a convergence study needs at least two resolutions")

    T = case.spec.T
    if M is not None:
        cells = [(n, M) for n in vary]
    else:
        cells = [(N, m) for m in vary]

    norms = _map_cells(lambda cell: _solve_cell(case, *cell), cells, workers)
    label = case.name if label is None else label
    with_rates = _is_doubling(vary)

    report = ConvergenceReport()
    for idx, ((n, m), (e2, einf)) in enumerate(zip(cells, norms)):
        r2 = rinf = None
        if with_rates and idx > 0:
            prev2, previnf = norms[idx - 1]
            r2, rinf = rate(prev2, e2), rate(previnf, einf)
        report.rows.append(ConvergenceRow(label, 1.0 / n, T / m, e2, einf, r2, rinf))

    return report


TABLE4_PAIRS = ((4, 10), (6, 20), (8, 30), (10, 40))


def run_table4(
    case: ManufacturedCase,
    pairs: Sequence[tuple[int, int]] = TABLE4_PAIRS,
    *,
    workers: int | None = None,
) -> ConvergenceReport:
    """Joint space-time refinement; each pair is ``(N, M)``, i.e. ``h = 1/N``, ``tau = T/M``."""
    norms = _map_cells(lambda cell: _solve_cell(case, *cell), list(pairs), workers)
    report = ConvergenceReport()
    for (n, m), (e2, einf) in zip(pairs, norms):
        report.rows.append(ConvergenceRow(case.name, 1.0 / n, case.spec.T / m, e2, einf))
    return report


# }}}


# {{{ parameter sweeps

# name -> (case, varied parameter, values, fixed parameters)
SWEEPS = {
    "beta": (
        "example1", "beta", (1.2, 1.4, 1.6, 1.8),
        dict(alpha=0.4, gamma=0.5, kappa1=0.001, kappa2=2.0),
    ),
    "alpha": (
        "example1", "alpha", (0.2, 0.4, 0.6, 0.8),
        dict(beta=1.5, gamma=0.5, kappa1=0.001, kappa2=2.0),
    ),
    "gamma": (
        "example1", "gamma", (0.2, 0.4, 0.6, 0.8),
        dict(alpha=0.5, beta=1.5, kappa1=0.001, kappa2=2.0),
    ),
}


def run_sweep(
    name: str,
    *,
    vary: Sequence[int] = (4, 8, 16),
    M: int = 20,
    T: float = 1.0,
    workers: int | None = None,
) -> ConvergenceReport:
    """Spatial convergence for each value of one order, others held fixed."""
    if name == "spacetime":
        case = build_case("example2", 0.5, 1.5, 0.5, 0.1, 5.0, T)
        return run_table4(case, workers=workers)
    if name not in SWEEPS:
        raise ConfigurationError(f"unknown sweep {name!r}, expected one of {sorted(SWEEPS) + ['spacetime']}")

    case_name, param, values, fixed = SWEEPS[name]
    report = ConvergenceReport()
    for value in values:
        params = dict(fixed, **{param: value})
        case = build_case(case_name, T=T, **params)
        report.extend(run_convergence(case, M=M, vary=vary, label=f"{param}={value:g}", workers=workers))
    return report


# }}}
