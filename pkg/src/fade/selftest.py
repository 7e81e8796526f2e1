"""Built-in consistency checks run by ``fade selftest``.

Each check returns ``(name, passed, detail)``; thresholds match the unit
test suite.
"""

from __future__ import annotations

import math

import numpy as np

from fade import bernstein
from fade.fractional import FracOrder, gamma_real, l1_weights
from fade.quadrature import pi_weights
from fade.solver import Grid, ProblemSpec, assemble, assemble_entrywise
from fade.verification import SWEEPS, build_case


def check_gamma():
    spots = {1.0: 1.0, 0.5: math.sqrt(math.pi), 2.5: 0.75 * math.sqrt(math.pi), 5.0: 24.0}
    worst = max(abs(gamma_real(x) - v) / v for x, v in spots.items())
    return "gamma spot values", worst <= 1e-12, f"max rel err {worst:.2e}"


def check_l1_telescoping():
    worst = 0.0
    for alpha in np.arange(1, 10) / 10:
        a = FracOrder.temporal(alpha)
        for k in range(201):
            total = l1_weights(a, k, 0.05).a.sum()
            exact = (k + 1) ** (1 - alpha)
            worst = max(worst, abs(total - exact) / exact)
    return "L1 telescoping", worst <= 1e-12, f"max rel err {worst:.2e}"


def check_pi_moments():
    worst = 0.0
    for eta in (FracOrder.dispersive(1.5), FracOrder.advective(0.5)):
        for N in (2, 8, 32, 128):
            table = pi_weights(eta, N)
            r = np.arange(1, N)
            err = np.abs(table.w.sum(axis=1) - table.moment(r)) / table.moment(r)
            worst = max(worst, float(err.max()))
    return "PI moment identities", worst <= 1e-12, f"max rel err {worst:.2e}"


def _term(c, x, a, b):
    # c * x**a * (1 - x)**b, zero when c == 0 even if an exponent is negative
    if c == 0:
        return np.zeros_like(x)
    return c * x**a * (1.0 - x) ** b


def analytic_derivatives(N, i, x):
    """Product-rule first and second derivatives of ``C(N,i) x^i (1-x)^(N-i)``."""
    C = math.comb(N, i)
    j = N - i
    d1 = C * (_term(i, x, i - 1, j) - _term(j, x, i, j - 1))
    d2 = C * (
        _term(i * (i - 1), x, i - 2, j)
        - _term(2 * i * j, x, i - 1, j - 1)
        + _term(j * (j - 1), x, i, j - 2)
    )
    return d1, d2


def check_bernstein():
    rng = np.random.default_rng(1)
    x = rng.uniform(0.0, 1.0, 50)
    worst = 0.0
    for N in (2, 5, 16, 32):
        values = bernstein.basis_values(N, x)
        worst = max(worst, float(np.abs(values.sum(axis=1) - 1.0).max()))
        D1, D2 = bernstein.derivative_matrices(N, x)
        for i in range(1, N):
            d1, d2 = analytic_derivatives(N, i, x)
            worst = max(worst, float(np.abs(D1[:, i - 1] - d1).max()))
            worst = max(worst, float(np.abs(D2[:, i - 1] - d2).max()))
    return "Bernstein identities", worst <= 1e-10, f"max err {worst:.2e}"


def check_dual_assembly():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(10):
        spec = ProblemSpec(
            FracOrder.temporal(rng.uniform(0.05, 0.95)),
            FracOrder.dispersive(rng.uniform(1.05, 1.95)),
            FracOrder.advective(rng.uniform(0.05, 0.95)),
            kappa1=rng.uniform(1e-3, 1.0),
            kappa2=rng.uniform(1e-3, 5.0),
            T=1.0,
            g=lambda x: np.zeros_like(x),
        )
        grid = Grid(int(rng.integers(2, 9)), int(rng.integers(1, 40)))
        A = assemble(spec, grid).A
        worst = max(worst, float(np.abs(A - assemble_entrywise(spec, grid)).max()))
    return "dual-path assembly", worst <= 1e-12, f"max abs diff {worst:.2e}"


def check_manufactured():
    sets = []
    for case_name, param, values, fixed in SWEEPS.values():
        sets += [(case_name, dict(fixed, **{param: v})) for v in values]
    sets.append(("example2", dict(alpha=0.5, beta=1.5, gamma=0.5, kappa1=0.1, kappa2=5.0)))
    try:
        for name, params in sets:
            build_case(name, **params)
    except Exception as exc:  # report, never crash the selftest
        return "manufactured residuals", False, str(exc)
    return "manufactured residuals", True, f"{len(sets)} parameter sets closed to 1e-8"


CHECKS = (
    check_gamma,
    check_l1_telescoping,
    check_pi_moments,
    check_bernstein,
    check_dual_assembly,
    check_manufactured,
)


def run_all():
    return [check() for check in CHECKS]
