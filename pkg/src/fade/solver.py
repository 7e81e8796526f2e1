r"""Fully discrete scheme for the space-time fractional advection-dispersion equation.

The continuous problem on :math:`[0, 1] \times [0, T]` is

.. math::

    D_t^\alpha u = \kappa_1 D_x^\beta u - \kappa_2 D_x^\gamma u + h(x, t),
    \qquad u(x, 0) = g(x), \qquad u(0, t) = u(1, t) = 0.

Time is discretized with the L1 scheme and the spatial derivatives with
product integration at the grid nodes. The solution at each level is a
Bernstein expansion over the interior basis, collocated at
``x_1 .. x_{N-1}``, so each step is one dense solve with a matrix that
does not depend on the level.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as la

from fade import bernstein
from fade.errors import ConfigurationError, SolverError
from fade.fractional import FracOrder, L1Weights, OrderKind, l1_weights
from fade.quadrature import pi_weights

__all__ = [
    "ProblemSpec",
    "Grid",
    "SystemMatrices",
    "SolutionHistory",
    "assemble",
    "assemble_entrywise",
    "rhs",
    "step",
    "solve",
    "error_norms",
]

RESIDUAL_RTOL = 1.0e-10
PIVOT_ATOL = 1.0e-12


def _zero_forcing(x, t):
    return np.zeros_like(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class ProblemSpec:
    """Orders, coefficients, horizon, initial profile and forcing."""

    alpha: FracOrder
    beta: FracOrder
    gamma: FracOrder
    kappa1: float
    kappa2: float
    T: float
    g: Callable
    h: Callable = _zero_forcing

    def __post_init__(self) -> None:
        expected = (
            ("alpha", OrderKind.TEMPORAL),
            ("beta", OrderKind.DISPERSIVE),
            ("gamma", OrderKind.ADVECTIVE),
        )
        for name, kind in expected:
            order = getattr(self, name)
            if not isinstance(order, FracOrder):
                object.__setattr__(self, name, FracOrder(order, kind))
            elif order.kind is not kind:
                raise ConfigurationError(f"{name} must be a {kind.value} order")

        for name in ("kappa1", "kappa2"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0:
                raise ConfigurationError(f"{name} must be finite and non-negative, got {value}")
            object.__setattr__(self, name, value)

        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ConfigurationError(f"T must be positive, got {self.T}")

        ends = np.asarray(self.g(np.array([0.0, 1.0])), dtype=np.float64)
        if np.max(np.abs(ends)) > 1.0e-14:
            raise ConfigurationError(
                "initial profile must vanish at x = 0 and x = 1 "
                f"(got g(0) = {ends[0]:g}, g(1) = {ends[1]:g})"
            )


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid with ``N`` cells and ``M`` steps."""

    N: int
    M: int
    T: float = 1.0

    def __post_init__(self) -> None:
        if int(self.N) != self.N or self.N < 2:
            raise ConfigurationError(f"N must be an integer >= 2, got {self.N}")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigurationError(f"M must be an integer >= 1, got {self.M}")
        if not self.T > 0.0:
            raise ConfigurationError(f"T must be positive, got {self.T}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def tau(self) -> float:
        return self.T / self.M

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N + 1) / self.N

    @property
    def interior(self) -> np.ndarray:
        return self.x[1:-1]

    @property
    def t(self) -> np.ndarray:
        # t_M = T exactly
        t = np.arange(self.M + 1) * self.tau
        t[-1] = self.T
        return t


@dataclass(frozen=True)
class SystemMatrices:
    B: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    Wbeta: np.ndarray
    Wgamma: np.ndarray
    A: np.ndarray
    mu: float
    lu: tuple = field(repr=False)


@dataclass
class SolutionHistory:
    """Bernstein coefficients and interior node values for every level.

    ``coeff[k - 1]`` holds the coefficients of level ``k >= 1``;
    ``node_values[k]`` holds :math:`u_k(x_r)`, ``r = 1..N-1``, with row
    zero taken straight from the initial profile.
    """

    grid: Grid
    coeff: np.ndarray
    node_values: np.ndarray

    @classmethod
    def empty(cls, grid: Grid) -> SolutionHistory:
        return cls(
            grid=grid,
            coeff=np.zeros((grid.M, grid.N - 1)),
            node_values=np.zeros((grid.M + 1, grid.N - 1)),
        )

    def evaluate(self, x, k: int | None = None):
        """Evaluate the Bernstein solution of level *k* (default: final) at *x*."""
        k = self.grid.M if k is None else k
        if not 1 <= k <= self.grid.M:
            raise IndexError(f"level {k} has no Bernstein coefficients")
        return bernstein.eval_series(self.coeff[k - 1], x)


# {{{ assembly


def assemble(spec: ProblemSpec, grid: Grid) -> SystemMatrices:
    """Build the collocation system in matrix form and factor it once.

    .. math::

        A = \\mu_\\tau^\\alpha B - \\kappa_1 W_\\beta D_2 + \\kappa_2 W_\\gamma D_1
    """
    N = grid.N
    x = grid.x

    B = bernstein.collocation_matrix(N, x[1:N])
    D1, D2 = bernstein.derivative_matrices(N, x[:N])
    Wbeta = pi_weights(spec.beta, N).matrix()
    Wgamma = pi_weights(spec.gamma, N).matrix()
    mu = l1_weights(spec.alpha, 0, grid.tau).mu

    A = mu * B - spec.kappa1 * (Wbeta @ D2) + spec.kappa2 * (Wgamma @ D1)
    A.setflags(write=False)

    with warnings.catch_warnings():
        # singularity is reported below with the parameter set attached
        warnings.simplefilter("ignore", la.LinAlgWarning)
        lu, piv = la.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= PIVOT_ATOL:
        raise SolverError(
            "collocation matrix is singular "
            f"(smallest pivot {pivots.min():.3e}) for alpha={spec.alpha.value}, "
            f"beta={spec.beta.value}, gamma={spec.gamma.value}, kappa1={spec.kappa1}, "
            f"kappa2={spec.kappa2}, N={N}, tau={grid.tau}"
        )

    return SystemMatrices(
        B=B, D1=D1, D2=D2, Wbeta=Wbeta, Wgamma=Wgamma, A=A, mu=mu, lu=(lu, piv)
    )


def assemble_entrywise(spec: ProblemSpec, grid: Grid) -> np.ndarray:
    """Build the system matrix entry by entry from the collocation equations.

    Independent of the matrix products in :func:`assemble`: each entry sums
    the three- and five-term derivative expansions directly against the
    product-integration weights.
    """
    N = grid.N
    x = grid.x
    mu = l1_weights(spec.alpha, 0, grid.tau).mu
    wb = pi_weights(spec.beta, N)
    wg = pi_weights(spec.gamma, N)
    d = bernstein.deriv_coeffs(N)

    def b(i: int, xj: float) -> float:
        return bernstein.eval_basis(N, i, xj)

    A = np.zeros((N - 1, N - 1))
    for r in range(1, N):
        for i in range(1, N):
            total = mu * b(i, x[r])
            for j in range(r + 1):
                second = sum(d.second(s, i) * b(i + s, x[j]) for s in range(-2, 3))
                first = sum(d.first(s, i) * b(i + s, x[j]) for s in range(-1, 2))
                total -= spec.kappa1 * wb.nu * wb.w[r - 1, j] * second
                total += spec.kappa2 * wg.nu * wg.w[r - 1, j] * first
            A[r - 1, i - 1] = total

    return A


# }}}


# {{{ time stepping


def rhs(spec: ProblemSpec, grid: Grid, weights: L1Weights, history: SolutionHistory) -> np.ndarray:
    """Right-hand side for level ``k + 1`` from stored node values only.

    .. math::

        f_{k+1} = \\mu \\Big(u_k - \\sum_{j=0}^{k-1} a_{k,j} (u_{j+1} - u_j)\\Big)
            + h(\\cdot, t_{k+1})
    """
    k = weights.k
    u = history.node_values
    f = u[k].copy()
    if k > 0:
        f -= weights.a[:k] @ np.diff(u[: k + 1], axis=0)

    t_next = grid.t[k + 1]
    forcing = np.asarray(spec.h(grid.interior, t_next), dtype=np.float64)
    return weights.mu * f + forcing


def step(matrices: SystemMatrices, f: np.ndarray) -> np.ndarray:
    """Solve ``A c = f`` with the stored factorization and check the residual."""
    f = np.asarray(f, dtype=np.float64)
    c = la.lu_solve(matrices.lu, f)

    residual = np.max(np.abs(matrices.A @ c - f), initial=0.0)
    scale = np.max(np.abs(f), initial=0.0)
    if not np.all(np.isfinite(c)) or residual > RESIDUAL_RTOL * scale:
        raise SolverError(
            f"linear solve failed its residual check: |Ac - f| = {residual:.3e}, "
            f"|f| = {scale:.3e}"
        )

    return c


def solve(spec: ProblemSpec, grid: Grid, matrices: SystemMatrices | None = None) -> SolutionHistory:
    """March from ``t_0 = 0`` to ``t_M = T``."""
    if not math.isclose(grid.T, spec.T, rel_tol=1e-14):
        raise ConfigurationError(f"grid horizon {grid.T} differs from problem horizon {spec.T}")
    if matrices is None:
        matrices = assemble(spec, grid)

    history = SolutionHistory.empty(grid)
    history.node_values[0] = spec.g(grid.interior)

    for k in range(grid.M):
        weights = l1_weights(spec.alpha, k, grid.tau)
        c = step(matrices, rhs(spec, grid, weights, history))
        history.coeff[k] = c
        history.node_values[k + 1] = matrices.B @ c

    return history


# }}}


# {{{ error norms


def _continuous_l2(history: SolutionHistory, exact: Callable, T: float, order: int = 8) -> float:
    """L2 norm of ``u(., T) - u_h`` over [0, 1] by composite Gauss-Legendre."""
    grid = history.grid
    xg, wg = np.polynomial.legendre.leggauss(order)
    # one panel per grid cell
    left = grid.x[:-1, None]
    xq = left + 0.5 * grid.h * (xg + 1.0)
    wq = np.broadcast_to(0.5 * grid.h * wg, xq.shape)

    xq = np.clip(xq.ravel(), 0.0, 1.0)
    err = np.asarray(exact(xq, T), dtype=np.float64) - history.evaluate(xq)
    return float(np.sqrt(np.sum(wq.ravel() * err**2)))


def error_norms(
    history: SolutionHistory,
    exact: Callable,
    grid: Grid | None = None,
    T: float | None = None,
    *,
    l2: str = "continuous",
) -> tuple[float, float]:
    """Return ``(E2, Einf)`` of the final level against *exact*.

    ``Einf`` is the largest nodal error over the interior nodes. ``E2`` is
    the L2 norm of the error over [0, 1] using the Bernstein solution
    (``l2="continuous"``) or the nodal norm
    :math:`\\sqrt{h \\sum_r e_r^2}` (``l2="discrete"``).
    """
    grid = history.grid if grid is None else grid
    T = grid.T if T is None else T

    e = np.asarray(exact(grid.interior, T), dtype=np.float64) - history.node_values[grid.M]
    einf = float(np.max(np.abs(e), initial=0.0))

    if l2 == "discrete":
        e2 = float(np.sqrt(grid.h * np.sum(e**2)))
    elif l2 == "continuous":
        e2 = _continuous_l2(history, exact, T)
    else:
        raise ValueError(f"unknown l2 convention {l2!r}")

    return e2, einf


# }}}
