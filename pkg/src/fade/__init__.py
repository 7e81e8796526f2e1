"""Space-time fractional advection-dispersion solver.

Bernstein collocation in space, product integration for the spatial Caputo
derivatives and the L1 scheme in time.
"""

from fade.errors import ConfigurationError, NumericalError, SolverError
from fade.fractional import FracOrder, OrderKind, gamma_real, l1_weights
from fade.solver import Grid, ProblemSpec, assemble, error_norms, solve
from fade.verification import build_case, run_convergence, run_sweep, run_table4

__all__ = [
    "ConfigurationError",
    "NumericalError",
    "SolverError",
    "FracOrder",
    "OrderKind",
    "gamma_real",
    "l1_weights",
    "Grid",
    "ProblemSpec",
    "assemble",
    "error_norms",
    "solve",
    "build_case",
    "run_convergence",
    "run_sweep",
    "run_table4",
]

__version__ = "0.1.0"
