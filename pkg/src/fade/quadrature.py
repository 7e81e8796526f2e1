r"""Product-integration weights for the spatial Caputo derivatives.

On the uniform grid :math:`x_j = j h` the Caputo derivative at a node is
approximated by interpolating the integer-order derivative
:math:`u^{(m)}` piecewise linearly and integrating the kernel
:math:`(x_r - s)^{m - \eta - 1}` exactly:

.. math::

    D^\eta u(x_r) \approx \nu_h^\eta \sum_{j=0}^{r} w_{j,r}^\eta u^{(m)}(x_j),
    \qquad \nu_h^\eta = \frac{h^{m - \eta}}{\Gamma(m - \eta)}.

The rule is exact whenever :math:`u^{(m)}` is linear, with second order
accuracy otherwise.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from fade.errors import ConfigurationError
from fade.fractional import FracOrder, OrderKind, gamma_real

__all__ = ["PIWeightTable", "c_coeff", "pi_weights", "apply_pi"]


def c_coeff(j, eta_exp: float):
    """Return :math:`((j - 1)^\\eta - j^\\eta) / \\eta`, vectorized over *j*."""
    j = np.asarray(j, dtype=np.float64)
    if np.any(j < 1):
        raise ValueError("c_coeff needs j >= 1")
    result = ((j - 1.0) ** eta_exp - j**eta_exp) / eta_exp
    return result if result.ndim else float(result)


@dataclass(frozen=True)
class PIWeightTable:
    """Triangular table of weights :math:`w_{j,r}` for rows ``r = 1..N-1``.

    ``w[r - 1, j]`` holds :math:`w_{j,r}` for ``j <= r`` and zero beyond, so
    ``nu * w`` is exactly the lower Hessenberg weight matrix acting on
    values at ``x_0 .. x_{N-1}``.
    """

    eta: FracOrder
    N: int
    nu: float
    w: np.ndarray

    def row(self, r: int) -> np.ndarray:
        if not 1 <= r <= self.N - 1:
            raise IndexError(f"row {r} outside 1..{self.N - 1}")
        return self.w[r - 1, : r + 1]

    def moment(self, r: int) -> float:
        """Exact row sum, :math:`r^{m - \\eta} / (m - \\eta)`."""
        e = self.eta.m - self.eta.value
        return r**e / e

    def matrix(self) -> np.ndarray:
        """The scaled ``(N-1) x N`` weight matrix ``nu * w``."""
        return self.nu * self.w


def _weight_rows(N: int, hi: float, lo: float) -> np.ndarray:
    # hi = m + 1 - eta, lo = m - eta
    w = np.zeros((N - 1, N))
    for r in range(1, N):
        w[r - 1, 0] = -(c_coeff(r, hi) - (r - 1) * c_coeff(r, lo))
        if r > 1:
            n = r - np.arange(1, r, dtype=np.float64)  # n = r - j
            left = c_coeff(n + 1, hi) - (n + 1) * c_coeff(n + 1, lo)
            right = c_coeff(n, hi) - (n - 1) * c_coeff(n, lo)
            w[r - 1, 1:r] = left - right
        w[r - 1, r] = c_coeff(1, hi) - c_coeff(1, lo)

    return w


@functools.lru_cache(maxsize=64)
def pi_weights(eta: FracOrder, N: int) -> PIWeightTable:
    """Build (and cache) the weight table for order *eta* on ``N`` cells."""
    if N < 2:
        raise ConfigurationError(f"need at least 2 cells, got N={N}")
    if eta.kind is OrderKind.TEMPORAL:
        raise ConfigurationError("product-integration weights are for spatial orders")

    lo = eta.m - eta.value
    hi = lo + 1.0
    h = 1.0 / N

    w = _weight_rows(N, hi, lo)
    w.setflags(write=False)
    nu = h**lo / gamma_real(lo)
    return PIWeightTable(eta=eta, N=N, nu=nu, w=w)


def apply_pi(table: PIWeightTable, values, r: int) -> float:
    """Approximate the Caputo derivative at ``x_r`` from ``u^(m)(x_0..x_r)``."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size < r + 1:
        raise ValueError(f"need at least {r + 1} node values for row {r}, got shape {values.shape}")
    return float(table.nu * (table.row(r) @ values[: r + 1]))
