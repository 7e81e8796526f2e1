r"""Bernstein polynomials of degree ``N`` on :math:`[0, 1]`.

.. math::

    B_{i,N}(x) = \binom{N}{i} x^i (1 - x)^{N - i}, \qquad 0 \le i \le N,

with the convention :math:`B_{i,N} \equiv 0` for ``i < 0`` or ``i > N``.
First and second derivatives are expressed in the same basis through the
three- and five-term identities, with coefficients from :func:`deriv_coeffs`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fade.errors import ConfigurationError

__all__ = [
    "DerivCoeffs",
    "basis_values",
    "eval_basis",
    "deriv_coeffs",
    "collocation_matrix",
    "derivative_matrices",
    "eval_series",
]


def _check_unit_interval(x: np.ndarray) -> None:
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("Bernstein polynomials are evaluated on [0, 1] only")


def basis_values(N: int, x) -> np.ndarray:
    """Evaluate all ``N + 1`` basis polynomials at the points *x*.

    Returns an array of shape ``x.shape + (N + 1,)``. Uses the degree
    elevation recurrence :math:`B_{i,n} = (1 - x) B_{i,n-1} + x B_{i-1,n-1}`,
    which only forms convex combinations and never builds binomials.
    """
    if N < 0:
        raise ConfigurationError(f"degree must be non-negative, got {N}")
    x = np.asarray(x, dtype=np.float64)
    _check_unit_interval(x)

    x = x[..., None]
    y = 1.0 - x
    b = np.zeros(x.shape[:-1] + (N + 1,))
    b[..., 0] = 1.0
    for n in range(1, N + 1):
        b[..., 1 : n + 1] = y * b[..., 1 : n + 1] + x * b[..., 0:n]
        b[..., 0] *= y[..., 0]

    return b


def eval_basis(N: int, i: int, x):
    """Evaluate :math:`B_{i,N}(x)`; zero for indices outside ``0..N``."""
    x = np.asarray(x, dtype=np.float64)
    _check_unit_interval(x)
    if i < 0 or i > N:
        result = np.zeros_like(x)
    else:
        result = basis_values(N, x)[..., i]

    return result if result.ndim else float(result)


# {{{ derivative coefficients


@dataclass(frozen=True)
class DerivCoeffs:
    r"""Coefficients of the three- and five-term derivative identities.

    ``d1[k + 1, i]`` is :math:`d^{(1)}_{k,i}` for ``k = -1, 0, 1`` and
    ``d2[k + 2, i]`` is :math:`d^{(2)}_{k,i}` for ``k = -2..2``, so that

    .. math::

        B'_{i,N} = \sum_{k=-1}^{1} d^{(1)}_{k,i} B_{i+k,N}, \qquad
        B''_{i,N} = \sum_{k=-2}^{2} d^{(2)}_{k,i} B_{i+k,N}.
    """

    N: int
    d1: np.ndarray
    d2: np.ndarray

    def first(self, k: int, i: int) -> float:
        return float(self.d1[k + 1, i])

    def second(self, k: int, i: int) -> float:
        return float(self.d2[k + 2, i])


def deriv_coeffs(N: int) -> DerivCoeffs:
    if N < 2:
        raise ConfigurationError(f"degree must be at least 2, got {N}")

    i = np.arange(N + 1, dtype=np.float64)
    d1 = np.stack([
        N - i + 1,
        -(N - 2 * i),
        -(i + 1),
    ])
    d2 = np.stack([
        (N - i + 2) * (N - i + 1),
        -2 * (N - i + 1) * (N - 2 * i + 1),
        N**2 - 6 * N * i + 6 * i**2 - N,
        2 * (i + 1) * (N - 2 * i - 1),
        (i + 2) * (i + 1),
    ])
    d1.setflags(write=False)
    d2.setflags(write=False)

    return DerivCoeffs(N=N, d1=d1, d2=d2)


# }}}


# {{{ matrices


def collocation_matrix(N: int, nodes) -> np.ndarray:
    """Matrix with entries :math:`B_{i,N}(x_r)` for interior ``i = 1..N-1``."""
    nodes = np.asarray(nodes, dtype=np.float64)
    if nodes.shape != (N - 1,):
        raise ConfigurationError(f"expected {N - 1} interior nodes, got shape {nodes.shape}")
    if np.any(np.diff(nodes) <= 0.0):
        raise ConfigurationError("collocation nodes must be distinct and strictly increasing")
    if nodes.size and (nodes[0] <= 0.0 or nodes[-1] >= 1.0):
        raise ConfigurationError("collocation nodes must lie strictly inside (0, 1)")

    return basis_values(N, nodes)[:, 1:N]


def _shifted(values: np.ndarray, s: int, N: int) -> np.ndarray:
    """Columns ``B_{i+s,N}`` for ``i = 1..N-1``, honouring the zero convention."""
    out = np.zeros((values.shape[0], N - 1))
    i = np.arange(1, N) + s
    mask = (i >= 0) & (i <= N)
    out[:, mask] = values[:, i[mask]]
    return out


def derivative_matrices(N: int, nodes, coeffs: DerivCoeffs | None = None):
    """First and second derivative matrices of the interior basis.

    Row ``j`` corresponds to ``nodes[j]`` (the grid points ``x_0..x_{N-1}``
    in the solver) and column ``i - 1`` to :math:`B_{i,N}`, ``i = 1..N-1``.
    """
    if coeffs is None:
        coeffs = deriv_coeffs(N)
    if coeffs.N != N:
        raise ConfigurationError(f"coefficients are for degree {coeffs.N}, not {N}")

    values = basis_values(N, nodes)
    cols = slice(1, N)

    D1 = np.zeros((values.shape[0], N - 1))
    for s in (-1, 0, 1):
        D1 += coeffs.d1[s + 1, cols] * _shifted(values, s, N)

    D2 = np.zeros((values.shape[0], N - 1))
    for s in (-2, -1, 0, 1, 2):
        D2 += coeffs.d2[s + 2, cols] * _shifted(values, s, N)

    return D1, D2


def eval_series(coeffs, x):
    """Evaluate :math:`\\sum_{i=1}^{N-1} c_i B_{i,N}(x)` with ``N = len(coeffs) + 1``."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    N = coeffs.size + 1
    result = basis_values(N, x)[..., 1:N] @ coeffs
    return result if np.ndim(result) else float(result)


# }}}
