import math

import numpy as np
import pytest

from fade import bernstein, solver
from fade.errors import ConfigurationError, SolverError
from fade.fractional import FracOrder, l1_weights
from fade.solver import (
    Grid,
    ProblemSpec,
    SolutionHistory,
    assemble,
    assemble_entrywise,
    error_norms,
    rhs,
    solve,
    step,
)
from fade.verification import build_case


def zero(x):
    return np.zeros_like(np.asarray(x, dtype=np.float64))


def make_spec(alpha=0.4, beta=1.5, gamma=0.5, kappa1=0.001, kappa2=2.0, T=1.0, g=zero, h=None):
    kwargs = {} if h is None else {"h": h}
    return ProblemSpec(
        FracOrder.temporal(alpha), FracOrder.dispersive(beta), FracOrder.advective(gamma),
        kappa1, kappa2, T, g=g, **kwargs,
    )


@pytest.fixture(scope="module")
def example1():
    return build_case("example1", 0.4, 1.5, 0.5, 0.001, 2.0, 1.0)


@pytest.fixture(scope="module")
def example2():
    return build_case("example2", 0.5, 1.5, 0.5, 0.1, 5.0, 1.0)


# {{{ problem and grid


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        make_spec(g=lambda x: np.ones_like(x))
    with pytest.raises(ConfigurationError):
        make_spec(kappa1=-1.0)
    with pytest.raises(ConfigurationError):
        make_spec(kappa2=math.inf)
    with pytest.raises(ConfigurationError):
        make_spec(beta=2.0)
    with pytest.raises(ConfigurationError):
        make_spec(T=0.0)


def test_grid():
    grid = Grid(8, 20, 1.0)
    assert grid.h == 0.125
    assert grid.tau == 0.05
    assert grid.t[-1] == 1.0
    assert np.all(np.diff(grid.x) > 0)
    np.testing.assert_allclose(np.diff(grid.x), grid.h)
    for bad in ((1, 5), (4, 0), (2.5, 3)):
        with pytest.raises(ConfigurationError):
            Grid(*bad)


# }}}


# {{{ assembly


def test_assemble_without_transport():
    spec = make_spec(kappa1=0.0, kappa2=0.0)
    grid = Grid(6, 10)
    m = assemble(spec, grid)
    np.testing.assert_array_equal(m.A, m.mu * m.B)


def test_shapes():
    N = 7
    m = assemble(make_spec(), Grid(N, 5))
    assert m.B.shape == (N - 1, N - 1)
    assert m.D1.shape == m.D2.shape == (N, N - 1)
    assert m.Wbeta.shape == m.Wgamma.shape == (N - 1, N)
    assert m.A.shape == (N - 1, N - 1)


def test_dual_path_reference_parameters():
    spec = make_spec(0.4, 1.5, 0.5, 0.001, 2.0)
    grid = Grid(4, 20)  # tau = 0.05
    np.testing.assert_allclose(assemble(spec, grid).A, assemble_entrywise(spec, grid), rtol=0, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_dual_path_random(seed):
    rng = np.random.default_rng(seed)
    spec = make_spec(
        alpha=rng.uniform(0.05, 0.95), beta=rng.uniform(1.05, 1.95), gamma=rng.uniform(0.05, 0.95),
        kappa1=rng.uniform(0.0, 2.0), kappa2=rng.uniform(0.0, 5.0),
    )
    grid = Grid(int(rng.integers(2, 12)), int(rng.integers(1, 50)))
    A = assemble(spec, grid).A
    np.testing.assert_allclose(A, assemble_entrywise(spec, grid), rtol=0, atol=1e-12 * max(1.0, np.abs(A).max()))


def test_advection_sign():
    """The advective term enters with a plus sign, consistent with the PDE."""
    spec = make_spec(kappa1=0.0, kappa2=1.0)
    grid = Grid(5, 10)
    m = assemble(spec, grid)
    np.testing.assert_allclose(m.A, m.mu * m.B + m.Wgamma @ m.D1, atol=1e-14)


def test_assembly_is_deterministic():
    spec, grid = make_spec(), Grid(9, 12)
    a, b = assemble(spec, grid), assemble(spec, grid)
    assert np.array_equal(a.A, b.A)
    assert not a.A.flags.writeable


def test_singular_system(monkeypatch):
    real = solver.l1_weights

    def no_memory(alpha, k, tau):
        w = real(alpha, k, tau)
        return type(w)(alpha=w.alpha, k=w.k, a=w.a, mu=0.0)

    monkeypatch.setattr(solver, "l1_weights", no_memory)
    with pytest.raises(SolverError, match="singular"):
        assemble(make_spec(kappa1=0.0, kappa2=0.0), Grid(4, 4))


# }}}


# {{{ right-hand side and steps


def _history(grid, rows):
    history = SolutionHistory.empty(grid)
    for k, row in enumerate(rows):
        history.node_values[k] = row
    return history


def test_rhs_first_level():
    spec = make_spec(h=lambda x, t: x * t)
    grid = Grid(6, 10)
    u0 = np.sin(np.pi * grid.interior)
    w = l1_weights(spec.alpha, 0, grid.tau)
    f = rhs(spec, grid, w, _history(grid, [u0]))
    np.testing.assert_allclose(f, w.mu * u0 + grid.interior * grid.t[1], rtol=1e-15)


def test_rhs_zero_data():
    spec = make_spec()
    grid = Grid(6, 10)
    history = SolutionHistory.empty(grid)
    for k in range(3):
        assert np.all(rhs(spec, grid, l1_weights(spec.alpha, k, grid.tau), history) == 0.0)


def test_rhs_second_level():
    h = lambda x, t: x**2 + t  # noqa: E731
    spec = make_spec(alpha=0.5, h=h)
    grid = Grid(5, 4)
    rng = np.random.default_rng(0)
    u0, u1 = rng.normal(size=(2, 4))
    w = l1_weights(spec.alpha, 1, grid.tau)
    f = rhs(spec, grid, w, _history(grid, [u0, u1]))
    expected = w.mu * (u1 - (math.sqrt(2) - 1) * (u1 - u0)) + h(grid.interior, grid.t[2])
    np.testing.assert_allclose(f, expected, rtol=1e-14)


def test_step_round_trip():
    m = assemble(make_spec(), Grid(8, 20))
    assert np.all(step(m, np.zeros(7)) == 0.0)
    e1 = np.eye(7)[0]
    np.testing.assert_allclose(step(m, m.A @ e1), e1, atol=1e-12)


def test_step_residual_check():
    m = assemble(make_spec(), Grid(6, 20))
    broken = solver.SystemMatrices(
        B=m.B, D1=m.D1, D2=m.D2, Wbeta=m.Wbeta, Wgamma=m.Wgamma,
        A=m.A * 2.0, mu=m.mu, lu=m.lu,
    )
    with pytest.raises(SolverError, match="residual"):
        step(broken, np.ones(5))


def test_first_step_regression(example1):
    """Pinned from the first verified run (E_inf at T=1 matches the reference 1.257693e-3)."""
    grid = Grid(8, 20)
    m = assemble(example1.spec, grid)
    history = _history(grid, [example1.spec.g(grid.interior)])
    c = step(m, rhs(example1.spec, grid, l1_weights(example1.spec.alpha, 0, grid.tau), history))
    expected = [
        0.00093107819830119, 0.03632651775788758, 0.06827062477283573, 0.08555445879240697,
        0.06698647439449427, 0.03696527541497484, -0.00099159904960228,
    ]
    np.testing.assert_allclose(c, expected, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(m.B @ c, example1.exact(grid.interior, grid.tau), atol=2e-3)


# }}}


# {{{ full solves


def test_single_step_solve(example1):
    grid = Grid(6, 1, 1.0)
    history = solve(example1.spec, grid)
    assert history.coeff.shape == (1, 5)
    assert history.node_values.shape == (2, 5)


def test_zero_problem():
    history = solve(make_spec(), Grid(7, 9))
    assert np.all(history.coeff == 0.0)
    assert np.all(history.node_values == 0.0)


def test_history_consistency(example2):
    grid = Grid(10, 12)
    history = solve(example2.spec, grid)
    for k in range(1, grid.M + 1):
        np.testing.assert_allclose(
            history.node_values[k], bernstein.eval_series(history.coeff[k - 1], grid.interior), atol=1e-12
        )
        assert history.evaluate(0.0, k) == 0.0
        assert history.evaluate(1.0, k) == 0.0


def test_example1_reference(example1):
    grid = Grid(8, 20)
    e2, einf = error_norms(solve(example1.spec, grid), example1.exact)
    assert einf == pytest.approx(1.26e-3, rel=0.01)


def test_horizon_mismatch(example1):
    with pytest.raises(ConfigurationError):
        solve(example1.spec, Grid(4, 4, 2.0))


def test_time_independent_in_span():
    """A steady solution x(1 - x) with matching forcing is reproduced to roundoff."""
    from fade.fractional import caputo_monomial

    beta, gamma = FracOrder.dispersive(1.5), FracOrder.advective(0.5)
    k1, k2 = 0.3, 1.2

    def h(x, t):
        dx_b = caputo_monomial(1, beta, x) - caputo_monomial(2, beta, x)
        dx_g = caputo_monomial(1, gamma, x) - caputo_monomial(2, gamma, x)
        return -k1 * dx_b + k2 * dx_g

    u = lambda x: x * (1 - x)  # noqa: E731
    spec = make_spec(kappa1=k1, kappa2=k2, g=u, h=h)
    grid = Grid(6, 10)
    e2, einf = error_norms(solve(spec, grid), lambda x, t: u(x))
    assert einf < 1e-12
    assert e2 < 1e-12


# }}}


# {{{ norms


def test_error_norms_exact_match(example1):
    grid = Grid(5, 3)
    history = solve(example1.spec, grid)
    exact = lambda x, t: history.evaluate(x)  # noqa: E731
    assert error_norms(history, exact) == (0.0, 0.0)
    assert error_norms(history, exact, l2="discrete") == (0.0, 0.0)


def test_error_norms_single_node():
    grid = Grid(8, 2)
    history = SolutionHistory.empty(grid)
    history.node_values[-1, 3] = 0.25
    e2, einf = error_norms(history, lambda x, t: np.zeros_like(x), l2="discrete")
    assert einf == 0.25
    assert e2 == pytest.approx(math.sqrt(grid.h) * 0.25, rel=1e-15)


def test_continuous_norm_quadrature():
    """E2 integrates (u - u_h)^2 over [0, 1]; check on a polynomial with a known integral."""
    grid = Grid(4, 1)
    history = SolutionHistory.empty(grid)
    c = np.array([1.0, 2.0, 3.0])
    history.coeff[0] = c
    history.node_values[1] = bernstein.eval_series(c, grid.interior)
    x = np.linspace(0, 1, 200001)
    ref = math.sqrt(np.trapezoid(bernstein.eval_series(c, x) ** 2, x))
    e2, _ = error_norms(history, lambda x, t: np.zeros_like(x))
    assert e2 == pytest.approx(ref, rel=1e-9)


# }}}


# {{{ convergence orders


def test_spatial_order(example1):
    errors = [error_norms(solve(example1.spec, Grid(N, 1000)), example1.exact)[1] for N in (4, 8, 16)]
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all((ratios >= 3.3) & (ratios <= 4.7)), ratios


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_temporal_self_convergence(alpha):
    """With N fixed the spatial error cancels in differences of successive solutions,
    isolating the L1 error, which must decay like tau^(2 - alpha)."""
    case = build_case("example2", alpha, 1.5, 0.5, 0.1, 5.0, 1.0)
    final = {M: solve(case.spec, Grid(32, M)).node_values[-1] for M in (10, 20, 40, 80, 160)}
    diffs = [np.abs(final[M] - final[2 * M]).max() for M in (10, 20, 40, 80)]
    rates = np.log2(np.array(diffs[:-1]) / np.array(diffs[1:]))
    assert np.all(np.abs(rates - (2 - alpha)) <= 0.25), rates


def test_boundary_values_vanish(example2):
    history = solve(example2.spec, Grid(9, 6))
    for k in range(1, 7):
        assert history.evaluate(np.array([0.0, 1.0]), k).tolist() == [0.0, 0.0]


# }}}
