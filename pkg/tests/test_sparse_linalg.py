import numpy as np
import pytest
import scipy.sparse as sp

from engine.graph_core import build_grid, incidence_matrix
from engine.sparse_linalg import LinearOperatorStack, cg_solve, diagonal_operator, hutchinson_diagonal
from utilities.errors import InvalidArgumentError, NumericalBreakdownError
from utilities.rng import RngStream


def _rooted_laplacian_stack(size: int, strength: float = 1.0) -> LinearOperatorStack:
    graph = build_grid(size, size)
    root_row = sp.csr_matrix(([strength], ([0], [0])), shape=(1, graph.n_vertices))
    return LinearOperatorStack(graph.n_vertices).add(incidence_matrix(graph)).add(root_row)


def test_identity_solve_is_immediate(rng):
    rhs = rng.normal(6)
    result = cg_solve(LinearOperatorStack(6).add(sp.identity(6)), rhs)
    assert result.converged
    assert result.iterations <= 1
    np.testing.assert_allclose(result.solution, rhs)


def test_diagonal_solve_recovers_ones():
    n = 30
    diagonal = np.arange(1.0, n + 1)
    stack = LinearOperatorStack(n).add(diagonal_operator(np.sqrt(diagonal)))
    result = cg_solve(stack, diagonal, rel_tol=1e-10)
    np.testing.assert_allclose(result.solution, 1.0, rtol=1e-8)


def test_rooted_grid_laplacian_residual(rng):
    stack = _rooted_laplacian_stack(64)
    rhs = rng.normal(stack.n_columns)
    result = cg_solve(stack, rhs, rel_tol=1e-6)
    assert result.converged
    assert result.iterations > 0
    residual = np.linalg.norm(stack.matvec(result.solution) - rhs) / np.linalg.norm(rhs)
    assert residual <= 2e-6
    assert result.relative_residual == pytest.approx(residual)


def test_iteration_cap_reports_non_convergence(rng):
    stack = _rooted_laplacian_stack(32)
    result = cg_solve(stack, rng.normal(stack.n_columns), rel_tol=1e-10, max_iter=3)
    assert not result.converged
    assert result.iterations == 3
    assert np.all(np.isfinite(result.solution))


def test_zero_rhs_gives_zero_solution():
    result = cg_solve(_rooted_laplacian_stack(4), np.zeros(16))
    assert result.iterations == 0
    np.testing.assert_array_equal(result.solution, 0.0)


def test_empty_stack_is_refused():
    with pytest.raises(InvalidArgumentError):
        cg_solve(LinearOperatorStack(3), np.ones(3))


def test_bad_tolerance_is_refused():
    with pytest.raises(InvalidArgumentError):
        cg_solve(LinearOperatorStack(3).add(np.eye(3)), np.ones(3), rel_tol=0.0)


def test_non_finite_rhs_breaks_down():
    with pytest.raises(NumericalBreakdownError):
        cg_solve(LinearOperatorStack(3).add(np.eye(3)), np.array([1.0, np.nan, 0.0]))


def test_term_with_wrong_width_is_refused():
    with pytest.raises(InvalidArgumentError):
        LinearOperatorStack(3).add(np.eye(4))


def test_preconditioned_solve_agrees_with_plain(rng):
    graph = build_grid(16, 16)
    weights = rng.uniform(graph.n_edges) * 50 + 0.1
    stack = (LinearOperatorStack(graph.n_vertices)
             .add(sp.diags(np.sqrt(weights)) @ incidence_matrix(graph))
             .add(sp.identity(graph.n_vertices), 0.01))
    rhs = rng.normal(graph.n_vertices)
    plain = cg_solve(stack, rhs, rel_tol=1e-9)
    preconditioned = cg_solve(stack, rhs, rel_tol=1e-9, preconditioner=hutchinson_diagonal(stack, 64, rng))
    assert plain.converged and preconditioned.converged
    np.testing.assert_allclose(preconditioned.solution, plain.solution, rtol=1e-5, atol=1e-7)


def test_weighted_stack_assembles_normal_equations(rng):
    first = rng.normal((7, 5))
    second = rng.normal((3, 5))
    stack = LinearOperatorStack(5).add(first).add(sp.csr_matrix(second), 4.0)
    np.testing.assert_allclose(stack.dense(), first.T @ first + 4.0 * second.T @ second)
    x = rng.normal(5)
    np.testing.assert_allclose(stack.as_linear_operator().matvec(x), stack.dense() @ x)


def test_hutchinson_is_exact_on_diagonals(rng):
    values = np.array([0.5, 2.0, 9.0, 1e-3])
    stack = LinearOperatorStack(4).add(diagonal_operator(np.sqrt(values)))
    for probes in (1, 3, 10):
        np.testing.assert_allclose(hutchinson_diagonal(stack, probes, rng), values)


def test_hutchinson_estimates_dense_diagonal(rng):
    factor = rng.normal((5, 5))
    stack = LinearOperatorStack(5).add(factor).add(np.eye(5), 5.0)
    exact = np.diag(stack.dense())
    estimate = hutchinson_diagonal(stack, 10000, rng)
    assert np.all(np.abs(estimate - exact) / exact < 0.05)


def test_hutchinson_floor_clamps_estimates(rng):
    stack = LinearOperatorStack(2).add(np.zeros((1, 2)) + 1e-12)
    assert np.all(hutchinson_diagonal(stack, 4, rng, floor=1e-3) == 1e-3)
