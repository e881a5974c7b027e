import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator, cg

from models import Model
from utilities.constants import CG_MAX_ITER_FACTOR, CG_TOLERANCE, HUTCHINSON_FLOOR
from utilities.errors import InvalidArgumentError, NumericalBreakdownError
from utilities.rng import RngStream
from utilities.validation import InputValidation

logger = logging.getLogger(__name__)


@dataclass(repr=False)
class OperatorTerm(Model):
    operator: LinearOperator
    weight: float


class LinearOperatorStack(Model):
    """
    Normal-equations operator sum_k w_k M_k^T M_k. Terms may be sparse matrices, dense arrays or
    matrix-free LinearOperators; all share the column dimension.
    """

    def __init__(self, n_columns: int):
        self.n_columns = InputValidation.positive_int("n_columns", n_columns)
        self.terms: List[OperatorTerm] = []

    def add(self, operator, weight: float = 1.0) -> "LinearOperatorStack":
        operator = aslinearoperator(operator)
        if operator.shape[1] != self.n_columns:
            raise InvalidArgumentError(f"term has {operator.shape[1]} columns, stack has {self.n_columns}")
        self.terms.append(OperatorTerm(operator, InputValidation.positive("weight", float(weight))))
        return self

    @property
    def is_empty(self) -> bool:
        return not self.terms

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        out = np.zeros(self.n_columns)
        for term in self.terms:
            out += term.weight * term.operator.rmatvec(term.operator.matvec(x))
        return out

    def as_linear_operator(self) -> LinearOperator:
        n = self.n_columns
        return LinearOperator((n, n), matvec=self.matvec, rmatvec=self.matvec, dtype=np.float64)

    def dense(self) -> np.ndarray:
        """Explicit assembly, for small instances only."""
        return np.column_stack([self.matvec(e) for e in np.eye(self.n_columns)])


@dataclass(repr=False)
class CgResult(Model):
    solution: np.ndarray
    iterations: int
    relative_residual: float
    converged: bool


def jacobi_preconditioner(diagonal: np.ndarray) -> LinearOperator:
    inverse = 1.0 / np.maximum(np.asarray(diagonal, dtype=np.float64), HUTCHINSON_FLOOR)
    n = inverse.size
    return LinearOperator((n, n), matvec=lambda x: inverse * np.ravel(x), dtype=np.float64)


def cg_solve(stack: LinearOperatorStack, rhs: np.ndarray, rel_tol: float = CG_TOLERANCE,
             max_iter: Optional[int] = None, preconditioner: Optional[np.ndarray] = None,
             x0: Optional[np.ndarray] = None) -> CgResult:
    """
    Conjugate gradients stopped at ||op x - rhs|| <= rel_tol ||rhs||. Non-convergence within
    ``max_iter`` (default 10 |V|) is reported through ``converged``, not raised.

    :param preconditioner: estimated operator diagonal, applied as a Jacobi preconditioner
    """
    if stack.is_empty:
        raise InvalidArgumentError("refusing to solve with an empty operator stack")
    if not 0 < rel_tol < 1:
        raise InvalidArgumentError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    rhs = np.asarray(rhs, dtype=np.float64).reshape(-1)
    InputValidation.same_length("rhs", rhs.size, stack.n_columns)
    if not np.all(np.isfinite(rhs)):
        raise NumericalBreakdownError("non-finite right-hand side", 0)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0:
        return CgResult(np.zeros_like(rhs), 0, 0.0, True)
    max_iter = CG_MAX_ITER_FACTOR * stack.n_columns if max_iter is None else max_iter
    iterations = 0

    def count(xk):
        nonlocal iterations
        iterations += 1
        if not np.all(np.isfinite(xk)):
            raise NumericalBreakdownError("conjugate gradients produced a non-finite iterate", iterations)

    operator = stack.as_linear_operator()
    solution, info = cg(operator, rhs, x0=x0, rtol=rel_tol, atol=0.0, maxiter=max_iter,
                        M=None if preconditioner is None else jacobi_preconditioner(preconditioner),
                        callback=count)
    if info < 0:
        raise NumericalBreakdownError("conjugate gradients broke down", iterations)
    residual = float(np.linalg.norm(operator.matvec(solution) - rhs) / rhs_norm)
    if not np.isfinite(residual):
        raise NumericalBreakdownError("non-finite residual", iterations)
    converged = info == 0
    if not converged:
        logger.warning(f"CG stopped after {iterations} iterations at relative residual {residual:.3e}")
    return CgResult(solution, iterations, residual, converged)


def hutchinson_diagonal(stack: LinearOperatorStack, probes: int, rng: RngStream,
                        floor: float = HUTCHINSON_FLOOR) -> np.ndarray:
    """Diagonal estimate sum_k v_k * (op v_k) / sum_k v_k * v_k with Rademacher probes, clamped at ``floor``."""
    InputValidation.positive_int("probes", probes)
    numerator = np.zeros(stack.n_columns)
    denominator = np.zeros(stack.n_columns)
    for v in rng.rademacher((probes, stack.n_columns)):
        numerator += v * stack.matvec(v)
        denominator += v * v
    return np.maximum(numerator / denominator, floor)


def diagonal_operator(values: np.ndarray) -> sp.dia_matrix:
    return sp.diags(np.asarray(values, dtype=np.float64))
