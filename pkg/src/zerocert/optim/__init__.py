"""Small dense optimization kernels: LP, min-norm point, enclosing ball, convex minimization."""

from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LpSolution, solve_lp

__all__ = ["LinearProgram", "LpSolution", "solve_lp", "OPTIMAL", "INFEASIBLE", "UNBOUNDED"]
