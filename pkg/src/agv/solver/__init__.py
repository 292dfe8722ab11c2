"""Self-contained SMT solver for linear integer/real arithmetic.

Speaks SMT-LIB v2 over stdin/stdout when run as `agv-smt` (see main.py).
All arithmetic is exact rational; there is no floating point anywhere.
"""

from agv.solver.core import Solver, SolverResult

__all__ = ["Solver", "SolverResult"]
