"""Block-diagonal semidefinite programming with certified dual bounds."""

from .problem import BlockSpec, SDPProblem
from .solver import Solution, SolverSettings, solve
from .certificate import dual_certificate_check
from .sdpa import read_sdpa, write_sdpa

__all__ = [
    "BlockSpec",
    "SDPProblem",
    "Solution",
    "SolverSettings",
    "solve",
    "dual_certificate_check",
    "read_sdpa",
    "write_sdpa",
]
