"""Moment-matrix relaxations for Bell scenarios.

The hierarchy level fixes a set of monomials in party-local projectors;
expectation values of pairwise products form a positive semidefinite
moment matrix whose entries are identified by the projector algebra.
"""

from .words import LevelSpec, Monomial, ZERO, adjoint, canonicalize, monomial_basis, parse_level
from .moments import MomentStructure, compile_functional, moment_structure
from .assemble import bell_max_sdp, guessing_sdp
from .oracle import honest_moment_vector

__all__ = [
    "LevelSpec",
    "Monomial",
    "ZERO",
    "adjoint",
    "canonicalize",
    "monomial_basis",
    "parse_level",
    "MomentStructure",
    "compile_functional",
    "moment_structure",
    "bell_max_sdp",
    "guessing_sdp",
    "honest_moment_vector",
]
