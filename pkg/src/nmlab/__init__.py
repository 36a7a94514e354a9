"""Four-valued non-deterministic matrix semantics for informal provability, with modal cross-checks."""

from .formula import parse, parse_schema, to_text
from .nmatrix import Nmatrix, builtin_matrix, check_consequence, check_tautology, compose, refines

__version__ = "0.1.0"

__all__ = [
    "parse", "parse_schema", "to_text",
    "Nmatrix", "builtin_matrix", "check_consequence", "check_tautology", "compose", "refines",
]
