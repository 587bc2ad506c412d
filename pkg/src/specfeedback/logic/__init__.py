from .formula import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    Implies,
    LFalse,
    LTrue,
    Next,
    Not,
    Or,
    Proposition,
    PropKind,
    Until,
    atoms,
    canonical_name,
    conj,
    depth,
    desugar,
    disj,
    eval_boolean,
    is_boolean,
    subformulas,
)
from .parser import parse_ltl
from .printer import to_text
from .semantics import FiniteTrace, TraceStep, eval_finite, eval_lasso, finite_truth, lasso_truth
from .specfile import NamedSpec, format_spec_file, parse_spec_file

__all__ = [
    "FALSE", "TRUE", "Always", "And", "Atom", "Eventually", "Formula", "Implies", "LFalse", "LTrue",
    "Next", "Not", "Or", "Proposition", "PropKind", "Until", "atoms", "canonical_name", "conj", "depth",
    "desugar", "disj", "eval_boolean", "is_boolean", "subformulas", "parse_ltl", "to_text", "FiniteTrace",
    "TraceStep", "eval_finite", "eval_lasso", "finite_truth", "lasso_truth", "NamedSpec",
    "format_spec_file", "parse_spec_file",
]
