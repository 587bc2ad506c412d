"""LTL abstract syntax.

Formulas are immutable, hashable trees. ``Implies``, ``Eventually`` and
``Always`` are kept as first-class nodes so printing preserves what the author
wrote; :func:`desugar` rewrites them into the core operators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

PROP_NAME = re.compile(r"[a-z][a-z0-9_]*\Z")


class PropKind(str, Enum):
    ENVIRONMENT = "environment"
    ACTION = "action"


@dataclass(frozen=True)
class Proposition:
    name: str
    kind: PropKind = PropKind.ENVIRONMENT

    def __post_init__(self):
        if not PROP_NAME.match(self.name):
            raise ValueError(f"invalid proposition name {self.name!r}")


def canonical_name(phrase: str) -> str:
    """Turn a phrase like ``"green traffic light"`` into ``green_traffic_light``."""
    words = re.split(r"[\s\-]+", phrase.strip().lower())
    return "_".join(w for w in words if w)


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        from .printer import to_text

        return to_text(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class LTrue(Formula):
    pass


@dataclass(frozen=True)
class LFalse(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


TRUE = LTrue()
FALSE = LFalse()

UNARY = (Not, Next, Eventually, Always)
BINARY = (And, Or, Implies, Until)
TEMPORAL = (Next, Until, Eventually, Always)


def children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, UNARY):
        return (phi.operand,)
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    return ()


def subformulas(phi: Formula) -> list[Formula]:
    """Distinct subformulas in post-order (children before parents)."""
    seen: dict[Formula, None] = {}
    stack: list[tuple[Formula, bool]] = [(phi, False)]
    while stack:
        node, expanded = stack.pop()
        if node in seen:
            continue
        if expanded:
            seen[node] = None
            continue
        stack.append((node, True))
        for child in reversed(children(node)):
            if child not in seen:
                stack.append((child, False))
    return list(seen)


def atoms(phi: Formula) -> set[str]:
    return {f.name for f in subformulas(phi) if isinstance(f, Atom)}


def depth(phi: Formula) -> int:
    kids = children(phi)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


def is_boolean(phi: Formula) -> bool:
    """True if ``phi`` contains no temporal operator."""
    return not any(isinstance(f, TEMPORAL) for f in subformulas(phi))


def conj(*parts: Formula) -> Formula:
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*parts: Formula) -> Formula:
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def desugar(phi: Formula) -> Formula:
    """Rewrite into {Atom, True, Not, Or, Next, Until} only."""
    if isinstance(phi, (Atom, LTrue)):
        return phi
    if isinstance(phi, LFalse):
        return Not(TRUE)
    if isinstance(phi, Not):
        return Not(desugar(phi.operand))
    if isinstance(phi, Or):
        return Or(desugar(phi.left), desugar(phi.right))
    if isinstance(phi, And):
        return Not(Or(Not(desugar(phi.left)), Not(desugar(phi.right))))
    if isinstance(phi, Implies):
        return Or(Not(desugar(phi.left)), desugar(phi.right))
    if isinstance(phi, Next):
        return Next(desugar(phi.operand))
    if isinstance(phi, Until):
        return Until(desugar(phi.left), desugar(phi.right))
    if isinstance(phi, Eventually):
        return Until(TRUE, desugar(phi.operand))
    if isinstance(phi, Always):
        return Not(Until(TRUE, Not(desugar(phi.operand))))
    raise TypeError(f"not a formula: {phi!r}")


def eval_boolean(phi: Formula, letter: frozenset[str] | set[str]) -> bool:
    """Evaluate a temporal-free formula against one set of true propositions."""
    if isinstance(phi, Atom):
        return phi.name in letter
    if isinstance(phi, LTrue):
        return True
    if isinstance(phi, LFalse):
        return False
    if isinstance(phi, Not):
        return not eval_boolean(phi.operand, letter)
    if isinstance(phi, And):
        return eval_boolean(phi.left, letter) and eval_boolean(phi.right, letter)
    if isinstance(phi, Or):
        return eval_boolean(phi.left, letter) or eval_boolean(phi.right, letter)
    if isinstance(phi, Implies):
        return (not eval_boolean(phi.left, letter)) or eval_boolean(phi.right, letter)
    raise ValueError(f"temporal operator in boolean context: {phi}")
