"""Trace semantics: LTLf on finite traces, standard LTL on lasso words.

Both evaluators compute, bottom-up, the set of positions where every
subformula holds. Position sets are Python ints used as bit vectors.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .formula import (
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
    Until,
    subformulas,
)

Letter = frozenset


@dataclass(frozen=True)
class TraceStep:
    observations: frozenset[str] = frozenset()
    actions: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "observations", frozenset(self.observations))
        object.__setattr__(self, "actions", frozenset(self.actions))

    @property
    def letter(self) -> frozenset[str]:
        return self.observations | self.actions


@dataclass(frozen=True)
class FiniteTrace:
    steps: tuple[TraceStep, ...]
    max_length: int | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError("a trace needs at least one step")
        if self.max_length is not None and len(self.steps) > self.max_length:
            raise ValueError(f"trace longer than {self.max_length} steps")

    def __len__(self) -> int:
        return len(self.steps)

    @classmethod
    def from_letters(cls, letters: Iterable[Iterable[str]], actions: Iterable[str] = ()) -> FiniteTrace:
        """Build a trace from plain proposition sets, routing ``actions`` names to the action side."""
        acts = set(actions)
        steps = []
        for letter in letters:
            letter = set(letter)
            steps.append(TraceStep(frozenset(letter - acts), frozenset(letter & acts)))
        return cls(tuple(steps))

    def letters(self) -> list[frozenset[str]]:
        return [s.letter for s in self.steps]


def _truth_table(phi: Formula, letters: Sequence[frozenset[str]], succ_shift, n: int) -> dict[Formula, int]:
    full = (1 << n) - 1
    val: dict[Formula, int] = {}
    for f in subformulas(phi):
        if isinstance(f, Atom):
            v = 0
            for i, letter in enumerate(letters):
                if f.name in letter:
                    v |= 1 << i
        elif isinstance(f, LTrue):
            v = full
        elif isinstance(f, LFalse):
            v = 0
        elif isinstance(f, Not):
            v = full & ~val[f.operand]
        elif isinstance(f, And):
            v = val[f.left] & val[f.right]
        elif isinstance(f, Or):
            v = val[f.left] | val[f.right]
        elif isinstance(f, Implies):
            v = (full & ~val[f.left]) | val[f.right]
        elif isinstance(f, Next):
            v = succ_shift(val[f.operand])
        elif isinstance(f, Until):
            a, b = val[f.left], val[f.right]
            v = b
            while True:
                nv = b | (a & succ_shift(v))
                if nv == v:
                    break
                v = nv
        elif isinstance(f, Eventually):
            a = val[f.operand]
            v = a
            while True:
                nv = a | succ_shift(v)
                if nv == v:
                    break
                v = nv
        elif isinstance(f, Always):
            a = val[f.operand]
            v = a
            while True:
                nv = a & succ_shift(v, weak=True)
                if nv == v:
                    break
                v = nv
        else:
            raise TypeError(f"not a formula: {f!r}")
        val[f] = v
    return val


def finite_truth(phi: Formula, letters: Sequence[frozenset[str]]) -> int:
    """Bit ``i`` of the result is set iff ``phi`` holds at position ``i`` (LTLf)."""
    n = len(letters)
    last = 1 << (n - 1)

    def shift(v: int, weak: bool = False) -> int:
        # strong next: position n-1 has no successor
        out = v >> 1
        return out | last if weak else out

    return _truth_table(phi, letters, shift, n)[phi]


def eval_finite(phi: Formula, trace: FiniteTrace | Sequence[Iterable[str]], position: int = 0) -> bool:
    letters = trace.letters() if isinstance(trace, FiniteTrace) else [frozenset(x) for x in trace]
    if not 0 <= position < len(letters):
        raise IndexError(f"position {position} outside trace of length {len(letters)}")
    return bool(finite_truth(phi, letters) >> position & 1)


def lasso_truth(phi: Formula, stem: Sequence[frozenset[str]], cycle: Sequence[frozenset[str]]) -> int:
    """Truth vector of ``phi`` over the positions of the word ``stem · cycle^ω``."""
    if not cycle:
        raise ValueError("lasso cycle must be non-empty")
    letters = [frozenset(x) for x in stem] + [frozenset(x) for x in cycle]
    n = len(letters)
    loop = len(stem)
    mask = (1 << (n - 1)) - 1

    def shift(v: int, weak: bool = False) -> int:
        out = (v >> 1) & mask
        if v >> loop & 1:
            out |= 1 << (n - 1)
        return out

    return _truth_table(phi, letters, shift, n)[phi]


def eval_lasso(phi: Formula, stem: Sequence[Iterable[str]], cycle: Sequence[Iterable[str]]) -> bool:
    """Does the infinite word ``stem · cycle^ω`` satisfy ``phi``?"""
    return bool(lasso_truth(phi, [frozenset(x) for x in stem], [frozenset(x) for x in cycle]) & 1)
