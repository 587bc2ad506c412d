"""Recursive-descent parser for the ASCII LTL syntax.

Precedence, tightest first: unary (``!``, ``X``, ``F``, ``G``), ``U``, ``&``,
``|``, ``->``. ``U`` and ``->`` associate to the right, ``&`` and ``|`` to the
left. The unicode operators ¬ ∧ ∨ → □ ◇ ○ are accepted too.
"""

from __future__ import annotations

import re
from collections.abc import Iterable
from dataclasses import dataclass

from ..errors import LtlSyntaxError, UnknownProposition
from .formula import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Until,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->|→|=>)
  | (?P<and>&&|&|∧)
  | (?P<or>\|\||\||∨)
  | (?P<not>!|~|¬)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<always>□)
  | (?P<eventually>◇)
  | (?P<next>○)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"X": "next", "F": "eventually", "G": "always", "U": "until", "true": "true", "false": "false"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str, line: int | None = None) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LtlSyntaxError(f"unexpected character {text[pos]!r}", pos, line=line)
        kind = m.lastgroup
        if kind == "word":
            word = m.group()
            if word in _KEYWORDS:
                kind = _KEYWORDS[word]
            elif word[0].isupper():
                raise LtlSyntaxError(f"unknown operator {word!r}", pos, "proposition or operator", line=line)
            else:
                kind = "ident"
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, known: set[str] | None, line: int | None):
        self.tokens = tokenize(text, line)
        self.i = 0
        self.known = known
        self.line = line

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: str) -> LtlSyntaxError:
        tok = self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return LtlSyntaxError(f"unexpected {found}", tok.pos, expected, line=self.line)

    def parse(self) -> Formula:
        phi = self.implication()
        if self.peek().kind != "eof":
            raise self.fail("operator or end of input")
        return phi

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "arrow":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek().kind == "or":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.until()
        while self.peek().kind == "and":
            self.take()
            left = And(left, self.until())
        return left

    def until(self) -> Formula:
        left = self.unary()
        if self.peek().kind == "until":
            self.take()
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        kind = self.peek().kind
        if kind == "not":
            self.take()
            return Not(self.unary())
        if kind == "next":
            self.take()
            return Next(self.unary())
        if kind == "eventually":
            self.take()
            return Eventually(self.unary())
        if kind == "always":
            self.take()
            return Always(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "true":
            self.take()
            return TRUE
        if tok.kind == "false":
            self.take()
            return FALSE
        if tok.kind == "ident":
            self.take()
            if self.known is not None and tok.text not in self.known:
                raise UnknownProposition(tok.text, tok.pos, self.line)
            return Atom(tok.text)
        if tok.kind == "lparen":
            self.take()
            inner = self.implication()
            if self.peek().kind != "rparen":
                raise self.fail("')'")
            self.take()
            return inner
        raise self.fail("proposition, constant, unary operator or '('")


def parse_ltl(
    text: str,
    env_props: Iterable[str] | None = None,
    action_props: Iterable[str] | None = None,
    *,
    line: int | None = None,
) -> Formula:
    """Parse ``text`` into a formula.

    When either proposition set is given, every atom must belong to their
    union; pass neither to accept any well-formed name.
    """
    if not text or not text.strip():
        raise LtlSyntaxError("empty formula", 0, "formula", line=line)
    known = None
    if env_props is not None or action_props is not None:
        env = set(env_props or ())
        act = set(action_props or ())
        overlap = env & act
        if overlap:
            raise ValueError(f"environment and action propositions overlap: {sorted(overlap)}")
        known = env | act
    return _Parser(text, known, line).parse()
