"""Named-specification files: one ``NAME := FORMULA`` per line, ``#`` comments."""

from __future__ import annotations

import re
from collections.abc import Iterable
from dataclasses import dataclass

from ..errors import LtlSyntaxError, UnknownProposition
from .formula import Formula
from .parser import parse_ltl
from .printer import to_text

_LINE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*:=\s*(.*)\Z")


@dataclass(frozen=True)
class NamedSpec:
    name: str
    formula: Formula

    def __iter__(self):
        # allows ``for name, phi in specs``
        return iter((self.name, self.formula))


def parse_spec_file(
    text: str,
    env_props: Iterable[str] | None = None,
    action_props: Iterable[str] | None = None,
) -> list[NamedSpec]:
    env = None if env_props is None else set(env_props)
    act = None if action_props is None else set(action_props)
    specs: list[NamedSpec] = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m:
            raise LtlSyntaxError("expected 'NAME := FORMULA'", len(line) - len(line.lstrip()), line=lineno)
        name, body = m.group(1), m.group(2)
        if name in seen:
            raise LtlSyntaxError(f"duplicate specification name {name!r}", m.start(1), line=lineno)
        seen.add(name)
        offset = m.start(2)
        try:
            phi = parse_ltl(body, env, act, line=lineno)
        except LtlSyntaxError as exc:
            raise LtlSyntaxError(exc.message, exc.position + offset, exc.expected, line=lineno) from None
        except UnknownProposition as exc:
            raise UnknownProposition(exc.name, (exc.position or 0) + offset, lineno) from None
        specs.append(NamedSpec(name, phi))
    return specs


def format_spec_file(specs: Iterable[NamedSpec | tuple[str, Formula]]) -> str:
    return "".join(f"{name} := {to_text(phi)}\n" for name, phi in specs)
