"""Numbered bracketed step lists and their translation into controllers.

Grammar, one step per line::

    N. <observe X> [<and> <check Y> ...].
    N. <if> <cond>, <act> [; <else> <act> | <else> <goto M> | <else> <wait>].
    N. <wait for> <cond>.
    N. <act>.

Conditions combine literals with ``and``/``or`` (``and`` binds tighter),
either inside one bracket or as ``<and>``/``<or>`` tokens; ``no X`` and
``not X`` negate.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from ..errors import EmptyStepList, StepSyntaxError, UnknownProposition
from ..logic import TRUE, And, Atom, Formula, LTrue, Not, Or, atoms, canonical_name, conj, disj
from .controller import ControllerFsa, Transition

OBSERVE_VERBS = ("observe", "check", "approach", "watch", "look at", "monitor")

_STEP_LINE = re.compile(r"\s*(\d+)\s*\.\s*(.*?)\s*\.?\s*\Z")
_TOKEN = re.compile(r"\s*(?:(<[^<>]*>)|([,;])|(\S))")


@dataclass(frozen=True)
class Observe:
    props: tuple[str, ...]
    verb: str = field(default="observe", compare=False)


@dataclass(frozen=True)
class Act:
    action: str


@dataclass(frozen=True)
class Wait:
    """Stay in place; ``action`` is emitted while waiting (None means no-op)."""

    action: str | None = None


@dataclass(frozen=True)
class Goto:
    step: int
    action: str | None = None


@dataclass(frozen=True)
class Conditional:
    condition: Formula
    action: str | Observe | None
    otherwise: Wait | Goto = Wait()


Step = Observe | Act | Conditional


@dataclass(frozen=True)
class StepList:
    steps: tuple[Step, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise EmptyStepList("a step list needs at least one step")
        for s in self.steps:
            if isinstance(s, Conditional) and isinstance(s.otherwise, Goto):
                if not 1 <= s.otherwise.step <= len(self.steps):
                    raise ValueError(f"goto target {s.otherwise.step} does not exist")

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]


class _Resolver:
    def __init__(self, env: Sequence[str], actions: Sequence[str]):
        self.env = tuple(env)
        self.actions = tuple(actions)

    def action(self, text: str, lineno: int) -> str:
        name = canonical_name(text)
        if name not in self.actions:
            raise UnknownProposition(name, line=lineno)
        return name

    def observed(self, text: str, lineno: int) -> tuple[str, ...]:
        name = canonical_name(re.sub(r"^the\s+", "", text.strip(), flags=re.I))
        if name in self.env:
            return (name,)
        want = name.split("_")
        hits = tuple(p for p in self.env if _is_subsequence(want, p.split("_")))
        if not hits:
            raise UnknownProposition(name, line=lineno)
        return hits

    def condition(self, text: str, lineno: int) -> Formula:
        ors = []
        for disjunct in re.split(r"\s+or\s+", text.strip()):
            ands = []
            for lit in re.split(r"\s+and\s+", disjunct.strip()):
                ands.append(self._literal(lit, lineno))
            ors.append(conj(*ands))
        return disj(*ors)

    def _literal(self, text: str, lineno: int) -> Formula:
        words = text.strip().lower().split()
        negated = False
        while words and words[0] in ("no", "not"):
            negated = not negated
            words = words[1:]
        if not words:
            raise StepSyntaxError("empty condition", lineno)
        if words == ["true"]:
            phi: Formula = TRUE
        else:
            name = canonical_name(" ".join(words))
            if name not in self.env:
                raise UnknownProposition(name, line=lineno)
            phi = Atom(name)
        return Not(phi) if negated else phi


def _is_subsequence(needle: list[str], hay: list[str]) -> bool:
    it = iter(hay)
    return all(any(w == h for h in it) for w in needle)


def _observe_target(inner: str) -> tuple[str, str] | None:
    low = inner.strip().lower()
    for verb in OBSERVE_VERBS:
        if low == verb or low.startswith(verb + " "):
            return verb, inner.strip()[len(verb):].strip()
    return None


def _tokens(body: str, lineno: int, col0: int) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while pos < len(body):
        m = _TOKEN.match(body, pos)
        if m is None:
            break
        if m.group(3) is not None:
            what = "unclosed '<'" if m.group(3) == "<" else f"unexpected character {m.group(3)!r}"
            raise StepSyntaxError(what, lineno, col0 + m.start(3))
        tok = m.group(1) or m.group(2)
        out.append((tok, col0 + m.start(1 if m.group(1) else 2)))
        pos = m.end()
    return out


def _inner(tok: str) -> str:
    return tok[1:-1].strip()


class _LineParser:
    def __init__(self, tokens, lineno, resolver: _Resolver):
        self.toks = tokens
        self.i = 0
        self.lineno = lineno
        self.r = resolver
        self.last_col = 0
        self.goto_col: int | None = None

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def col(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else (self.toks[-1][1] + len(self.toks[-1][0]) if self.toks else 0)

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise StepSyntaxError("unexpected end of step", self.lineno, self.col())
        self.i += 1
        return tok

    def expect_bracket(self, what: str) -> str:
        tok = self.peek()
        if tok is None or not tok.startswith("<"):
            raise StepSyntaxError(f"expected {what}", self.lineno, self.col())
        self.last_col = self.col()
        self.i += 1
        return _inner(tok)

    def resolve(self, fn, text: str, col: int):
        """Run a resolver call, attaching ``col`` to any error it raises."""
        try:
            return fn(text, self.lineno)
        except UnknownProposition as exc:
            raise UnknownProposition(exc.name, col, self.lineno) from None
        except StepSyntaxError as exc:
            if exc.column is not None:
                raise
            raise StepSyntaxError(str(exc).split(": ", 1)[-1], self.lineno, col) from None

    def done(self):
        if self.peek() is not None:
            raise StepSyntaxError(f"unexpected {self.peek()!r}", self.lineno, self.col())

    def step(self) -> Step:
        head = self.peek()
        if head is None:
            raise StepSyntaxError("empty step", self.lineno, self.col())
        key = _inner(head).lower() if head.startswith("<") else ""
        if key == "if":
            self.i += 1
            return self._conditional()
        if key in ("wait for", "wait until"):
            self.i += 1
            cond = self._condition()
            self.done()
            return Conditional(cond, None)
        return self._plain()

    def _condition(self) -> Formula:
        parts = [self.expect_bracket("a condition")]
        col = self.last_col
        while self.peek() is not None and self.peek().startswith("<") and _inner(self.peek()).lower() in ("and", "or"):
            parts.append(_inner(self.take()).lower())
            parts.append(self.expect_bracket("a condition"))
        return self.resolve(self.r.condition, " ".join(parts), col)

    def _effect(self) -> str | Observe | None:
        text = self.expect_bracket("an action")
        if text.lower() in ("wait", "do nothing"):
            return None
        col = self.last_col
        obs = _observe_target(text)
        if obs is not None:
            props = list(self.resolve(self.r.observed, obs[1], col))
            while self.peek() is not None and _inner(self.peek()).lower() == "and":
                self.i += 1
                more = _observe_target(self.expect_bracket("an observation"))
                if more is None:
                    raise StepSyntaxError("only observations can be joined with <and>", self.lineno, self.last_col)
                props.extend(p for p in self.resolve(self.r.observed, more[1], self.last_col) if p not in props)
            return Observe(tuple(props), obs[0])
        return self.resolve(self.r.action, text, col)

    def _conditional(self) -> Conditional:
        cond = self._condition()
        if self.peek() != ",":
            raise StepSyntaxError("expected ',' after the condition", self.lineno, self.col())
        self.i += 1
        effect = self._effect()
        otherwise: Wait | Goto = Wait()
        if self.peek() == ";":
            self.i += 1
            if self.expect_bracket("<else>").lower() != "else":
                raise StepSyntaxError("expected <else>", self.lineno, self.toks[self.i - 1][1])
            text = self.expect_bracket("an else branch")
            m = re.fullmatch(r"(?:goto|go to step|go to)\s+(\d+)", text.strip().lower())
            if m:
                otherwise = Goto(int(m.group(1)))
                self.goto_col = self.last_col
            elif text.lower() in ("wait", "do nothing"):
                otherwise = Wait()
            else:
                otherwise = Wait(self.resolve(self.r.action, text, self.last_col))
        self.done()
        return Conditional(cond, effect, otherwise)

    def _plain(self) -> Step:
        effect = self._effect()
        self.done()
        if effect is None:
            return Conditional(TRUE, None)
        if isinstance(effect, Observe):
            return effect
        return Act(effect)


def parse_steps(text: str, env_props: Iterable[str], action_props: Iterable[str]) -> StepList:
    resolver = _Resolver(tuple(env_props), tuple(action_props))
    steps: list[Step] = []
    gotos: list[tuple[int, int | None]] = []
    expected = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        m = _STEP_LINE.match(raw)
        if not m:
            raise StepSyntaxError("expected a numbered step like '1. <...>.'", lineno, len(raw) - len(raw.lstrip()))
        if int(m.group(1)) != expected:
            raise StepSyntaxError(f"expected step number {expected}, got {m.group(1)}", lineno, m.start(1))
        expected += 1
        toks = _tokens(m.group(2), lineno, m.start(2))
        parser = _LineParser(toks, lineno, resolver)
        steps.append(parser.step())
        gotos.append((lineno, parser.goto_col))
    if not steps:
        raise EmptyStepList("no steps found")
    for s, (lineno, col) in zip(steps, gotos):
        if isinstance(s, Conditional) and isinstance(s.otherwise, Goto) and not 1 <= s.otherwise.step <= len(steps):
            raise StepSyntaxError(f"goto target {s.otherwise.step} does not exist", lineno, col)
    return StepList(tuple(steps))


def _phrase(name: str) -> str:
    return name.replace("_", " ")


def _flatten(phi: Formula, op: type) -> list[Formula]:
    # parse_steps builds left-nested chains
    out = []
    while isinstance(phi, op):
        out.append(phi.right)
        phi = phi.left
    out.append(phi)
    return out[::-1]


def _literal_text(phi: Formula) -> str:
    neg = isinstance(phi, Not)
    base = phi.operand if neg else phi
    if isinstance(base, LTrue):
        text = "true"
    elif isinstance(base, Atom):
        text = _phrase(base.name)
    else:
        raise ValueError("step conditions are and/or combinations of literals")
    return "no " + text if neg else text


def _condition_text(phi: Formula) -> str:
    return " or ".join(
        " and ".join(_literal_text(lit) for lit in _flatten(d, And)) for d in _flatten(phi, Or)
    )


def _effect_text(effect) -> str:
    if effect is None:
        return "<wait>"
    if isinstance(effect, Observe):
        verb = effect.verb if effect.verb in OBSERVE_VERBS else "observe"
        first, *rest = effect.props
        return " <and> ".join([f"<{verb} {_phrase(first)}>"] + [f"<check {_phrase(p)}>" for p in rest])
    return f"<{_phrase(effect)}>"


def format_steps(steps: StepList | Sequence[Step]) -> str:
    """Render steps in the bracketed syntax accepted by ``parse_steps``."""
    lines = []
    for k, step in enumerate(steps, start=1):
        if isinstance(step, Observe):
            body = _effect_text(step)
        elif isinstance(step, Act):
            body = _effect_text(step.action)
        elif step.condition == TRUE and step.action is None and step.otherwise == Wait():
            body = "<wait>"
        elif step.action is None and step.otherwise == Wait():
            body = f"<wait for> <{_condition_text(step.condition)}>"
        else:
            body = f"<if> <{_condition_text(step.condition)}>, {_effect_text(step.action)}"
            other = step.otherwise
            if isinstance(other, Goto):
                body += f"; <else> <goto {other.step}>"
            elif other.action is not None:
                body += f"; <else> <{_phrase(other.action)}>"
        lines.append(f"{k}. {body}.")
    return "\n".join(lines) + "\n"


def _negate(phi: Formula) -> Formula:
    return phi.operand if isinstance(phi, Not) else Not(phi)


def _emits(effect) -> frozenset[str]:
    return frozenset([effect]) if isinstance(effect, str) else frozenset()


def steps_to_controller(
    steps: StepList | Sequence[Step],
    action_props: Iterable[str] | None = None,
    name: str = "",
) -> ControllerFsa:
    """One state per step plus a terminal idle state; step 1 is initial."""
    if not isinstance(steps, StepList):
        steps = StepList(tuple(steps))
    n = len(steps)
    states = tuple(f"q{i}" for i in range(n + 1))
    trans: list[Transition] = []
    observed: list[str] = []
    actions: list[str] = []

    def note_effect(effect):
        if isinstance(effect, Observe):
            observed.extend(effect.props)
        elif isinstance(effect, str):
            actions.append(effect)

    for i, step in enumerate(steps):
        here, nxt = states[i], states[i + 1]
        if isinstance(step, Observe):
            note_effect(step)
            trans.append(Transition(here, TRUE, frozenset(), nxt, note=f"{step.verb} {' '.join(step.props)}"))
        elif isinstance(step, Act):
            note_effect(step.action)
            trans.append(Transition(here, TRUE, frozenset([step.action]), nxt))
        else:
            note_effect(step.action)
            trans.append(Transition(here, step.condition, _emits(step.action), nxt))
            if step.condition == TRUE:
                continue
            other = step.otherwise
            target = states[other.step - 1] if isinstance(other, Goto) else here
            if other.action:
                actions.append(other.action)
            trans.append(Transition(here, _negate(step.condition), _emits(other.action), target, note="else"))
    trans.append(Transition(states[-1], TRUE, frozenset(), states[-1], note="done"))

    guard_props: list[str] = []
    for t in trans:
        guard_props.extend(sorted(atoms(t.guard)))
    inputs = tuple(dict.fromkeys(guard_props + observed))
    outputs = tuple(action_props) if action_props is not None else tuple(dict.fromkeys(actions))
    return ControllerFsa(inputs, outputs, states, states[0], tuple(trans), name=name)


__all__ = [
    "Act", "Conditional", "Goto", "Observe", "Step", "StepList", "Wait", "OBSERVE_VERBS",
    "format_steps", "parse_steps", "steps_to_controller",
]
