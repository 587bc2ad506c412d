"""Mealy-style controller automata with guarded transitions."""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass, field

from ..errors import UnknownProposition
from ..logic import TRUE, Formula, Not, atoms, disj, eval_boolean, is_boolean, parse_ltl, to_text

# exhaustive guard-coverage checks enumerate 2^n inputs
MAX_ENUMERATED_INPUTS = 20


@dataclass(frozen=True)
class Transition:
    src: str
    guard: Formula
    output: frozenset[str]  # empty set is the no-op symbol
    dst: str
    note: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "output", frozenset(self.output))

    @property
    def is_noop(self) -> bool:
        return not self.output

    def describe(self) -> str:
        out = ", ".join(sorted(self.output)) if self.output else "eps"
        return f"{self.src} --({to_text(self.guard)}, {out})--> {self.dst}"


@dataclass(frozen=True)
class ControllerFsa:
    input_props: tuple[str, ...]
    output_props: tuple[str, ...]
    states: tuple[str, ...]
    init: str
    transitions: tuple[Transition, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "input_props", tuple(self.input_props))
        object.__setattr__(self, "output_props", tuple(self.output_props))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if self.init not in self.states:
            raise ValueError(f"initial state {self.init!r} is not a state")
        known_in, known_out = set(self.input_props), set(self.output_props)
        by_state: dict[str, list[Transition]] = {q: [] for q in self.states}
        for t in self.transitions:
            if t.src not in by_state or t.dst not in by_state:
                raise ValueError(f"transition {t.describe()} references an unknown state")
            for p in sorted(atoms(t.guard) - known_in):
                raise UnknownProposition(p)
            for a in sorted(t.output - known_out):
                raise UnknownProposition(a)
            if not is_boolean(t.guard):
                raise ValueError(f"guard must be temporal-free: {to_text(t.guard)}")
            by_state[t.src].append(t)
        object.__setattr__(self, "_out", {q: tuple(v) for q, v in by_state.items()})

    def outgoing(self, state: str) -> tuple[Transition, ...]:
        return self._out[state]

    def read_props(self) -> set[str]:
        """Propositions the guards actually look at."""
        out: set[str] = set()
        for t in self.transitions:
            out |= atoms(t.guard)
        return out

    def enabled(self, state: str, observation: Iterable[str]) -> list[Transition]:
        sigma = frozenset(observation) & frozenset(self.input_props)
        return [t for t in self._out[state] if eval_boolean(t.guard, sigma)]

    def first_enabled(self, state: str, observation: Iterable[str]) -> Transition | None:
        sigma = frozenset(observation) & frozenset(self.input_props)
        for t in self._out[state]:
            if eval_boolean(t.guard, sigma):
                return t
        return None

    def is_idle_sink(self, state: str) -> bool:
        """Every transition out of ``state`` is a no-op self-loop."""
        out = self._out[state]
        return all(t.dst == state and t.is_noop for t in out)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "input_props": list(self.input_props),
            "output_props": list(self.output_props),
            "init": self.init,
            "states": list(self.states),
            "transitions": [
                {"src": t.src, "guard": to_text(t.guard), "output": sorted(t.output), "dst": t.dst}
                | ({"note": t.note} if t.note else {})
                for t in self.transitions
            ],
        }


def _input_space(props: tuple[str, ...]):
    for bits in range(2 ** len(props)):
        yield frozenset(p for i, p in enumerate(props) if bits >> i & 1)


def uncovered_inputs(controller: ControllerFsa, state: str) -> list[frozenset[str]]:
    props = tuple(sorted(controller.read_props()))
    if len(props) > MAX_ENUMERATED_INPUTS:
        raise ValueError(f"too many guard propositions to enumerate ({len(props)})")
    guards = [t.guard for t in controller.outgoing(state)]
    return [s for s in _input_space(props) if not any(eval_boolean(g, s) for g in guards)]


def is_input_enabled(controller: ControllerFsa) -> bool:
    return all(not uncovered_inputs(controller, q) for q in controller.states)


def complete_controller(controller: ControllerFsa) -> ControllerFsa:
    """Add an ``otherwise`` no-op self-loop wherever some input enables nothing."""
    extra = []
    for q in controller.states:
        if not uncovered_inputs(controller, q):
            continue
        guards = [t.guard for t in controller.outgoing(q)]
        if not guards:
            otherwise = TRUE
        elif len(guards) == 1:
            otherwise = Not(guards[0])
        else:
            otherwise = Not(disj(*guards))
        extra.append(Transition(q, otherwise, frozenset(), q, note="otherwise"))
    if not extra:
        return controller
    return ControllerFsa(
        controller.input_props,
        controller.output_props,
        controller.states,
        controller.init,
        controller.transitions + tuple(extra),
        name=controller.name,
    )


def controller_from_dict(data: dict) -> ControllerFsa:
    inputs = tuple(data["input_props"])
    transitions = []
    for t in data.get("transitions", []):
        guard = t.get("guard", "true")
        guard = parse_ltl(guard, inputs) if isinstance(guard, str) else guard
        transitions.append(Transition(t["src"], guard, frozenset(t.get("output", [])), t["dst"], t.get("note", "")))
    return ControllerFsa(
        inputs,
        tuple(data["output_props"]),
        tuple(data["states"]),
        data["init"],
        tuple(transitions),
        name=data.get("name", ""),
    )


def load_controller(path) -> ControllerFsa:
    with open(path, encoding="utf-8") as fh:
        return controller_from_dict(json.load(fh))


def dump_controller(controller: ControllerFsa) -> str:
    return json.dumps(controller.to_dict(), indent=2) + "\n"


def equivalent_guards(a: Formula, b: Formula, props: Iterable[str]) -> bool:
    props = tuple(sorted(set(props) | atoms(a) | atoms(b)))
    return all(eval_boolean(a, s) == eval_boolean(b, s) for s in _input_space(props))


def same_behaviour(c1: ControllerFsa, c2: ControllerFsa) -> bool:
    """Structural match up to guard equivalence and transition order."""
    if (c1.states, c1.init) != (c2.states, c2.init) or len(c1.transitions) != len(c2.transitions):
        return False
    props = c1.read_props() | c2.read_props()
    remaining = list(c2.transitions)
    for t in c1.transitions:
        for i, u in enumerate(remaining):
            if (t.src, t.output, t.dst) == (u.src, u.output, u.dst) and equivalent_guards(t.guard, u.guard, props):
                del remaining[i]
                break
        else:
            return False
    return True


__all__ = [
    "ControllerFsa", "Transition", "complete_controller", "controller_from_dict", "dump_controller",
    "equivalent_guards", "is_input_enabled", "load_controller", "same_behaviour", "uncovered_inputs",
]

