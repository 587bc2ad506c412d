"""Transition-system world models."""

from __future__ import annotations

import itertools
import json
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field

from ..errors import DuplicateState, TooManyProps, UnknownProposition
from ..logic import Formula, atoms, is_boolean, parse_ltl, to_text

MAX_MODEL_PROPS = 20

Label = frozenset


@dataclass(frozen=True)
class TransitionSystem:
    props: tuple[str, ...]
    states: tuple[str, ...]
    labels: Mapping[str, frozenset[str]]
    transitions: frozenset[tuple[str, str]]
    # documentation only: when the environment takes an edge
    guards: Mapping[tuple[str, str], Formula] = field(default_factory=dict, compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        known = set(self.states)
        for s in self.states:
            extra = set(self.labels[s]) - set(self.props)
            if extra:
                raise UnknownProposition(sorted(extra)[0])
        for src, dst in self.transitions:
            if src not in known or dst not in known:
                raise ValueError(f"transition {src}->{dst} references an unknown state")
        succ: dict[str, list[str]] = {s: [] for s in self.states}
        order = {s: i for i, s in enumerate(self.states)}
        for src, dst in sorted(self.transitions, key=lambda e: (order[e[0]], order[e[1]])):
            succ[src].append(dst)
        object.__setattr__(self, "_succ", {s: tuple(v) for s, v in succ.items()})

    def successors(self, state: str) -> tuple[str, ...]:
        return self._succ[state]

    def label(self, state: str) -> frozenset[str]:
        return self.labels[state]

    def deadlocks(self) -> list[str]:
        return [s for s in self.states if not self._succ[s]]

    def to_dict(self) -> dict:
        edges = []
        order = {s: i for i, s in enumerate(self.states)}
        for src, dst in sorted(self.transitions, key=lambda e: (order[e[0]], order[e[1]])):
            guard = self.guards.get((src, dst))
            edges.append({"src": src, "guard": to_text(guard) if guard is not None else "true", "dst": dst})
        return {
            "name": self.name,
            "props": list(self.props),
            "states": [{"name": s, "label": sorted(self.labels[s])} for s in self.states],
            "edges": edges,
        }


TransitionPredicate = Callable[[frozenset, frozenset], bool]


def _as_predicate(predicate) -> TransitionPredicate:
    if callable(predicate):
        return predicate
    allowed = {(frozenset(a), frozenset(b)) for a, b in predicate}
    return lambda a, b: (a, b) in allowed


def build_model(props: Iterable[str], predicate, prune: bool = True, name: str = "") -> TransitionSystem:
    """One state per subset of ``props``; an edge wherever ``predicate`` allows it.

    ``predicate`` is either ``f(label_from, label_to) -> bool`` or an iterable
    of allowed ``(label_from, label_to)`` pairs. With ``prune`` set, states
    without any incoming or outgoing edge are dropped.
    """
    props = tuple(dict.fromkeys(props))
    if len(props) > MAX_MODEL_PROPS:
        raise TooManyProps(f"{len(props)} propositions exceed the limit of {MAX_MODEL_PROPS}")
    allow = _as_predicate(predicate)
    states = []
    labels = {}
    for bits in range(2 ** len(props)):
        label = frozenset(p for i, p in enumerate(props) if bits >> i & 1)
        state = f"p{bits}"
        states.append(state)
        labels[state] = label
    transitions = {
        (a, b) for a, b in itertools.product(states, repeat=2) if allow(labels[a], labels[b])
    }
    if prune:
        touched = {s for edge in transitions for s in edge}
        states = [s for s in states if s in touched]
        labels = {s: labels[s] for s in states}
    return TransitionSystem(props, tuple(states), labels, frozenset(transitions), name=name)


def _parse_guard(guard, props: set[str]) -> Formula:
    phi = parse_ltl(guard, props) if isinstance(guard, str) else guard
    unknown = atoms(phi) - props
    if unknown:
        raise UnknownProposition(sorted(unknown)[0])
    if not is_boolean(phi):
        raise ValueError(f"edge guard must be temporal-free: {to_text(phi)}")
    return phi


def model_from_edges(
    props: Iterable[str],
    named_states: Iterable[tuple[str, Iterable[str]]],
    edges: Iterable[tuple[str, str | Formula, str]],
    name: str = "",
) -> TransitionSystem:
    props = tuple(dict.fromkeys(props))
    pset = set(props)
    states: list[str] = []
    labels: dict[str, frozenset[str]] = {}
    for state, label in named_states:
        if state in labels:
            raise DuplicateState(state)
        label = frozenset(label)
        for p in sorted(label - pset):
            raise UnknownProposition(p)
        states.append(state)
        labels[state] = label
    transitions = set()
    guards = {}
    for src, guard, dst in edges:
        for s in (src, dst):
            if s not in labels:
                raise ValueError(f"edge references unknown state {s!r}")
        transitions.add((src, dst))
        guards[(src, dst)] = _parse_guard(guard, pset)
    return TransitionSystem(props, tuple(states), labels, frozenset(transitions), guards, name)


def model_from_dict(data: dict) -> TransitionSystem:
    return model_from_edges(
        data["props"],
        [(s["name"], s.get("label", [])) for s in data["states"]],
        [(e["src"], e.get("guard", "true"), e["dst"]) for e in data.get("edges", [])],
        name=data.get("name", ""),
    )


def load_model(path) -> TransitionSystem:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def dump_model(model: TransitionSystem) -> str:
    return json.dumps(model.to_dict(), indent=2) + "\n"


def with_props(model: TransitionSystem, props) -> TransitionSystem:
    """Same system over a larger proposition set; the new ones are never true."""
    extra = tuple(p for p in dict.fromkeys(props) if p not in model.props)
    if not extra:
        return model
    return TransitionSystem(
        model.props + extra, model.states, model.labels, model.transitions, model.guards, model.name
    )
