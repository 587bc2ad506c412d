"""Synchronous product of a world model and a controller."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass, field

from .automata.controller import ControllerFsa, complete_controller
from .automata.model import TransitionSystem
from .errors import ExplosionGuard, PropMismatch

ProductState = tuple[str, str]
Label = frozenset

DEFAULT_PATH_BOUND = 200_000


def _fmt_label(label: Iterable[str]) -> str:
    return "{" + ", ".join(sorted(label)) + "}"


@dataclass(frozen=True)
class LabeledTrajectory:
    state_seq: tuple[ProductState, ...]
    label_seq: tuple[frozenset[str], ...]
    lasso_start: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "state_seq", tuple(self.state_seq))
        object.__setattr__(self, "label_seq", tuple(frozenset(x) for x in self.label_seq))
        if len(self.label_seq) != len(self.state_seq) - 1:
            raise ValueError("a trajectory needs exactly one label per step")
        if self.lasso_start is not None:
            if not 0 <= self.lasso_start < len(self.label_seq):
                raise ValueError("lasso start outside the trajectory")
            if self.state_seq[-1] != self.state_seq[self.lasso_start]:
                raise ValueError("a lasso must close on its loop-start state")

    @property
    def stem(self) -> tuple[frozenset[str], ...]:
        return self.label_seq[: self.lasso_start] if self.lasso_start is not None else self.label_seq

    @property
    def cycle(self) -> tuple[frozenset[str], ...]:
        return self.label_seq[self.lasso_start:] if self.lasso_start is not None else ()

    def steps(self) -> list[tuple[str, str, frozenset[str]]]:
        """``(p, q, label)`` triples, one per taken edge."""
        return [(p, q, lab) for (p, q), lab in zip(self.state_seq, self.label_seq)]

    def format(self) -> str:
        text = ", ".join(f"({p}, {q}, {_fmt_label(lab)})" for p, q, lab in self.steps())
        if self.lasso_start is not None:
            p, q = self.state_seq[self.lasso_start]
            text += f" -> loop to ({p}, {q})"
        return text

    def to_dict(self) -> dict:
        return {
            "states": [list(s) for s in self.state_seq],
            "labels": [sorted(x) for x in self.label_seq],
            "lasso_start": self.lasso_start,
        }


@dataclass(frozen=True)
class ProductAutomaton:
    model: TransitionSystem = field(repr=False)
    controller: ControllerFsa = field(repr=False)
    states: tuple[ProductState, ...]
    init_states: tuple[ProductState, ...]
    # (src, dst) -> every label witnessed on that edge
    edge_labels: dict[tuple[ProductState, ProductState], frozenset[frozenset[str]]] = field(repr=False)

    def __post_init__(self):
        succ: dict[ProductState, list[tuple[ProductState, frozenset[str]]]] = {s: [] for s in self.states}
        for (src, dst), labels in self.edge_labels.items():
            for lab in sorted(labels, key=sorted):
                succ[src].append((dst, lab))
        order = {s: i for i, s in enumerate(self.states)}
        object.__setattr__(
            self, "_succ", {s: tuple(sorted(v, key=lambda e: (order[e[0]], sorted(e[1])))) for s, v in succ.items()}
        )

    def successors(self, state: ProductState) -> tuple[tuple[ProductState, frozenset[str]], ...]:
        """Outgoing ``(dst, label)`` pairs, one per witnessed label."""
        return self._succ[state]

    @property
    def props(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.model.props + self.controller.output_props))

    def num_edges(self) -> int:
        return len(self.edge_labels)

    def deadlocks(self) -> list[ProductState]:
        return [s for s in self.states if not self._succ[s]]

    def to_text(self) -> str:
        names = [n for n in (self.model.name, self.controller.name) if n]
        lines = ["# product " + " x ".join(names)] if names else []
        lines.append("init " + " ".join(f"({p},{q})" for p, q in self.init_states))
        for s in self.states:
            for dst, lab in self._succ[s]:
                lines.append(f"({s[0]},{s[1]}) -> ({dst[0]},{dst[1]}) {_fmt_label(lab)}")
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        def node(s):
            return f'"{s[0]},{s[1]}"'

        out = ["digraph product {", "  rankdir=LR;"]
        for s in self.states:
            shape = "doublecircle" if s in self.init_states else "circle"
            out.append(f"  {node(s)} [shape={shape}];")
        for (src, dst), labels in sorted(self.edge_labels.items()):
            text = " | ".join(_fmt_label(x) for x in sorted(labels, key=sorted))
            out.append(f'  {node(src)} -> {node(dst)} [label="{text}"];')
        out.append("}")
        return "\n".join(out) + "\n"


def build_product(model: TransitionSystem, controller: ControllerFsa, *, complete: bool = True) -> ProductAutomaton:
    """Pair every model move with every enabled controller move.

    The controller reads the model label restricted to its inputs; the edge
    carries ``L(p) | a``. Model states without successors stutter so every
    path is infinite, and only states reachable from some ``(p, q_init)``
    are kept.
    """
    missing = controller.read_props() - set(model.props)
    if missing:
        raise PropMismatch(f"controller reads propositions the model lacks: {sorted(missing)}")
    if complete:
        controller = complete_controller(controller)
    inputs = frozenset(controller.input_props)
    init = tuple((p, controller.init) for p in model.states)
    seen = set(init)
    order = list(init)
    queue = deque(init)
    edges: dict[tuple[ProductState, ProductState], set[frozenset[str]]] = {}
    while queue:
        p, q = queue.popleft()
        lab_p = model.label(p)
        moves = model.successors(p) or (p,)
        for t in controller.enabled(q, lab_p & inputs):
            label = lab_p | t.output
            for p2 in moves:
                dst = (p2, t.dst)
                edges.setdefault(((p, q), dst), set()).add(label)
                if dst not in seen:
                    seen.add(dst)
                    order.append(dst)
                    queue.append(dst)
    return ProductAutomaton(
        model,
        controller,
        tuple(order),
        init,
        {k: frozenset(v) for k, v in edges.items()},
    )


def enumerate_labeled_paths(
    prod: ProductAutomaton,
    max_len: int,
    from_states: Iterable[ProductState] | None = None,
    bound: int = DEFAULT_PATH_BOUND,
) -> list[LabeledTrajectory]:
    """Every path of exactly ``max_len`` edges (shorter only at deadlocks)."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    starts = tuple(from_states) if from_states is not None else prod.init_states
    for s in starts:
        if s not in prod._succ:
            raise KeyError(f"{s} is not a product state")
    out: list[LabeledTrajectory] = []
    stack = [((s,), ()) for s in reversed(starts)]
    while stack:
        states, labels = stack.pop()
        succ = prod.successors(states[-1])
        if len(labels) == max_len or not succ:
            if labels:
                out.append(LabeledTrajectory(states, labels))
                if len(out) > bound:
                    raise ExplosionGuard(f"more than {bound} paths of length {max_len}")
            continue
        for dst, lab in reversed(succ):
            stack.append((states + (dst,), labels + (lab,)))
    return out


__all__ = [
    "LabeledTrajectory", "ProductAutomaton", "ProductState", "build_product", "enumerate_labeled_paths",
]
