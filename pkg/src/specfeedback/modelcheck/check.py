"""Emptiness checking of product x Büchi(not phi) by nested depth-first search."""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..logic import Formula, Not, to_text
from ..product import LabeledTrajectory, ProductAutomaton
from .buchi import BuchiAutomaton, ltl_to_buchi

# search colours
_CYAN, _BLUE, _RED = 1, 2, 3


@dataclass(frozen=True)
class Verdict:
    spec_name: str
    holds: bool
    counterexample: LabeledTrajectory | None = None
    formula: Formula | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.holds and self.counterexample is None:
            raise ValueError("a failing verdict needs a counterexample")


@dataclass(frozen=True)
class VerificationReport:
    controller_id: str
    verdicts: tuple[Verdict, ...]

    def __post_init__(self):
        object.__setattr__(self, "verdicts", tuple(self.verdicts))

    @property
    def satisfied_count(self) -> int:
        return sum(v.holds for v in self.verdicts)

    @property
    def total(self) -> int:
        return len(self.verdicts)

    @property
    def failed(self) -> list[str]:
        return [v.spec_name for v in self.verdicts if not v.holds]

    def __getitem__(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.spec_name == name:
                return v
        raise KeyError(name)

    def records(self) -> list[dict]:
        out = []
        for v in self.verdicts:
            rec = {
                "controller_id": self.controller_id,
                "spec": v.spec_name,
                "verdict": "pass" if v.holds else "fail",
                "counterexample": None,
            }
            if v.counterexample is not None:
                rec["counterexample"] = v.counterexample.to_dict()
            out.append(rec)
        return out

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())

    def to_text(self) -> str:
        lines = [f"{self.controller_id}: {self.satisfied_count}/{self.total} specifications hold"]
        for v in self.verdicts:
            lines.append(f"  {v.spec_name}: {'pass' if v.holds else 'FAIL'}")
            if v.counterexample is not None:
                lines.append(f"    counterexample: {v.counterexample.format()}")
        return "\n".join(lines) + "\n"


def check(prod: ProductAutomaton, phi: Formula, name: str = "") -> Verdict:
    """Does every infinite path from every initial product state satisfy ``phi``?"""
    buchi = ltl_to_buchi(Not(phi))
    found = _search(prod, buchi)
    if found is None:
        return Verdict(name or to_text(phi), True, None, phi)
    return Verdict(name or to_text(phi), False, found, phi)


def _search(prod: ProductAutomaton, buchi: BuchiAutomaton) -> LabeledTrajectory | None:
    return _NestedDfs(prod, buchi).run()


class _NestedDfs:
    """Iterative nested DFS that keeps explicit paths so the lasso can be rebuilt."""

    def __init__(self, prod: ProductAutomaton, buchi: BuchiAutomaton):
        self.prod = prod
        self.buchi = buchi
        self.colour: dict = {}

    def post(self, node):
        s, b = node
        for dst, label in self.prod.successors(s):
            for b2 in self.buchi.successors(b, label):
                yield (dst, b2), label

    def run(self) -> LabeledTrajectory | None:
        if not self.buchi.init:
            return None
        for s0 in self.prod.init_states:
            for b0 in self.buchi.init:
                root = (s0, b0)
                if root in self.colour:
                    continue
                found = self.blue(root)
                if found is not None:
                    return found
        return None

    def blue(self, root):
        acc = self.buchi.accepting
        colour = self.colour
        colour[root] = _CYAN
        stack = [(root, None, self.post(root))]
        while stack:
            node, _, it = stack[-1]
            pushed = False
            for succ, label in it:
                c = colour.get(succ)
                if c == _CYAN and (node[1] in acc or succ[1] in acc):
                    return self.lasso(stack, [], [label], succ)
                if c is None:
                    colour[succ] = _CYAN
                    stack.append((succ, label, self.post(succ)))
                    pushed = True
                    break
            if pushed:
                continue
            if node[1] in acc:
                hit = self.red(node)
                if hit is not None:
                    red_nodes, red_labels, target = hit
                    return self.lasso(stack, red_nodes, red_labels, target)
                colour[node] = _RED
            else:
                colour[node] = _BLUE
            stack.pop()
        return None

    def red(self, seed):
        colour = self.colour
        stack = [(seed, None, self.post(seed))]
        while stack:
            node, _, it = stack[-1]
            pushed = False
            for succ, label in it:
                c = colour.get(succ)
                if c == _CYAN:
                    nodes = [e[0] for e in stack[1:]]
                    labels = [e[1] for e in stack[1:]] + [label]
                    return nodes, labels, succ
                if c == _BLUE:
                    colour[succ] = _RED
                    stack.append((succ, label, self.post(succ)))
                    pushed = True
                    break
            if not pushed:
                stack.pop()
        return None

    @staticmethod
    def lasso(blue_stack, red_nodes, closing_labels, target) -> LabeledTrajectory:
        # blue stack root..seed, then red nodes, then back to target
        nodes = [e[0] for e in blue_stack] + list(red_nodes) + [target]
        labels = [e[1] for e in blue_stack[1:]] + list(closing_labels)
        loop = nodes.index(target)
        return LabeledTrajectory(tuple(n[0] for n in nodes), tuple(labels), loop)


def check_all(
    prod: ProductAutomaton,
    specs: Iterable[tuple[str, Formula]],
    controller_id: str = "",
    jobs: int = 1,
) -> VerificationReport:
    specs = [(n, f) for n, f in specs]
    if not specs:
        raise ValueError("need at least one specification")
    cid = controller_id or prod.controller.name or "controller"
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(lambda nf: check(prod, nf[1], nf[0]), specs))
    else:
        verdicts = [check(prod, f, n) for n, f in specs]
    return VerificationReport(cid, tuple(verdicts))


def report_from_records(records: Sequence[dict]) -> VerificationReport:
    verdicts = []
    cid = ""
    for r in records:
        cid = r.get("controller_id", cid)
        cex = r.get("counterexample")
        traj = None
        if cex:
            traj = LabeledTrajectory(
                tuple(tuple(s) for s in cex["states"]),
                tuple(frozenset(x) for x in cex["labels"]),
                cex.get("lasso_start"),
            )
        verdicts.append(Verdict(r["spec"], r["verdict"] == "pass", traj))
    return VerificationReport(cid, tuple(verdicts))


__all__ = ["Verdict", "VerificationReport", "check", "check_all", "report_from_records"]
