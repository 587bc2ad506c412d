"""LTL to Büchi automata via the GPVW tableau, with degeneralisation."""

from __future__ import annotations

import functools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from ..errors import FormulaTooLarge
from ..logic import (
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
    Until,
    atoms,
    conj,
)

DEFAULT_MAX_CLOSURE = 64
DEFAULT_MAX_NODES = 20_000


@dataclass(frozen=True)
class Release(Formula):
    """Dual of until; only produced internally by negation normal form."""

    left: Formula
    right: Formula


def nnf(phi: Formula, negate: bool = False) -> Formula:
    """Push negations down to atoms using the infinite-trace dualities."""
    if isinstance(phi, Atom):
        return Not(phi) if negate else phi
    if isinstance(phi, LTrue):
        return FALSE if negate else TRUE
    if isinstance(phi, LFalse):
        return TRUE if negate else FALSE
    if isinstance(phi, Not):
        return nnf(phi.operand, not negate)
    if isinstance(phi, And):
        l, r = nnf(phi.left, negate), nnf(phi.right, negate)
        return Or(l, r) if negate else And(l, r)
    if isinstance(phi, Or):
        l, r = nnf(phi.left, negate), nnf(phi.right, negate)
        return And(l, r) if negate else Or(l, r)
    if isinstance(phi, Implies):
        return nnf(Or(Not(phi.left), phi.right), negate)
    if isinstance(phi, Next):
        return Next(nnf(phi.operand, negate))
    if isinstance(phi, Until):
        l, r = nnf(phi.left, negate), nnf(phi.right, negate)
        return Release(l, r) if negate else Until(l, r)
    if isinstance(phi, Release):
        l, r = nnf(phi.left, negate), nnf(phi.right, negate)
        return Until(l, r) if negate else Release(l, r)
    if isinstance(phi, Eventually):
        return nnf(Until(TRUE, phi.operand), negate)
    if isinstance(phi, Always):
        return nnf(Release(FALSE, phi.operand), negate)
    raise TypeError(f"unsupported formula node {type(phi).__name__}")


def _closure_size(phi: Formula) -> int:
    seen = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if f in seen:
            continue
        seen.add(f)
        for name in ("operand", "left", "right"):
            sub = getattr(f, name, None)
            if sub is not None:
                stack.append(sub)
    return len(seen)


@dataclass(frozen=True)
class Guard:
    """Conjunction of literals: ``pos`` must hold, ``neg`` must not."""

    pos: frozenset[str] = frozenset()
    neg: frozenset[str] = frozenset()

    def holds(self, letter: frozenset[str] | set[str]) -> bool:
        return self.pos <= letter and not (self.neg & letter)

    def formula(self) -> Formula:
        lits = [Atom(p) for p in sorted(self.pos)] + [Not(Atom(p)) for p in sorted(self.neg)]
        return conj(*lits) if lits else TRUE


@dataclass(frozen=True)
class BuchiAutomaton:
    states: tuple[int, ...]
    init: tuple[int, ...]
    transitions: dict[int, tuple[tuple[Guard, int], ...]] = field(repr=False)
    accepting: frozenset[int]
    props: frozenset[str] = frozenset()
    source: Formula | None = field(default=None, compare=False)

    def successors(self, state: int, letter: frozenset[str]) -> list[int]:
        return [dst for g, dst in self.transitions.get(state, ()) if g.holds(letter)]

    def num_transitions(self) -> int:
        return sum(len(v) for v in self.transitions.values())

    def is_empty_language(self) -> bool:
        return not self.init

    def describe(self) -> str:
        from ..logic import to_text

        lines = [f"init: {list(self.init)}", f"accepting: {sorted(self.accepting)}"]
        for s in self.states:
            for g, d in self.transitions.get(s, ()):
                lines.append(f"{s} --{to_text(g.formula())}--> {d}")
        return "\n".join(lines)


# -- tableau -----------------------------------------------------------------

_INIT = -1


@dataclass
class _Node:
    incoming: set[int]
    new: set[Formula]
    old: set[Formula]
    nxt: set[Formula]
    ident: int = -2


def _is_literal(f: Formula) -> bool:
    return isinstance(f, (Atom, LTrue, LFalse)) or (isinstance(f, Not) and isinstance(f.operand, Atom))


def _contradicts(lit: Formula, old: set[Formula]) -> bool:
    if isinstance(lit, LFalse):
        return True
    if isinstance(lit, Atom):
        return Not(lit) in old
    if isinstance(lit, Not):
        return lit.operand in old
    return False


def _tableau(phi: Formula, max_nodes: int) -> list[_Node]:
    nodes: list[_Node] = []
    index: dict[tuple[frozenset, frozenset], _Node] = {}
    work = [_Node({_INIT}, {phi}, set(), set())]
    while work:
        node = work.pop()
        if not node.new:
            key = (frozenset(node.old), frozenset(node.nxt))
            found = index.get(key)
            if found is not None:
                found.incoming |= node.incoming
                continue
            node.ident = len(nodes)
            nodes.append(node)
            index[key] = node
            if len(nodes) > max_nodes:
                raise FormulaTooLarge(f"tableau exceeded {max_nodes} nodes")
            work.append(_Node({node.ident}, set(node.nxt), set(), set()))
            continue
        eta = node.new.pop()
        if eta in node.old:
            work.append(node)
            continue
        if _is_literal(eta):
            if _contradicts(eta, node.old):
                continue
            node.old.add(eta)
            work.append(node)
        elif isinstance(eta, And):
            node.old.add(eta)
            node.new |= {eta.left, eta.right} - node.old
            work.append(node)
        elif isinstance(eta, Next):
            node.old.add(eta)
            node.nxt.add(eta.operand)
            work.append(node)
        elif isinstance(eta, (Or, Until, Release)):
            if isinstance(eta, Or):
                new1, next1, new2 = {eta.left}, set(), {eta.right}
            elif isinstance(eta, Until):
                new1, next1, new2 = {eta.left}, {eta}, {eta.right}
            else:
                new1, next1, new2 = {eta.right}, {eta}, {eta.left, eta.right}
            old = node.old | {eta}
            work.append(_Node(set(node.incoming), node.new | (new1 - old), set(old), node.nxt | next1))
            work.append(_Node(set(node.incoming), node.new | (new2 - old), set(old), set(node.nxt)))
        else:
            raise TypeError(f"formula not in negation normal form: {eta!r}")
    return nodes


def _node_guard(node: _Node) -> Guard:
    pos = frozenset(f.name for f in node.old if isinstance(f, Atom))
    neg = frozenset(f.operand.name for f in node.old if isinstance(f, Not))
    return Guard(pos, neg)


# -- post-processing -----------------------------------------------------------


def _simplify(states, init, trans, accepting) -> tuple:
    """Merge look-alike states, then drop states that cannot reach an accepting cycle."""
    states = list(states)
    trans = {s: set(trans.get(s, ())) for s in states}
    init = set(init)
    changed = True
    while changed:
        changed = False
        sig: dict[tuple, int] = {}
        rename: dict[int, int] = {}
        for s in states:
            key = (s in accepting, frozenset(trans[s]))
            if key in sig:
                rename[s] = sig[key]
            else:
                sig[key] = s
        if rename:
            changed = True
            states = [s for s in states if s not in rename]
            trans = {s: {(g, rename.get(d, d)) for g, d in trans[s]} for s in states}
            init = {rename.get(s, s) for s in init}
    # productive: can reach an accepting state lying on a cycle
    succ = {s: {d for _, d in trans[s]} for s in states}
    pred: dict[int, set[int]] = {s: set() for s in states}
    for s in states:
        for d in succ[s]:
            pred[d].add(s)
    live_acc = {a for a in accepting if a in succ and _reaches(succ, a, a)}
    productive = set(live_acc)
    stack = list(live_acc)
    while stack:
        s = stack.pop()
        for p in pred[s]:
            if p not in productive:
                productive.add(p)
                stack.append(p)
    init &= productive
    reach = set(init)
    stack = list(init)
    while stack:
        s = stack.pop()
        for d in succ[s]:
            if d in productive and d not in reach:
                reach.add(d)
                stack.append(d)
    kept = [s for s in states if s in reach]
    trans = {s: {(g, d) for g, d in trans[s] if d in reach} for s in kept}
    return kept, init, trans, frozenset(accepting) & frozenset(kept)


def _reaches(succ: dict[int, set[int]], src: int, target: int) -> bool:
    seen = set()
    stack = list(succ[src])
    while stack:
        s = stack.pop()
        if s == target:
            return True
        if s not in seen:
            seen.add(s)
            stack.extend(succ[s])
    return False


def _renumber(states, init, trans, accepting, props, source) -> BuchiAutomaton:
    order = {s: i for i, s in enumerate(sorted(states, key=lambda s: (s not in init, s)))}
    new_trans = {
        order[s]: tuple(sorted(((g, order[d]) for g, d in trans[s]), key=lambda e: (e[1], sorted(e[0].pos), sorted(e[0].neg))))
        for s in states
    }
    return BuchiAutomaton(
        tuple(range(len(order))),
        tuple(sorted(order[s] for s in init)),
        new_trans,
        frozenset(order[s] for s in accepting),
        frozenset(props),
        source,
    )


def ltl_to_buchi(
    phi: Formula,
    *,
    max_closure: int = DEFAULT_MAX_CLOSURE,
    max_nodes: int = DEFAULT_MAX_NODES,
    simplify: bool = True,
) -> BuchiAutomaton:
    """Automaton accepting exactly the infinite words that satisfy ``phi``."""
    return _ltl_to_buchi(phi, max_closure, max_nodes, simplify)


@functools.lru_cache(maxsize=512)
def _ltl_to_buchi(phi: Formula, max_closure: int, max_nodes: int, simplify: bool) -> BuchiAutomaton:
    core = nnf(phi)
    size = _closure_size(core)
    if size > max_closure:
        raise FormulaTooLarge(f"closure of {size} subformulas exceeds the bound of {max_closure}")
    nodes = _tableau(core, max_nodes)
    untils = sorted({f for n in nodes for f in n.old if isinstance(f, Until)}, key=repr)
    guards = {n.ident: _node_guard(n) for n in nodes}

    # generalised acceptance: one set per until; the fresh initial state is in none
    if untils:
        fsets = [frozenset(n.ident for n in nodes if u not in n.old or u.right in n.old) for u in untils]
    else:
        fsets = [frozenset([_INIT, *(n.ident for n in nodes)])]
    k = len(fsets)

    base_succ: dict[int, list[tuple[Guard, int]]] = {_INIT: []}
    for n in nodes:
        base_succ.setdefault(n.ident, [])
    for n in nodes:
        for src in n.incoming:
            base_succ[src].append((guards[n.ident], n.ident))

    # degeneralise: move to the next copy when leaving a member of the current set
    def pair(s, i):
        return s * k + i + k  # shift so _INIT (-1) maps to non-negative ids

    states = []
    trans: dict[int, set] = {}
    accepting = set()
    start = pair(_INIT, 0)
    stack = [(_INIT, 0)]
    seen = {(_INIT, 0)}
    while stack:
        s, i = stack.pop()
        sid = pair(s, i)
        states.append(sid)
        if i == 0 and s in fsets[0]:
            accepting.add(sid)
        j = (i + 1) % k if s in fsets[i] else i
        out = trans.setdefault(sid, set())
        for g, d in base_succ[s]:
            out.add((g, pair(d, j)))
            if (d, j) not in seen:
                seen.add((d, j))
                stack.append((d, j))
    init = {start}
    if simplify:
        states, init, trans, accepting = _simplify(states, init, trans, frozenset(accepting))
    return _renumber(states, init, trans, accepting, atoms(phi), phi)


def accepts(buchi: BuchiAutomaton, stem: Sequence[Iterable[str]], cycle: Sequence[Iterable[str]]) -> bool:
    """Does ``buchi`` accept the word ``stem . cycle^omega``?"""
    if not cycle:
        raise ValueError("the cycle of a lasso word must be non-empty")
    word = [frozenset(x) for x in stem] + [frozenset(x) for x in cycle]
    n, loop = len(word), len(stem)

    def nxt(i):
        return i + 1 if i + 1 < n else loop

    succ: dict[tuple[int, int], list[tuple[int, int]]] = {}
    start = [(b, 0) for b in buchi.init]
    seen = set(start)
    stack = list(start)
    while stack:
        b, i = stack.pop()
        out = [(d, nxt(i)) for d in buchi.successors(b, word[i])]
        succ[(b, i)] = out
        for v in out:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return any(v[0] in buchi.accepting and _reaches(succ, v, v) for v in seen)


__all__ = [
    "BuchiAutomaton", "Guard", "Release", "accepts", "ltl_to_buchi", "nnf",
    "DEFAULT_MAX_CLOSURE", "DEFAULT_MAX_NODES",
]
