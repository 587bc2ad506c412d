"""Reference implementations written straight from the definitions.

They share no code with the package beyond the AST classes, so agreement
with them is evidence rather than tautology.
"""

from __future__ import annotations

import random
from functools import lru_cache

from specfeedback.automata import ControllerFsa, Transition, model_from_edges
from specfeedback.logic import (
    TRUE,
    Always,
    And,
    Atom,
    Eventually,
    Implies,
    LFalse,
    LTrue,
    Next,
    Not,
    Or,
    Until,
)


# -- semantics ---------------------------------------------------------------------------


def ref_lasso(phi, stem, cycle) -> bool:
    """Standard LTL on stem.cycle^omega via explicit fixpoints over positions."""
    letters = [frozenset(x) for x in stem] + [frozenset(x) for x in cycle]
    n, loop = len(letters), len(stem)
    succ = [i + 1 for i in range(n - 1)] + [loop]

    @lru_cache(maxsize=None)
    def sat(f) -> tuple[bool, ...]:
        if isinstance(f, LTrue):
            return (True,) * n
        if isinstance(f, LFalse):
            return (False,) * n
        if isinstance(f, Atom):
            return tuple(f.name in x for x in letters)
        if isinstance(f, Not):
            return tuple(not v for v in sat(f.operand))
        if isinstance(f, And):
            return tuple(a and b for a, b in zip(sat(f.left), sat(f.right)))
        if isinstance(f, Or):
            return tuple(a or b for a, b in zip(sat(f.left), sat(f.right)))
        if isinstance(f, Implies):
            return tuple((not a) or b for a, b in zip(sat(f.left), sat(f.right)))
        if isinstance(f, Next):
            v = sat(f.operand)
            return tuple(v[succ[i]] for i in range(n))
        if isinstance(f, Until):
            a, b = sat(f.left), sat(f.right)
            return _lfp(n, succ, lambda i, cur: b[i] or (a[i] and cur[succ[i]]))
        if isinstance(f, Eventually):
            b = sat(f.operand)
            return _lfp(n, succ, lambda i, cur: b[i] or cur[succ[i]])
        if isinstance(f, Always):
            a = sat(f.operand)
            return _gfp(n, succ, lambda i, cur: a[i] and cur[succ[i]])
        if type(f).__name__ == "Release":
            # a R b: b holds until and including the first a, or forever
            a, b = sat(f.left), sat(f.right)
            return _gfp(n, succ, lambda i, cur: b[i] and (a[i] or cur[succ[i]]))
        raise TypeError(type(f))

    return sat(phi)[0]


def _lfp(n, succ, step):
    cur = [False] * n
    for _ in range(n + 1):
        cur = [step(i, cur) for i in range(n)]
    return tuple(cur)


def _gfp(n, succ, step):
    cur = [True] * n
    for _ in range(n + 1):
        cur = [step(i, cur) for i in range(n)]
    return tuple(cur)


def ref_finite(phi, letters, i: int = 0) -> bool:
    """LTLf by direct recursion: strong next, G and F range over the remaining suffix."""
    letters = [frozenset(x) for x in letters]
    n = len(letters)

    def ev(f, k):
        if isinstance(f, LTrue):
            return True
        if isinstance(f, LFalse):
            return False
        if isinstance(f, Atom):
            return f.name in letters[k]
        if isinstance(f, Not):
            return not ev(f.operand, k)
        if isinstance(f, And):
            return ev(f.left, k) and ev(f.right, k)
        if isinstance(f, Or):
            return ev(f.left, k) or ev(f.right, k)
        if isinstance(f, Implies):
            return (not ev(f.left, k)) or ev(f.right, k)
        if isinstance(f, Next):
            return k + 1 < n and ev(f.operand, k + 1)
        if isinstance(f, Eventually):
            return any(ev(f.operand, j) for j in range(k, n))
        if isinstance(f, Always):
            return all(ev(f.operand, j) for j in range(k, n))
        if isinstance(f, Until):
            return any(ev(f.right, j) and all(ev(f.left, m) for m in range(k, j)) for j in range(k, n))
        raise TypeError(type(f))

    return ev(phi, i)


def ref_boolean(phi, letter) -> bool:
    return ref_finite(phi, [letter])


# -- product -----------------------------------------------------------------------------


def ref_product(model, controller):
    """Reachable (p, q) graph: the controller reads L(p), an unmatched input idles with no output."""
    inputs = set(controller.input_props)
    init = [(p, controller.init) for p in model.states]
    edges: dict[tuple, set] = {}
    seen = set(init)
    todo = list(init)
    while todo:
        p, q = todo.pop()
        obs = model.label(p) & inputs
        moves = [(t.output, t.dst) for t in controller.transitions if t.src == q and ref_boolean(t.guard, obs)]
        if not moves:
            moves = [(frozenset(), q)]
        succ = model.successors(p) or (p,)
        for out, q2 in moves:
            for p2 in succ:
                edges.setdefault(((p, q), (p2, q2)), set()).add(model.label(p) | out)
                if (p2, q2) not in seen:
                    seen.add((p2, q2))
                    todo.append((p2, q2))
    return set(init), seen, edges


def lassos(init, edges, max_len: int = 16):
    """Every ultimately periodic path with stem+cycle <= max_len, as (stem labels, cycle labels)."""
    out_edges: dict = {}
    for (s, d), labels in edges.items():
        for lab in labels:
            out_edges.setdefault(s, []).append((d, lab))
    stack = [(s, (s,), ()) for s in sorted(init)]
    while stack:
        s, states, labels = stack.pop()
        if len(labels) >= max_len:
            continue
        for d, lab in out_edges.get(s, ()):
            nstates, nlabels = states + (d,), labels + (lab,)
            for j, x in enumerate(states):
                if x == d:
                    yield nlabels[:j], nlabels[j:]
            stack.append((d, nstates, nlabels))


def canonical_lasso(stem, cycle):
    """Shortest representation of the same infinite word."""
    stem, cycle = tuple(stem), tuple(cycle)
    n = len(cycle)
    for d in range(1, n + 1):
        if n % d == 0 and cycle == cycle[:d] * (n // d):
            cycle = cycle[:d]
            break
    while stem and stem[-1] == cycle[-1]:
        stem, cycle = stem[:-1], (cycle[-1],) + cycle[:-1]
    return stem, cycle


class BudgetExceeded(Exception):
    pass


def brute_holds(model, controller, phi, max_len: int = 16, budget: int | None = None) -> bool:
    init, _, edges = ref_product(model, controller)
    seen = set()
    for k, (stem, cycle) in enumerate(lassos(init, edges, max_len)):
        if budget is not None and k >= budget:
            raise BudgetExceeded
        key = canonical_lasso(stem, cycle)
        if key in seen:
            continue
        seen.add(key)
        if not ref_lasso(phi, *key):
            return False
    return True


def lasso_count(model, controller, max_len: int = 16, cap: int = 10**6) -> int:
    init, _, edges = ref_product(model, controller)
    n = 0
    for _ in lassos(init, edges, max_len):
        n += 1
        if n >= cap:
            break
    return n


def ref_paths(prod, length: int, starts):
    """All label sequences of exactly ``length`` edges, by plain recursion."""
    out = set()

    def walk(s, states, labels):
        if len(labels) == length:
            out.add((states, labels))
            return
        for d, lab in prod.successors(s):
            walk(d, states + (d,), labels + (lab,))

    for s in starts:
        walk(s, (s,), ())
    return out


# -- random instances --------------------------------------------------------------------------


def random_formula(rng: random.Random, props, depth: int):
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.08:
            return TRUE
        return Atom(rng.choice(props))
    kind = rng.choice(("not", "and", "or", "implies", "X", "F", "G", "U"))
    sub = lambda: random_formula(rng, props, depth - 1)  # noqa: E731
    if kind == "not":
        return Not(sub())
    if kind == "X":
        return Next(sub())
    if kind == "F":
        return Eventually(sub())
    if kind == "G":
        return Always(sub())
    cls = {"and": And, "or": Or, "implies": Implies, "U": Until}[kind]
    return cls(sub(), sub())


def random_guard(rng: random.Random, props):
    if not props or rng.random() < 0.3:
        return TRUE
    lit = Atom(rng.choice(props))
    if rng.random() < 0.5:
        lit = Not(lit)
    if rng.random() < 0.3:
        other = Atom(rng.choice(props))
        lit = And(lit, other) if rng.random() < 0.5 else Or(lit, other)
    return lit


def random_instance(rng: random.Random, env=("a", "b"), actions=("c",)):
    """A small world model and controller over at most three propositions.

    Model states mostly have one successor; controller states mostly split
    on a guard and its negation, with occasional overlapping guards.
    """
    n_p = rng.randint(1, 4)
    names = [f"p{i}" for i in range(n_p)]
    states = [(s, {x for x in env if rng.random() < 0.5}) for s in names]
    edges = []
    for s in names:
        r = rng.random()
        k = 0 if r < 0.05 else (1 if r < 0.75 else 2)
        for d in rng.sample(names, min(k, n_p)):
            edges.append((s, "true", d))
    model = model_from_edges(env, states, edges)
    n_q = rng.randint(1, 3)
    qs = tuple(f"q{i}" for i in range(n_q))
    inputs = tuple(x for x in env if rng.random() < 0.7)

    def out():
        return frozenset(a for a in actions if rng.random() < 0.5)

    trans = []
    for q in qs:
        shape = rng.random()
        g = random_guard(rng, list(inputs))
        if shape < 0.3:
            trans.append(Transition(q, TRUE, out(), rng.choice(qs)))
        elif shape < 0.7:
            trans.append(Transition(q, g, out(), rng.choice(qs)))
            trans.append(Transition(q, Not(g), out(), rng.choice(qs)))
        elif shape < 0.9:
            trans.append(Transition(q, g, out(), rng.choice(qs)))
        else:
            trans.append(Transition(q, g, out(), rng.choice(qs)))
            trans.append(Transition(q, random_guard(rng, list(inputs)), out(), rng.choice(qs)))
    controller = ControllerFsa(inputs, tuple(actions), qs, "q0", tuple(trans))
    return model, controller
