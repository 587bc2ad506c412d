from __future__ import annotations

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
)

# binding strength, higher binds tighter
_PREC = {Implies: 1, Or: 2, And: 3, Until: 4}
_UNARY_PREC = 5
_ATOM_PREC = 6

ASCII = {"not": "!", "and": "&", "or": "|", "implies": "->", "true": "true", "false": "false"}
SMV = {"not": "!", "and": "&", "or": "|", "implies": "->", "true": "TRUE", "false": "FALSE"}


def _prec(phi: Formula) -> int:
    if isinstance(phi, (Not, Next, Eventually, Always)):
        return _UNARY_PREC
    return _PREC.get(type(phi), _ATOM_PREC)


def to_text(phi: Formula, *, full_parens: bool = False, symbols: dict[str, str] = ASCII, rename=None) -> str:
    """Render ``phi`` so that :func:`parse_ltl` yields the same tree back."""

    def wrap(child: Formula, min_prec: int) -> str:
        s = render(child)
        if full_parens and not isinstance(child, (Atom, LTrue, LFalse)):
            return f"({s})"
        return f"({s})" if _prec(child) < min_prec else s

    def render(f: Formula) -> str:
        if isinstance(f, Atom):
            return rename(f.name) if rename else f.name
        if isinstance(f, LTrue):
            return symbols["true"]
        if isinstance(f, LFalse):
            return symbols["false"]
        if isinstance(f, Not):
            return symbols["not"] + wrap(f.operand, _UNARY_PREC)
        if isinstance(f, Next):
            return "X " + wrap(f.operand, _UNARY_PREC)
        if isinstance(f, Eventually):
            return "F " + wrap(f.operand, _UNARY_PREC)
        if isinstance(f, Always):
            return "G " + wrap(f.operand, _UNARY_PREC)
        if isinstance(f, Implies):
            return f"{wrap(f.left, 2)} {symbols['implies']} {wrap(f.right, 1)}"
        if isinstance(f, Until):
            return f"{wrap(f.left, 5)} U {wrap(f.right, 4)}"
        if isinstance(f, Or):
            return f"{wrap(f.left, 2)} {symbols['or']} {wrap(f.right, 3)}"
        if isinstance(f, And):
            return f"{wrap(f.left, 3)} {symbols['and']} {wrap(f.right, 4)}"
        raise TypeError(f"not a formula: {f!r}")

    return render(phi)
