"""Export a model/controller pair and its specs as an SMV module."""

from __future__ import annotations

import re
from collections.abc import Iterable

from ..automata.controller import ControllerFsa, complete_controller
from ..automata.model import TransitionSystem
from ..logic import Formula, atoms, to_text
from ..logic.printer import SMV

SMV_KEYWORDS = frozenset(
    """MODULE DEFINE MDEFINE CONSTANTS VAR IVAR FROZENVAR INIT TRANS INVAR SPEC CTLSPEC LTLSPEC PSLSPEC
    COMPUTE NAME INVARSPEC FAIRNESS JUSTICE COMPASSION ISA ASSIGN CONSTRAINT SIMPWFF CTLWFF LTLWFF
    PSLWFF COMPWFF IN MIN MAX MIRROR PRED PREDICATES process array of boolean integer real word word1
    bool signed unsigned extend resize sizeof uwconst swconst EX AX EF AF EG AG E F O G H X Y Z A U S V
    T BU EBF ABF EBG ABG case esac mod next init union in xor xnor self TRUE FALSE count toint""".split()
)

# variable names used by the exported module
_RESERVED = frozenset({"env", "ctrl", "out", "eps"})

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def smv_name(name: str) -> str:
    """Deterministic mapping of a proposition or state name to an SMV identifier."""
    out = re.sub(r"[^A-Za-z0-9_]", "_", name)
    if not _IDENT.match(out):
        out = "_" + out
    if out in SMV_KEYWORDS or out in _RESERVED or out.startswith("do_"):
        out += "_"
    return out


def _smv_text(phi: Formula) -> str:
    # fully parenthesised so SMV operator precedence never matters
    text = to_text(phi, full_parens=True, symbols=SMV, rename=smv_name)
    return text if _IDENT.match(text) or _enclosed(text) else f"({text})"


def _enclosed(text: str) -> bool:
    if not text.startswith("("):
        return False
    depth = 0
    for i, ch in enumerate(text):
        depth += {"(": 1, ")": -1}.get(ch, 0)
        if depth == 0:
            return i == len(text) - 1
    return False


def _output_name(output: frozenset[str]) -> str:
    return "eps" if not output else "do_" + "__".join(smv_name(a) for a in sorted(output))


def export_smv(
    model: TransitionSystem,
    controller: ControllerFsa,
    specs: Iterable[tuple[str, Formula]],
    module: str = "main",
) -> str:
    controller = complete_controller(controller)
    specs = list(specs)
    env_vals = [smv_name(s) for s in model.states]
    ctrl_vals = [smv_name(q) for q in controller.states]
    outputs = sorted({t.output for t in controller.transitions}, key=lambda o: (len(o), sorted(o)))
    out_vals = [_output_name(o) for o in outputs]

    lines = [f"MODULE {module}", "VAR"]
    lines.append(f"  env : {{{', '.join(env_vals)}}};")
    lines.append(f"  ctrl : {{{', '.join(ctrl_vals)}}};")
    lines.append(f"  out : {{{', '.join(out_vals)}}};")

    lines.append("DEFINE")
    spec_props = set()
    for _, phi in specs:
        spec_props |= atoms(phi)
    defined = []
    for p in model.props:
        holders = [smv_name(s) for s in model.states if p in model.label(s)]
        rhs = f"env in {{{', '.join(holders)}}}" if holders else "FALSE"
        defined.append(p)
        lines.append(f"  {smv_name(p)} := {rhs};")
    for a in controller.output_props:
        if a in defined:
            continue
        emitting = [_output_name(o) for o in outputs if a in o]
        rhs = f"out in {{{', '.join(emitting)}}}" if emitting else "FALSE"
        defined.append(a)
        lines.append(f"  {smv_name(a)} := {rhs};")
    for p in sorted(spec_props - set(defined)):
        lines.append(f"  {smv_name(p)} := FALSE;")

    lines.append("INIT")
    lines.append(f"  ctrl = {smv_name(controller.init)}")

    # the output shown in a state is the one of the controller move taken from it
    moves = []
    for t in controller.transitions:
        moves.append(
            f"(ctrl = {smv_name(t.src)} & {_smv_text(t.guard)} & out = {_output_name(t.output)}"
            f" & next(ctrl) = {smv_name(t.dst)})"
        )
    enabled = []
    for t in controller.transitions:
        enabled.append(f"(ctrl = {smv_name(t.src)} & {_smv_text(t.guard)} & out = {_output_name(t.output)})")
    lines.append("INVAR")
    lines.append("  " + "\n  | ".join(enabled))

    lines.append("TRANS")
    lines.append("  (" + "\n  | ".join(moves) + ")")
    lines.append("  & case")
    for s in model.states:
        succ = model.successors(s) or (s,)
        lines.append(f"    env = {smv_name(s)} : next(env) in {{{', '.join(smv_name(x) for x in succ)}}};")
    lines.append("    TRUE : FALSE;")
    lines.append("  esac")

    for name, phi in specs:
        lines.append(f"-- {name}")
        lines.append(f"LTLSPEC {_smv_text(phi)}")
    return "\n".join(lines) + "\n"


__all__ = ["SMV_KEYWORDS", "export_smv", "smv_name"]
