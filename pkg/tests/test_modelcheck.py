from __future__ import annotations

import random
import shutil
import subprocess

import hypothesis.strategies as st
import pytest
from conftest import formulas, letters
from hypothesis import given, settings
from oracles import BudgetExceeded, brute_holds, random_formula, random_instance, ref_lasso, ref_product

from specfeedback import assets
from specfeedback.errors import FormulaTooLarge
from specfeedback.logic import Always, Atom, Eventually, Not, eval_lasso, parse_ltl
from specfeedback.modelcheck import (
    Release,
    VerificationReport,
    accepts,
    check,
    check_all,
    export_smv,
    ltl_to_buchi,
    nnf,
    report_from_records,
    smv_name,
)
from specfeedback.product import build_product


# -- normal form and automata ----------------------------------------------------------------------


@settings(max_examples=300)
@given(formulas(), st.lists(letters(), max_size=4), st.lists(letters(), min_size=1, max_size=4))
def test_nnf_preserves_meaning(phi, stem, cycle):
    core = nnf(phi)
    assert ref_lasso(core, stem, cycle) == ref_lasso(phi, stem, cycle)
    assert ref_lasso(nnf(phi, negate=True), stem, cycle) != ref_lasso(phi, stem, cycle)


@settings(max_examples=600)
@given(formulas(max_leaves=8), st.lists(letters(), max_size=4), st.lists(letters(), min_size=1, max_size=4))
def test_buchi_language_matches_lasso_semantics(phi, stem, cycle):
    assert accepts(ltl_to_buchi(phi), stem, cycle) == ref_lasso(phi, stem, cycle)


def test_exhaustive_short_words():
    """Every lasso word up to length 5 over {p, q}, for a fixed formula set."""
    texts = ["G p", "F p", "G F p", "F G p", "p U q", "X p", "!(p U q)", "G (p -> F q)", "F p -> G q", "(p U q) U p"]
    alphabet = [frozenset(), frozenset("p"), frozenset("q"), frozenset("pq")]
    words = []
    for total in range(1, 6):
        for split in range(total):
            for idx in range(4**total):
                w = [alphabet[idx // 4**i % 4] for i in range(total)]
                words.append((w[:split], w[split:]))
    for text in texts:
        phi = parse_ltl(text)
        b = ltl_to_buchi(phi)
        for stem, cycle in words:
            assert accepts(b, stem, cycle) == ref_lasso(phi, stem, cycle), (text, stem, cycle)


def test_small_automata():
    assert len(ltl_to_buchi(Always(Atom("p"))).states) == 1
    assert len(ltl_to_buchi(Eventually(Atom("p"))).states) == 2
    false = ltl_to_buchi(parse_ltl("p & !p"))
    assert false.is_empty_language() or not accepts(false, [], [{"p"}])
    assert isinstance(nnf(Not(parse_ltl("a U b"))), Release)


def test_formula_too_large():
    phi = parse_ltl(" & ".join(f"F (p{i} U q{i})" for i in range(30)))
    with pytest.raises(FormulaTooLarge):
        ltl_to_buchi(phi, max_closure=20)


def test_accepts_needs_cycle():
    with pytest.raises(ValueError):
        accepts(ltl_to_buchi(Atom("p")), [{"p"}], [])


# -- checking ----------------------------------------------------------------------------------------


def _assert_genuine(prod, model, ctrl, verdict, phi):
    """The counterexample is a path of the reference product and violates phi."""
    cex = verdict.counterexample
    init, _, edges = ref_product(model, ctrl)
    assert cex.state_seq[0] in init
    for a, b, lab in zip(cex.state_seq, cex.state_seq[1:], cex.label_seq):
        assert lab in edges[(a, b)]
    assert not ref_lasso(phi, cex.stem + cex.cycle * 4, cex.cycle)


@settings(max_examples=150)
@given(st.integers(0, 2**32))
def test_check_agrees_with_bounded_enumeration(seed):
    """Sound in both directions: a short violating lasso forces a failure, a failure is genuine."""
    rng = random.Random(seed)
    model, ctrl = random_instance(rng)
    phi = random_formula(rng, ["a", "b", "c"], 3)
    prod = build_product(model, ctrl)
    verdict = check(prod, phi)
    if not verdict.holds:
        _assert_genuine(prod, model, ctrl, verdict, phi)
    try:
        if not brute_holds(model, ctrl, phi, max_len=10, budget=20_000):
            assert not verdict.holds
    except BudgetExceeded:
        pass


def test_regression_verdicts():
    tl = assets.model("traffic_light_intersection")
    specs = assets.specs()
    before = check_all(build_product(tl, assets.controller("right_turn_before")), specs)
    after = check_all(build_product(tl, assets.controller("right_turn_after")), specs)
    assert "phi5" in before.failed and "phi5" not in after.failed
    assert after.satisfied_count > before.satisfied_count
    for rep in (before, after):
        for v in rep.verdicts:
            if not v.holds:
                assert not eval_lasso(v.formula, v.counterexample.stem, v.counterexample.cycle)


def test_report_serialisation_round_trip():
    prod = build_product(assets.model("traffic_light_intersection"), assets.controller("right_turn_before"))
    rep = check_all(prod, assets.specs(), "rt")
    again = report_from_records(rep.records())
    assert again == rep
    assert rep.to_jsonl().count("\n") == 15
    assert "rt: 10/15 specifications hold" in rep.to_text()
    assert rep["phi5"].counterexample.format().endswith(")")
    with pytest.raises(KeyError):
        rep["phi99"]


def test_parallel_checking_is_identical():
    prod = build_product(assets.model("left_turn_signal"), assets.controller("left_turn_before"))
    one = check_all(prod, assets.specs(), "c", jobs=1)
    four = check_all(prod, assets.specs(), "c", jobs=4)
    assert one.to_jsonl() == four.to_jsonl()


def test_check_all_needs_specs():
    prod = build_product(assets.model("left_turn_signal"), assets.controller("left_turn_before"))
    with pytest.raises(ValueError):
        check_all(prod, [])


def test_failing_verdict_requires_counterexample():
    from specfeedback.modelcheck import Verdict

    with pytest.raises(ValueError):
        Verdict("x", False, None)
    assert VerificationReport("c", ()).total == 0


# -- SMV export -------------------------------------------------------------------------------------------


def test_smv_names():
    assert smv_name("green_traffic_light") == "green_traffic_light"
    assert smv_name("G") == "G_"
    assert smv_name("next") == "next_"
    assert smv_name("out") == "out_"
    assert smv_name("do_thing") == "do_thing_"
    assert smv_name("9lives") == "_9lives"
    assert smv_name("a-b") == "a_b"


def test_smv_export_structure():
    text = export_smv(assets.model("traffic_light_intersection"), assets.controller("right_turn_before"), assets.specs())
    assert text.startswith("MODULE main\nVAR\n")
    assert "  env : {p0, p1, p2, p3, p4};" in text
    assert "  out : {eps, do_turn_right, do_go_straight};" in text or "  out : {eps, do_go_straight, do_turn_right};" in text
    assert "  pedestrian := FALSE;" in text
    assert text.count("LTLSPEC ") == 15
    assert "(ctrl = q3 & car_from_left & out = eps)" in text
    assert "LTLSPEC (G ((car_from_left | pedestrian_at_right) -> (!turn_right)))" in text


def test_smv_guards_keep_their_grouping():
    text = export_smv(assets.model("traffic_light_intersection"), assets.controller("right_turn_after"), assets.specs())
    assert "(ctrl = q2 & (car_from_left | pedestrian_at_right) & out = eps)" in text


def test_smv_export_is_deterministic():
    args = (assets.model("left_turn_signal"), assets.controller("left_turn_after"), assets.specs())
    assert export_smv(*args) == export_smv(*args)


@pytest.mark.nusmv
@pytest.mark.skipif(shutil.which("NuSMV") is None, reason="NuSMV is not installed")
@pytest.mark.parametrize("ctrl,model", [
    ("right_turn_before", "traffic_light_intersection"),
    ("right_turn_after", "traffic_light_intersection"),
    ("left_turn_before", "left_turn_signal"),
    ("left_turn_after", "left_turn_signal"),
])
def test_nusmv_agrees(tmp_path, ctrl, model):
    m, c, specs = assets.model(model), assets.controller(ctrl), assets.specs()
    path = tmp_path / "m.smv"
    path.write_text(export_smv(m, c, specs))
    out = subprocess.run(["NuSMV", str(path)], capture_output=True, text=True, check=True).stdout
    smv = [line.rstrip().endswith("is true") for line in out.splitlines() if line.startswith("-- specification")]
    ours = [v.holds for v in check_all(build_product(m, c), specs).verdicts]
    assert smv == ours
