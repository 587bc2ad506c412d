"""Acceptance criteria; the terminal summary prints one PASS/FAIL line per criterion."""

from __future__ import annotations

import json
import random
import time

import pytest
import test_automata
import test_logic
from oracles import BudgetExceeded, brute_holds, random_formula, random_guard, random_instance, ref_finite, ref_lasso, ref_product

from specfeedback import assets
from specfeedback.automata import model_from_edges
from specfeedback.cli import main
from specfeedback.empirical import ModelWorld, RunConfig, evaluate_runs, run_traces, scenario_world
from specfeedback.logic import Always, eval_lasso
from specfeedback.modelcheck import check, check_all
from specfeedback.product import build_product

SPECS = assets.specs()
ALL = [f"phi{i}" for i in range(1, 16)]


def _verify(model, controller, capsys):
    """Run the CLI verify command; returns (report, stdout, seconds)."""
    t0 = time.perf_counter()
    main(["verify", f"@{model}", f"@{controller}"])
    elapsed = time.perf_counter() - t0
    out = capsys.readouterr().out
    report = check_all(build_product(assets.model(model), assets.controller(controller)), SPECS, controller)
    return report, out, elapsed


def _genuine(model, controller, phi, cex) -> bool:
    """The lasso is a path of the reference product and, unrolled four cycles, violates phi."""
    init, _, edges = ref_product(model, controller)
    if cex.state_seq[0] not in init:
        return False
    for a, b, lab in zip(cex.state_seq, cex.state_seq[1:], cex.label_seq):
        if lab not in edges.get((a, b), ()):
            return False
    word = list(cex.stem) + list(cex.cycle) * 4
    return not ref_lasso(phi, word, cex.cycle) and not eval_lasso(phi, word, cex.cycle)


def _regression(capsys, model, before, after, failing):
    pre, pre_out, t_pre = _verify(model, before, capsys)
    post, post_out, t_post = _verify(model, after, capsys)
    problems = []
    if pre.failed != failing:
        problems.append(f"{before}: {pre.satisfied_count}/15, failing {pre.failed}; expected only {failing}")
    if post.failed:
        problems.append(f"{after}: {post.satisfied_count}/15, failing {post.failed}; expected 15/15")
    for rep, name in ((pre, before), (post, after)):
        for v in rep.verdicts:
            if not v.holds:
                assert _genuine(assets.model(model), assets.controller(name), v.formula, v.counterexample)
                assert v.counterexample.format() in (pre_out if rep is pre else post_out)
    assert t_pre < 1.0 and t_post < 1.0
    assert not problems, "; ".join(problems)


@pytest.mark.acceptance("AC1", "right-turn regression: pre fails only phi5, post passes 15/15, under 1 s")
def test_ac1_right_turn_regression(capsys):
    _regression(capsys, "traffic_light_intersection", "right_turn_before", "right_turn_after", ["phi5"])


@pytest.mark.acceptance("AC2", "left-turn regression: pre fails only phi12, post passes 15/15, under 1 s")
def test_ac2_left_turn_regression(capsys):
    _regression(capsys, "left_turn_signal", "left_turn_before", "left_turn_after", ["phi12"])


@pytest.mark.acceptance("AC3", "model checker agrees with lasso enumeration on 500 random instances in under 60 s")
def test_ac3_oracle_equivalence():
    rng = random.Random(20241016)
    t0 = time.perf_counter()
    agreed = checked = 0
    mismatches = []
    while checked < 500:
        model, ctrl = random_instance(rng)
        prod = build_product(model, ctrl)
        if len(prod.states) > 8:
            continue
        phi = random_formula(rng, ["a", "b", "c"], 3)
        try:
            expected = brute_holds(model, ctrl, phi, max_len=16, budget=20_000)
        except BudgetExceeded:
            continue
        checked += 1
        got = check(prod, phi).holds
        if got == expected:
            agreed += 1
        else:
            mismatches.append((str(phi), got, expected))
    elapsed = time.perf_counter() - t0
    assert not mismatches, mismatches[:5]
    assert agreed == 500
    assert elapsed < 60, f"{elapsed:.1f}s"


@pytest.mark.acceptance("AC4", "every counterexample, unrolled 4 cycles, violates its spec")
def test_ac4_counterexample_soundness():
    failures = 0
    pairs = [
        ("traffic_light_intersection", "right_turn_before"),
        ("traffic_light_intersection", "right_turn_after"),
        ("left_turn_signal", "left_turn_before"),
        ("left_turn_signal", "left_turn_after"),
    ]
    for model_name, ctrl_name in pairs:
        model, ctrl = assets.model(model_name), assets.controller(ctrl_name)
        for v in check_all(build_product(model, ctrl), SPECS).verdicts:
            if not v.holds:
                failures += 1
                assert _genuine(model, ctrl, v.formula, v.counterexample), (ctrl_name, v.spec_name)
    rng = random.Random(4)
    for _ in range(400):
        model, ctrl = random_instance(rng)
        phi = random_formula(rng, ["a", "b", "c"], 3)
        v = check(build_product(model, ctrl), phi)
        if not v.holds:
            failures += 1
            assert _genuine(model, ctrl, phi, v.counterexample), str(phi)
    assert failures > 100


@pytest.mark.acceptance("AC5", "formal G(boolean) verdicts hold on all 50 sampled runs of model-derived worlds")
def test_ac5_formal_implies_empirical():
    rng = random.Random(5)
    worlds = holding = 0
    while worlds < 150:
        model, ctrl = random_instance(rng)
        phi = Always(random_guard(rng, ["a", "b", "c"]))
        worlds += 1
        if not check(build_product(model, ctrl), phi).holds:
            continue
        holding += 1
        world = ModelWorld(model, {p: rng.uniform(0.05, 0.95) for p in model.props})
        traces = run_traces(ctrl, world, RunConfig(max_steps=rng.randint(1, 25), num_runs=50, seed=worlds))
        bad = [tr for tr in traces if not ref_finite(phi, tr.letters())]
        assert not bad, (str(phi), bad[0])
    # enough formally satisfied cases for the implication to mean something
    assert holding >= 40


def _ranking_corpus(tmp_path, with_tie: bool):
    after = assets.steps_text("right_turn_after")
    before = assets.steps_text("right_turn_before")
    last = "1. <turn right>." if with_tie else "1. <fly over the traffic>."
    texts = [after, "1. <go straight>.", before, last]
    corpus = {"tasks": {f"task {i}": [{"raw": t, "aligned": t} for t in texts] for i in range(10)}}
    fixtures = tmp_path / f"corpus_{with_tie}.json"
    fixtures.write_text(json.dumps(corpus))
    prompts = tmp_path / "prompts.txt"
    prompts.write_text("".join(f"task {i}\n" for i in range(10)))
    return prompts, fixtures


def _rank(tmp_path, capsys, with_tie: bool, tag: str):
    prompts, fixtures = _ranking_corpus(tmp_path, with_tie)
    out = tmp_path / f"pairs_{tag}.jsonl"
    code = main([
        "rank", str(prompts), "--backend", "fixture", "--fixtures", str(fixtures), "-m", "4",
        "--out", str(out), "--format", "records",
    ])
    summary = json.loads(capsys.readouterr().out)
    assert code == 0
    return out, summary


@pytest.mark.acceptance("AC6", "10 prompts x 4 responses give 60 pairs, or 50 with one tie per prompt")
def test_ac6_dataset_arithmetic(tmp_path, capsys):
    distinct, summary = _rank(tmp_path, capsys, False, "distinct")
    assert summary["prompts"] == 10 and summary["responses"] == 40
    assert len(distinct.read_text().splitlines()) == 60
    tied, summary = _rank(tmp_path, capsys, True, "tied")
    assert summary["ties"] == 10
    assert len(tied.read_text().splitlines()) == 50


def _empirical(seed: int = 0):
    world = scenario_world("traffic_light_intersection")
    cfg = RunConfig(num_runs=200, seed=seed)
    first5 = SPECS[:5]
    pre = evaluate_runs(assets.controller("right_turn_before"), world, cfg, first5)
    post = evaluate_runs(assets.controller("right_turn_after"), world, cfg, first5)
    return pre, post


@pytest.mark.acceptance("AC7", "over 200 runs the post right-turn controller matches or beats pre on phi1-phi5, strictly on phi5")
def test_ac7_empirical_ordering():
    pre, post = _empirical()
    for name in ("phi1", "phi2", "phi3", "phi4", "phi5"):
        assert post[name].percentage >= pre[name].percentage, name
    assert post["phi5"].percentage > pre["phi5"].percentage


@pytest.mark.acceptance("AC8", "repeated ranking and simulation runs are byte-identical")
def test_ac8_determinism(tmp_path, capsys):
    a, _ = _rank(tmp_path, capsys, True, "a")
    b, _ = _rank(tmp_path, capsys, True, "b")
    assert a.read_bytes() == b.read_bytes()

    argv = ["simulate", "@right_turn_before", "@right_turn_after", "--scenario", "traffic_light_intersection",
            "--runs", "200", "--seed", "7", "--format", "records"]
    outputs = []
    for k in range(2):
        main(argv + ["--trace-dir", str(tmp_path / f"traces{k}")])
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    for name in ("right_turn_before", "right_turn_after"):
        log = f"{name}.traces.jsonl"
        assert (tmp_path / "traces0" / log).read_bytes() == (tmp_path / "traces1" / log).read_bytes()

    mock = [tmp_path / "m1.jsonl", tmp_path / "m2.jsonl"]
    for path in mock:
        main(["rank", "@driving_tasks", "--backend", "mock", "--seed", "3", "--out", str(path)])
    capsys.readouterr()
    assert mock[0].read_bytes() == mock[1].read_bytes()
    assert _empirical(9)[1].to_jsonl() == _empirical(9)[1].to_jsonl()


@pytest.mark.acceptance("AC9", "LTL and step round trips on 1000 inputs each; malformed inputs give positioned errors")
def test_ac9_parser_robustness():
    # each of these is a hypothesis property configured for 1000 examples
    test_logic.test_print_parse_round_trip()
    test_logic.test_parser_never_crashes()
    test_automata.test_step_list_round_trip()
    test_automata.test_step_parser_never_crashes()
    for column, text in test_logic._malformed_ltl():
        test_logic.test_malformed_formulas_report_position(column, text)
    for name in sorted(test_automata._EXPECTED):
        test_automata.test_malformed_step_fixtures(name)
