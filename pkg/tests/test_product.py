from __future__ import annotations

import random

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings
from oracles import random_instance, ref_paths, ref_product

from specfeedback import assets
from specfeedback.automata import ControllerFsa, Transition, model_from_edges
from specfeedback.errors import ExplosionGuard, PropMismatch
from specfeedback.logic import TRUE, Atom
from specfeedback.product import LabeledTrajectory, build_product, enumerate_labeled_paths


def _edges(prod):
    return {k: set(v) for k, v in prod.edge_labels.items()}


@settings(max_examples=300)
@given(st.integers(0, 2**32))
def test_product_matches_reference_construction(seed):
    model, ctrl = random_instance(random.Random(seed))
    prod = build_product(model, ctrl)
    init, states, edges = ref_product(model, ctrl)
    assert set(prod.init_states) == init
    assert set(prod.states) == states
    assert _edges(prod) == edges
    assert not prod.deadlocks()


def test_right_turn_product_size():
    prod = build_product(assets.model("traffic_light_intersection"), assets.controller("right_turn_before"))
    assert len(prod.states) == 30
    assert prod.num_edges() == 96
    assert prod.init_states[0] == ("p0", "q0")


def test_deadlocked_model_state_stutters():
    m = assets.model("roundabout")
    c = assets.controller("right_turn_after")
    prod = build_product(m, ControllerFsa(("car_from_left",), c.output_props, ("q0",), "q0", ()))
    assert (("p3", "q0"), ("p3", "q0")) in prod.edge_labels


def test_prop_mismatch_is_rejected():
    m = model_from_edges(["a"], [("s", ["a"])], [("s", "true", "s")])
    c = ControllerFsa(("b",), (), ("q0",), "q0", (Transition("q0", Atom("b"), frozenset(), "q0"),))
    with pytest.raises(PropMismatch):
        build_product(m, c)
    # observed but unread propositions do not count
    ok = ControllerFsa(("b",), (), ("q0",), "q0", (Transition("q0", TRUE, frozenset(), "q0"),))
    assert build_product(m, ok).states == (("s", "q0"),)


def test_edge_labels_combine_observation_and_action():
    m = model_from_edges(["a"], [("s", ["a"])], [("s", "true", "s")])
    c = ControllerFsa(("a",), ("x", "y"), ("q0",), "q0", (
        Transition("q0", Atom("a"), frozenset({"x"}), "q0"),
        Transition("q0", TRUE, frozenset({"y"}), "q0"),
    ))
    prod = build_product(m, c)
    assert prod.edge_labels[(("s", "q0"), ("s", "q0"))] == {frozenset({"a", "x"}), frozenset({"a", "y"})}
    assert len(prod.successors(("s", "q0"))) == 2


@settings(max_examples=100)
@given(st.integers(0, 2**32), st.integers(1, 5))
def test_path_enumeration_matches_recursion(seed, length):
    model, ctrl = random_instance(random.Random(seed))
    prod = build_product(model, ctrl)
    got = {(p.state_seq, p.label_seq) for p in enumerate_labeled_paths(prod, length)}
    assert got == ref_paths(prod, length, prod.init_states)


def test_path_enumeration_from_states_and_guard():
    prod = build_product(assets.model("traffic_light_intersection"), assets.controller("right_turn_before"))
    start = prod.states[5]
    paths = enumerate_labeled_paths(prod, 2, from_states=[start])
    assert paths and all(p.state_seq[0] == start for p in paths)
    with pytest.raises(ExplosionGuard):
        enumerate_labeled_paths(prod, 12, bound=100)
    with pytest.raises(KeyError):
        enumerate_labeled_paths(prod, 2, from_states=[("nowhere", "q0")])
    with pytest.raises(ValueError):
        enumerate_labeled_paths(prod, 0)


def test_trajectory_validation_and_format():
    t = LabeledTrajectory((("p0", "q0"), ("p1", "q1"), ("p0", "q0")), ({"a"}, set()), lasso_start=0)
    assert t.stem == () and t.cycle == (frozenset({"a"}), frozenset())
    assert t.format() == "(p0, q0, {a}), (p1, q1, {}) -> loop to (p0, q0)"
    assert t.to_dict()["lasso_start"] == 0
    with pytest.raises(ValueError):
        LabeledTrajectory((("p0", "q0"),), ({"a"},))
    with pytest.raises(ValueError):
        LabeledTrajectory((("p0", "q0"), ("p1", "q0")), ({"a"},), lasso_start=0)


def test_product_renderings():
    prod = build_product(assets.model("left_turn_signal"), assets.controller("left_turn_after"))
    text = prod.to_text()
    assert text.startswith("# product left_turn_signal x left_turn_after")
    assert text.count("->") == sum(len(v) for v in prod.edge_labels.values())
    assert prod.to_dot().startswith("digraph")
