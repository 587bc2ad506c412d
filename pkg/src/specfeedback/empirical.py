"""Discrete scenario simulator, controller grounding and satisfaction statistics."""

from __future__ import annotations

import json
import random
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .automata.controller import ControllerFsa, complete_controller
from .automata.model import TransitionSystem
from .errors import IncompleteWorld, PropMismatch
from .logic import Formula, FiniteTrace, TraceStep, eval_finite, to_text

DEFAULT_TOGGLE = 0.3

# how often each observation flips between consecutive steps
SCENARIO_TOGGLES: dict[str, dict[str, float]] = {
    "traffic_light_intersection": {
        "green_traffic_light": 0.3,
        "car_from_left": 0.4,
        "opposite_car": 0.3,
        "pedestrian_at_left": 0.3,
        "pedestrian_at_right": 0.3,
    },
    "left_turn_signal": {"green_left_turn_light": 0.3, "opposite_car": 0.4, "pedestrian_at_left": 0.4},
    "wide_median": {"car_from_left": 0.4, "car_from_right": 0.4},
    "two_way_stop": {"stop_sign": 0.0, "car_from_left": 0.4, "car_from_right": 0.4, "opposite_car": 0.4},
    "roundabout": {"pedestrian_at_left": 0.3, "pedestrian_at_right": 0.3, "car_from_left": 0.4},
}


@dataclass(frozen=True)
class RunConfig:
    max_steps: int = 20
    num_runs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.num_runs < 1:
            raise ValueError("num_runs must be at least 1")


class World:
    """Stateless dynamics: the caller threads the state and the rng through."""

    props: tuple[str, ...] = ()
    model_derived: bool = False
    name: str = ""

    def initial(self, rng: random.Random):
        raise NotImplementedError

    def observe(self, state) -> frozenset[str]:
        raise NotImplementedError

    def advance(self, state, actions: frozenset[str], rng: random.Random):
        raise NotImplementedError


@dataclass
class ModelWorld(World):
    """Random walk over a transition system.

    A successor is weighted by how many observations it flips: each flipped
    proposition contributes its toggle probability, each kept one its
    complement. With every toggle strictly between 0 and 1 the walk can take
    exactly the model's transitions, which is what makes it model-derived.
    """

    model: TransitionSystem
    toggles: Mapping[str, float] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        for p, v in self.toggles.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"toggle probability for {p} must be in [0, 1]")
        self.props = self.model.props
        self.name = self.name or self.model.name

    @property
    def model_derived(self) -> bool:
        return True

    def _weight(self, a: frozenset[str], b: frozenset[str]) -> float:
        w = 1.0
        for p in self.model.props:
            t = self.toggles.get(p, DEFAULT_TOGGLE)
            w *= t if (p in a) != (p in b) else 1.0 - t
        return w

    def initial(self, rng: random.Random) -> str:
        return rng.choice(self.model.states)

    def observe(self, state: str) -> frozenset[str]:
        return self.model.label(state)

    def advance(self, state: str, actions: frozenset[str], rng: random.Random) -> str:
        succ = self.model.successors(state) or (state,)
        here = self.model.label(state)
        weights = [self._weight(here, self.model.label(s)) for s in succ]
        if sum(weights) <= 0:
            weights = [1.0] * len(succ)
        return rng.choices(succ, weights=weights)[0]


def scenario_world(name: str, toggles: Mapping[str, float] | None = None) -> ModelWorld:
    from . import assets

    if name not in assets.SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(assets.SCENARIOS)}")
    merged = dict(SCENARIO_TOGGLES.get(name, {}))
    merged.update(toggles or {})
    return ModelWorld(assets.model(name), merged, name)


@dataclass
class ConstantWorld(World):
    """Observations pinned to one set forever; not derived from any model."""

    observation: frozenset[str]
    props: tuple[str, ...] = ()
    name: str = "constant"

    def __post_init__(self):
        self.observation = frozenset(self.observation)
        self.props = tuple(self.props) or tuple(sorted(self.observation))

    def initial(self, rng):
        return None

    def observe(self, state) -> frozenset[str]:
        return self.observation

    def advance(self, state, actions, rng):
        return None


def _check_props(controller: ControllerFsa, world: World):
    missing = controller.read_props() - set(world.props)
    if missing:
        raise PropMismatch(f"controller reads propositions the world lacks: {sorted(missing)}")


def ground(controller: ControllerFsa, world: World, cfg: RunConfig, seed: int | None = None) -> FiniteTrace:
    """Run the controller in the world for at most ``cfg.max_steps`` steps.

    Each step records the observation and the output of the first enabled
    transition. The episode stops one step after the controller settles in
    a state that only idles.
    """
    _check_props(controller, world)
    controller = complete_controller(controller)
    rng = random.Random(cfg.seed if seed is None else seed)
    state = world.initial(rng)
    q = controller.init
    steps: list[TraceStep] = []
    finishing = False
    for _ in range(cfg.max_steps):
        obs = world.observe(state)
        t = controller.first_enabled(q, obs)
        steps.append(TraceStep(obs, t.output))
        if finishing:
            break
        q = t.dst
        finishing = controller.is_idle_sink(q)
        state = world.advance(state, t.output, rng)
    return FiniteTrace(tuple(steps), cfg.max_steps)


@dataclass(frozen=True)
class SpecStat:
    spec_name: str
    satisfied: int
    total: int

    @property
    def percentage(self) -> float:
        return self.satisfied / self.total if self.total else 0.0


@dataclass(frozen=True)
class SatisfactionStats:
    stats: tuple[SpecStat, ...]
    runs: int

    def __getitem__(self, name: str) -> SpecStat:
        for s in self.stats:
            if s.spec_name == name:
                return s
        raise KeyError(name)

    def percentages(self) -> dict[str, float]:
        return {s.spec_name: s.percentage for s in self.stats}

    def satisfied_specs(self, threshold: float = 1.0) -> list[str]:
        return [s.spec_name for s in self.stats if s.percentage >= threshold]

    def records(self) -> list[dict]:
        return [
            {"spec": s.spec_name, "satisfied": s.satisfied, "total": s.total, "p": round(s.percentage, 6)}
            for s in self.stats
        ]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())

    def to_text(self) -> str:
        width = max([len(s.spec_name) for s in self.stats] + [4])
        lines = [f"{'spec':<{width}}  satisfied/total      P"]
        for s in self.stats:
            lines.append(f"{s.spec_name:<{width}}  {s.satisfied:>9}/{s.total:<6} {s.percentage:6.3f}")
        return "\n".join(lines) + "\n"


def run_traces(controller: ControllerFsa, world: World, cfg: RunConfig, jobs: int = 1) -> list[FiniteTrace]:
    seeds = [cfg.seed + i for i in range(cfg.num_runs)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda s: ground(controller, world, cfg, s), seeds))
    return [ground(controller, world, cfg, s) for s in seeds]


def stats_from_traces(traces: Sequence[FiniteTrace], specs: Iterable[tuple[str, Formula]]) -> SatisfactionStats:
    out = []
    for name, phi in specs:
        ok = sum(eval_finite(phi, tr) for tr in traces)
        out.append(SpecStat(name or to_text(phi), ok, len(traces)))
    return SatisfactionStats(tuple(out), len(traces))


def evaluate_runs(
    controller: ControllerFsa,
    world: World,
    cfg: RunConfig,
    specs: Iterable[tuple[str, Formula]],
    jobs: int = 1,
) -> SatisfactionStats:
    """Fraction of grounded runs (seeds ``seed``, ``seed+1``, ...) satisfying each spec."""
    return stats_from_traces(run_traces(controller, world, cfg, jobs), specs)


def trace_records(trace: FiniteTrace, run: int | None = None) -> list[dict]:
    out = []
    for i, step in enumerate(trace.steps):
        rec = {"step": i, "observations": sorted(step.observations), "actions": sorted(step.actions)}
        if run is not None:
            rec = {"run": run, **rec}
        out.append(rec)
    return out


def write_trace_log(traces: Sequence[FiniteTrace], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for run, tr in enumerate(traces):
            for rec in trace_records(tr, run):
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
                n += 1
    return n


@dataclass(frozen=True)
class ProbeResult:
    spec_name: str
    formal: bool
    empirical_all: bool

    @property
    def consistent(self) -> bool:
        return not self.formal or self.empirical_all


def theorem1_probe(
    model: TransitionSystem,
    controller: ControllerFsa,
    specs: Iterable[tuple[str, Formula]],
    cfg: RunConfig,
    world: World | None = None,
) -> list[ProbeResult]:
    """Compare formal verdicts with sampled runs in a world generated from ``model``."""
    from .modelcheck import check
    from .product import build_product

    world = world if world is not None else ModelWorld(model)
    if not world.model_derived:
        raise IncompleteWorld("the world's dynamics are not generated from the model")
    prod = build_product(model, controller)
    traces = run_traces(controller, world, cfg)
    out = []
    for name, phi in specs:
        formal = check(prod, phi, name).holds
        empirical = all(eval_finite(phi, tr) for tr in traces)
        out.append(ProbeResult(name or to_text(phi), formal, empirical))
    return out


__all__ = [
    "ConstantWorld", "ModelWorld", "ProbeResult", "RunConfig", "SatisfactionStats", "SpecStat", "World",
    "SCENARIO_TOGGLES", "evaluate_runs", "ground", "run_traces", "scenario_world", "stats_from_traces",
    "theorem1_probe", "trace_records", "write_trace_log",
]
