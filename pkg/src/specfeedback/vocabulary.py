"""Canonical driving vocabulary used by the bundled assets and prompts."""

from __future__ import annotations

from dataclasses import dataclass, field

from .logic.formula import PropKind, Proposition

# order matters: prompts list them exactly like this
DRIVING_PROPS = (
    "green_traffic_light",
    "green_left_turn_light",
    "flashing_left_turn_light",
    "opposite_car",
    "car_from_left",
    "car_from_right",
    "pedestrian_at_left",
    "pedestrian_at_right",
    "pedestrian_in_front",
    "stop_sign",
)

# appears in the rule set (G(pedestrian -> F stop)) but no scenario model sets it
SPEC_ONLY_PROPS = ("pedestrian",)

DRIVING_ACTIONS = ("stop", "turn_left", "turn_right", "go_straight")


def phrase(name: str) -> str:
    """Display form used in prompts, e.g. ``green left-turn light``."""
    return name.replace("left_turn", "left-turn").replace("_", " ")


@dataclass(frozen=True)
class Vocabulary:
    env: tuple[str, ...]
    actions: tuple[str, ...]
    extra_env: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name in self.env + self.extra_env:
            Proposition(name, PropKind.ENVIRONMENT)
        for name in self.actions:
            Proposition(name, PropKind.ACTION)
        overlap = set(self.all_env) & set(self.actions)
        if overlap:
            raise ValueError(f"propositions used as both observation and action: {sorted(overlap)}")

    @property
    def all_env(self) -> tuple[str, ...]:
        return self.env + tuple(p for p in self.extra_env if p not in self.env)

    def propositions(self) -> list[Proposition]:
        return [Proposition(p, PropKind.ENVIRONMENT) for p in self.all_env] + [
            Proposition(a, PropKind.ACTION) for a in self.actions
        ]


DRIVING = Vocabulary(DRIVING_PROPS, DRIVING_ACTIONS, SPEC_ONLY_PROPS)
