"""Access to the models, controllers, step lists, specs and fixtures shipped with the package."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .automata import ControllerFsa, TransitionSystem, controller_from_dict, model_from_dict
from .logic import NamedSpec, parse_spec_file
from .vocabulary import DRIVING

_KINDS = {
    "models": ".json",
    "controllers": ".json",
    "steps": ".steps",
    "specs": ".ltl",
    "fixtures": ".json",
    "prompts": ".txt",
}

SCENARIOS = ("traffic_light_intersection", "left_turn_signal", "wide_median", "two_way_stop", "roundabout")


def _root():
    return resources.files("specfeedback") / "data"


def asset_path(kind: str, name: str) -> Path:
    if kind not in _KINDS:
        raise KeyError(f"unknown asset kind {kind!r}")
    entry = _root() / kind / (name + _KINDS[kind])
    if not entry.is_file():
        raise FileNotFoundError(f"no bundled {kind[:-1]} named {name!r}")
    return Path(str(entry))


def list_assets(kind: str) -> list[str]:
    suffix = _KINDS[kind]
    return sorted(p.name[: -len(suffix)] for p in (_root() / kind).iterdir() if p.name.endswith(suffix))


def read_text(kind: str, name: str) -> str:
    return asset_path(kind, name).read_text(encoding="utf-8")


def model(name: str) -> TransitionSystem:
    return model_from_dict(json.loads(read_text("models", name)))


def controller(name: str) -> ControllerFsa:
    return controller_from_dict(json.loads(read_text("controllers", name)))


def steps_text(name: str) -> str:
    return read_text("steps", name)


def specs(name: str = "driving_rules") -> list[NamedSpec]:
    return parse_spec_file(read_text("specs", name), DRIVING.all_env, DRIVING.actions)


def fixture(name: str) -> dict:
    return json.loads(read_text("fixtures", name))


def prompts(name: str = "driving_tasks") -> list[str]:
    return parse_prompt_list(read_text("prompts", name))


def parse_prompt_list(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
