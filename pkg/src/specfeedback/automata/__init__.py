from .controller import (
    ControllerFsa,
    Transition,
    complete_controller,
    controller_from_dict,
    dump_controller,
    equivalent_guards,
    is_input_enabled,
    load_controller,
    same_behaviour,
    uncovered_inputs,
)
from .model import (
    TransitionSystem,
    build_model,
    dump_model,
    load_model,
    model_from_dict,
    model_from_edges,
    with_props,
)
from .steps import Act, Conditional, Goto, Observe, StepList, Wait, format_steps, parse_steps, steps_to_controller

__all__ = [
    "ControllerFsa", "Transition", "complete_controller", "controller_from_dict", "dump_controller",
    "equivalent_guards", "is_input_enabled", "load_controller", "same_behaviour", "uncovered_inputs",
    "TransitionSystem", "build_model", "dump_model", "load_model", "model_from_dict", "model_from_edges", "with_props",
    "Act", "Conditional", "Goto", "Observe", "StepList", "Wait", "format_steps", "parse_steps", "steps_to_controller",
]
