"""Command-line entry point: verify, simulate, rank, export-smv and build-model."""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import assets
from .automata import (
    ControllerFsa,
    TransitionSystem,
    build_model,
    controller_from_dict,
    dump_model,
    model_from_dict,
    parse_steps,
    steps_to_controller,
)
from .empirical import RunConfig, run_traces, scenario_world, stats_from_traces, write_trace_log
from .errors import (
    BackendError,
    EmptyStepList,
    LtlSyntaxError,
    SpecFeedbackError,
    StepSyntaxError,
    UnknownProposition,
)
from .feedback import CandidateResponse, emit_dataset, make_pairs, score_all
from .lmclient import DEFAULT_TEMPERATURE, PROFILES, GenerationRequest, generate, make_backend
from .logic import Formula, NamedSpec, eval_finite, parse_ltl, parse_spec_file, subformulas
from .logic.formula import Always, Eventually, Until
from .modelcheck import check_all, export_smv
from .product import build_product
from .vocabulary import DRIVING

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class InputError(Exception):
    """A user-facing input problem; printed as ``file:line: message``."""

    def __init__(self, source: str, message: str, line: int | None = None):
        self.source = source
        self.line = line
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class PipelineConfig:
    model: str = "@traffic_light_intersection"
    controller: str = ""
    specs: str = "@driving_rules"
    scenario: str = ""
    run: RunConfig = RunConfig()
    backend: str = "mock"
    out_dir: str = "."

    def output_dir(self) -> Path:
        path = Path(self.out_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path


# -- input resolution ---------------------------------------------------------------


def _read(ref: str, kind: str) -> tuple[str, str]:
    """Return ``(display name, text)`` for a path or an ``@name`` bundled asset."""
    if ref.startswith("@"):
        try:
            return ref, assets.read_text(kind, ref[1:])
        except FileNotFoundError:
            raise InputError(ref, f"no bundled {kind[:-1]} named {ref[1:]!r}") from None
    path = Path(ref)
    if not path.is_file():
        raise InputError(ref, "no such file")
    try:
        return ref, path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(ref, f"cannot read file ({exc})") from None


def _load_json(source: str, text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(source, f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(data, dict):
        raise InputError(source, "expected a JSON object")
    return data


_WHERE = re.compile(r"^line \d+(?:, column \d+)?: ")


def _positioned(source: str, exc: Exception) -> InputError:
    """``file:line:column: message`` from an error that carries a position."""
    line = getattr(exc, "line", None)
    if isinstance(exc, LtlSyntaxError):
        column, message = exc.position, exc.message + (f" (expected {exc.expected})" if exc.expected else "")
    elif isinstance(exc, UnknownProposition):
        column, message = exc.position, f"unknown proposition {exc.name!r}"
    else:
        column, message = getattr(exc, "column", None), _WHERE.sub("", str(exc))
    if line is not None and column is not None:
        source = f"{source}:{line}"
        line = column
    return InputError(source, message, line)


def load_model_ref(ref: str) -> TransitionSystem:
    source, text = _read(ref, "models")
    try:
        return model_from_dict(_load_json(source, text))
    except InputError:
        raise
    except KeyError as exc:
        raise InputError(source, f"missing field {exc.args[0]!r}") from None
    except (SpecFeedbackError, ValueError, TypeError) as exc:
        raise _positioned(source, exc) from None


def _controller_from_steps(source: str, text: str) -> ControllerFsa:
    try:
        steps = parse_steps(text, DRIVING.all_env, DRIVING.actions)
    except (StepSyntaxError, UnknownProposition, EmptyStepList) as exc:
        raise _positioned(source, exc) from None
    return steps_to_controller(steps, DRIVING.actions, name=_ident(source))


def load_controller_ref(ref: str) -> ControllerFsa:
    """A controller JSON file, a ``.steps`` file, or ``@name`` (controllers first, then step lists)."""
    if ref.startswith("@"):
        name = ref[1:]
        if name in assets.list_assets("controllers"):
            source, text = _read(ref, "controllers")
        elif name in assets.list_assets("steps"):
            return _controller_from_steps(ref, assets.steps_text(name))
        else:
            raise InputError(ref, f"no bundled controller or step list named {name!r}")
    else:
        source, text = _read(ref, "controllers")
        if Path(ref).suffix in (".steps", ".txt"):
            return _controller_from_steps(source, text)
    try:
        ctrl = controller_from_dict(_load_json(source, text))
    except InputError:
        raise
    except KeyError as exc:
        raise InputError(source, f"missing field {exc.args[0]!r}") from None
    except (SpecFeedbackError, ValueError, TypeError) as exc:
        raise _positioned(source, exc) from None
    return ctrl if ctrl.name else _renamed(ctrl, _ident(source))


def _renamed(ctrl: ControllerFsa, name: str) -> ControllerFsa:
    return ControllerFsa(ctrl.input_props, ctrl.output_props, ctrl.states, ctrl.init, ctrl.transitions, name=name)


def load_specs_ref(ref: str) -> list[NamedSpec]:
    source, text = _read(ref, "specs")
    try:
        return parse_spec_file(text, DRIVING.all_env, DRIVING.actions)
    except (LtlSyntaxError, UnknownProposition) as exc:
        raise _positioned(source, exc) from None


def load_prompts_ref(ref: str) -> list[str]:
    _, text = _read(ref, "prompts")
    return assets.parse_prompt_list(text)


def _ident(ref: str) -> str:
    return ref[1:] if ref.startswith("@") else Path(ref).stem


# -- subcommands ------------------------------------------------------------------------


def cmd_verify(args) -> int:
    model = load_model_ref(args.model)
    controller = load_controller_ref(args.controller)
    specs = load_specs_ref(args.specs)
    prod = build_product(model, controller)
    report = check_all(prod, specs, controller.name or _ident(args.controller), jobs=args.jobs)
    if args.format == "records":
        sys.stdout.write(report.to_jsonl())
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK if report.satisfied_count == report.total else EXIT_FAIL


def cmd_simulate(args) -> int:
    if args.scenario not in assets.SCENARIOS:
        raise InputError(args.scenario, f"unknown scenario; choose from {', '.join(assets.SCENARIOS)}")
    controllers = [load_controller_ref(ref) for ref in args.controller]
    specs = load_specs_ref(args.specs)
    cfg = RunConfig(max_steps=args.steps, num_runs=args.runs, seed=args.seed)
    world = scenario_world(args.scenario)
    trace_dir = PipelineConfig(out_dir=args.trace_dir).output_dir() if args.trace_dir else None
    columns = []
    for ref, ctrl in zip(args.controller, controllers):
        traces = run_traces(ctrl, world, cfg, args.jobs)
        ident = ctrl.name or _ident(ref)
        if trace_dir is not None:
            write_trace_log(traces, trace_dir / f"{ident}.traces.jsonl")
        columns.append((ident, stats_from_traces(traces, specs)))
    if args.format == "records":
        for ident, stats in columns:
            for rec in stats.records():
                sys.stdout.write(json.dumps({"controller": ident, "scenario": args.scenario, **rec}, sort_keys=True) + "\n")
        return EXIT_OK
    width = max([len(name) for name, _ in specs] + [4])
    print(f"# scenario {args.scenario}, {cfg.num_runs} runs of at most {cfg.max_steps} steps, seed {cfg.seed}")
    print(f"{'spec':<{width}}" + "".join(f"  {ident:>{max(len(ident), 6)}}" for ident, _ in columns))
    for name, _ in specs:
        row = f"{name:<{width}}"
        for ident, stats in columns:
            row += f"  {stats[name].percentage:>{max(len(ident), 6)}.3f}"
        print(row)
    return EXIT_OK


def cmd_rank(args) -> int:
    tasks = load_prompts_ref(args.prompts)
    model = load_model_ref(args.model)
    specs = load_specs_ref(args.specs)
    if args.samples < 1:
        raise InputError("-m", "need at least one sample per prompt")
    try:
        backend = make_backend(args.backend, seed=args.seed, fixture_path=args.fixtures)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise InputError(args.fixtures or args.backend, f"cannot load fixtures ({exc})") from None
    template = PROFILES[args.profile]
    responses: list[CandidateResponse] = []
    prompt_ids: list[str] = []
    failed = 0
    for i, task in enumerate(tasks):
        pid = f"p{i:03d}"
        prompt = template.task_prompt(task)
        req = GenerationRequest(prompt, args.samples, args.temperature, task=task, prompt_id=pid)
        try:
            texts = generate(req, backend)
        except BackendError as exc:
            print(f"{pid} ({task}): generation failed: {exc}", file=sys.stderr)
            failed += 1
            continue
        prompt_ids.append(pid)
        for text in texts:
            try:
                aligned = backend.align(text)
            except (BackendError, ValueError) as exc:
                print(f"{pid} ({task}): alignment failed: {exc}", file=sys.stderr)
                aligned = ""
            responses.append(CandidateResponse(pid, aligned, prompt=prompt, original=text))
    cfg = RunConfig(max_steps=args.steps, num_runs=args.runs, seed=args.seed)
    scored = score_all(responses, model, specs, args.mode, jobs=args.jobs, cfg=cfg)
    grouped: dict[str, list[CandidateResponse]] = {pid: [] for pid in prompt_ids}
    for r in scored:
        grouped[r.prompt_id].append(r)
    pairs, summary = make_pairs(grouped)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    emit_dataset(pairs, out)
    rec = {
        "prompts": len(tasks),
        "failed_prompts": failed,
        "responses": summary.responses,
        "duplicates": summary.duplicates,
        "pairs": summary.pairs,
        "ties": summary.ties,
        "dataset": str(out),
    }
    if args.format == "records":
        print(json.dumps(rec, sort_keys=True))
    else:
        print(
            f"prompts: {rec['prompts']} ({failed} failed)  responses: {rec['responses']}"
            f" ({rec['duplicates']} duplicates dropped)  pairs: {rec['pairs']}  ties skipped: {rec['ties']}"
        )
        print(f"dataset written to {out}")
    return EXIT_OK


def cmd_export_smv(args) -> int:
    model = load_model_ref(args.model)
    controller = load_controller_ref(args.controller)
    specs = load_specs_ref(args.specs)
    text = export_smv(model, controller, specs)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_label(text: str, props: set[str], where: str) -> frozenset[str]:
    text = text.strip()
    if text in ("", "{}", "-"):
        return frozenset()
    label = frozenset(p.strip() for p in text.split("+"))
    unknown = sorted(label - props)
    if unknown:
        raise InputError(where, f"unknown proposition {unknown[0]!r}")
    return label


def _relation(phi: Formula):
    """Transition predicate from a formula where ``X p`` refers to the successor's label."""
    for sub in subformulas(phi):
        if isinstance(sub, (Until, Eventually, Always)):
            raise ValueError("only X may appear in a transition relation")
    return lambda a, b: eval_finite(phi, [a, b])


def cmd_build_model(args) -> int:
    props = [p.strip() for p in args.props.split(",") if p.strip()]
    if not props:
        raise InputError("--props", "need at least one proposition")
    pset = set(props)
    pairs = []
    for i, spec in enumerate(args.pair or [], start=1):
        if ":" not in spec:
            raise InputError(f"--pair #{i}", "expected FROM:TO with '+'-joined labels")
        src, dst = spec.split(":", 1)
        pairs.append((_parse_label(src, pset, f"--pair #{i}"), _parse_label(dst, pset, f"--pair #{i}")))
    predicates = []
    if pairs:
        allowed = set(pairs)
        predicates.append(lambda a, b: (a, b) in allowed)
    if args.relation:
        try:
            predicates.append(_relation(parse_ltl(args.relation, props)))
        except (LtlSyntaxError, UnknownProposition, ValueError) as exc:
            raise InputError("--relation", str(exc)) from None
    if not predicates:
        raise InputError("build-model", "give --pair or --relation")
    try:
        model = build_model(props, lambda a, b: any(f(a, b) for f in predicates), not args.keep_isolated, args.name)
    except SpecFeedbackError as exc:
        raise InputError("--props", str(exc)) from None
    text = dump_model(model)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--format", choices=("text", "records"), default="text", help="output style")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specfeedback", description="Verify and rank step-list controllers against LTL rules.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="model-check a controller against every spec")
    p.add_argument("model", help="model JSON file or @bundled_name")
    p.add_argument("controller", help="controller JSON, .steps file, or @bundled_name")
    p.add_argument("--specs", default="@driving_rules", help="spec file (NAME := FORMULA per line)")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="estimate per-spec satisfaction over seeded runs")
    p.add_argument("controller", nargs="+", help="one or more controllers; one column each")
    p.add_argument("--scenario", required=True, help=f"one of {', '.join(assets.SCENARIOS)}")
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--steps", type=int, default=20, help="maximum steps per run")
    p.add_argument("--specs", default="@driving_rules")
    p.add_argument("--trace-dir", default="traces", help="directory for JSONL trace logs ('' to skip)")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rank", help="sample, align, score and pair responses into a preference dataset")
    p.add_argument("prompts", help="task list file (one per line) or @driving_tasks")
    p.add_argument("--backend", choices=("mock", "fixture", "http"), default="mock")
    p.add_argument("--fixtures", help="fixture corpus JSON for the fixture or mock backend")
    p.add_argument("--model", default="@traffic_light_intersection")
    p.add_argument("--specs", default="@driving_rules")
    p.add_argument("-m", "--samples", type=int, default=4, help="responses per prompt")
    p.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE)
    p.add_argument("--profile", choices=sorted(PROFILES), default="plain", help="prompt format")
    p.add_argument("--mode", choices=("formal", "empirical"), default="formal")
    p.add_argument("--runs", type=int, default=200, help="runs per response in empirical mode")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--out", default="preferences.jsonl")
    _common(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("export-smv", help="write an SMV module for an external model checker")
    p.add_argument("model")
    p.add_argument("controller")
    p.add_argument("--specs", default="@driving_rules")
    p.add_argument("--out", help="output file (default stdout)")
    _common(p)
    p.set_defaults(func=cmd_export_smv)

    p = sub.add_parser("build-model", help="enumerate a transition system over a set of propositions")
    p.add_argument("--props", required=True, help="comma-separated propositions")
    p.add_argument("--pair", action="append", help="allowed move FROM:TO, labels joined by '+', '{}' for empty")
    p.add_argument("--relation", help="formula over a move; X p means p holds after it")
    p.add_argument("--keep-isolated", action="store_true", help="keep states without edges")
    p.add_argument("--name", default="")
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=cmd_build_model)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, SpecFeedbackError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
