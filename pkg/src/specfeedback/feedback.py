"""Rank candidate responses by specification compliance and build preference pairs."""

from __future__ import annotations

import itertools
import json
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .automata import ControllerFsa, TransitionSystem, parse_steps, steps_to_controller, with_props
from .empirical import ModelWorld, RunConfig, SatisfactionStats, World, evaluate_runs
from .errors import EmptyStepList, LtlSyntaxError, StepSyntaxError, UnknownProposition
from .logic import Formula
from .modelcheck import VerificationReport, check_all
from .product import build_product
from .vocabulary import DRIVING, Vocabulary

EMPIRICAL_THRESHOLD = 1.0
# alignment failures sort below any response that parsed
FAILED_RANK = -1

_ALIGNMENT_ERRORS = (StepSyntaxError, UnknownProposition, EmptyStepList, LtlSyntaxError)


@dataclass(frozen=True)
class CandidateResponse:
    prompt_id: str
    raw_text: str
    prompt: str = ""
    # text as the language model produced it; raw_text holds the aligned form
    original: str = ""
    controller: ControllerFsa | None = None
    report: VerificationReport | None = None
    stats: SatisfactionStats | None = None
    satisfied_count: int = 0
    alignment_failed: bool = False
    error: str = ""
    scored: bool = False

    @property
    def text(self) -> str:
        return self.original or self.raw_text

    @property
    def rank_score(self) -> int:
        return FAILED_RANK if self.alignment_failed else self.satisfied_count


@dataclass(frozen=True)
class PreferencePair:
    prompt: str
    chosen: str
    rejected: str
    score_chosen: int
    score_rejected: int

    def __post_init__(self):
        if self.score_chosen <= self.score_rejected:
            raise ValueError("the chosen response must score strictly higher")

    def to_record(self) -> dict:
        return {
            "prompt": self.prompt,
            "chosen": self.chosen,
            "rejected": self.rejected,
            "score_chosen": self.score_chosen,
            "score_rejected": self.score_rejected,
        }


def score(
    resp: CandidateResponse,
    model: TransitionSystem,
    specs: Sequence[tuple[str, Formula]],
    mode: str = "formal",
    *,
    vocabulary: Vocabulary = DRIVING,
    world: World | None = None,
    cfg: RunConfig | None = None,
    threshold: float = EMPIRICAL_THRESHOLD,
) -> CandidateResponse:
    """Parse, build the controller and count satisfied specifications."""
    if mode not in ("formal", "empirical"):
        raise ValueError(f"unknown scoring mode {mode!r}")
    try:
        steps = parse_steps(resp.raw_text, vocabulary.all_env, vocabulary.actions)
    except _ALIGNMENT_ERRORS as exc:
        return replace(resp, alignment_failed=True, satisfied_count=0, error=str(exc), scored=True)
    controller = steps_to_controller(steps, vocabulary.actions, name=resp.prompt_id)
    # a proposition the scenario never mentions is simply never observed
    model = with_props(model, sorted(controller.read_props()))
    if mode == "formal":
        report = check_all(build_product(model, controller), specs, resp.prompt_id)
        return replace(resp, controller=controller, report=report, satisfied_count=report.satisfied_count, scored=True)
    world = world if world is not None else ModelWorld(model)
    stats = evaluate_runs(controller, world, cfg or RunConfig(), specs)
    count = len(stats.satisfied_specs(threshold))
    return replace(resp, controller=controller, stats=stats, satisfied_count=count, scored=True)


def score_all(
    responses: Sequence[CandidateResponse],
    model: TransitionSystem,
    specs: Sequence[tuple[str, Formula]],
    mode: str = "formal",
    jobs: int = 1,
    **kwargs,
) -> list[CandidateResponse]:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda r: score(r, model, specs, mode, **kwargs), responses))
    return [score(r, model, specs, mode, **kwargs) for r in responses]


def dedupe(responses: Iterable[CandidateResponse]) -> list[CandidateResponse]:
    """Drop exact-duplicate texts within a prompt, keeping first occurrences."""
    seen = set()
    out = []
    for r in responses:
        key = (r.prompt_id, r.text)
        if key not in seen:
            seen.add(key)
            out.append(r)
    return out


@dataclass(frozen=True)
class PairingSummary:
    prompts: int
    responses: int
    pairs: int
    ties: int
    duplicates: int


def make_pairs(
    grouped: Mapping[str, Sequence[CandidateResponse]] | Iterable[CandidateResponse],
) -> tuple[list[PreferencePair], PairingSummary]:
    """One pair per unordered response pair with differing scores, per prompt."""
    if isinstance(grouped, Mapping):
        groups = {k: list(v) for k, v in grouped.items()}
    else:
        groups = {}
        for r in grouped:
            groups.setdefault(r.prompt_id, []).append(r)
    pairs: list[PreferencePair] = []
    ties = dups = total = 0
    for pid, group in groups.items():
        for r in group:
            if not r.scored:
                raise ValueError(f"response for {pid!r} has not been scored")
        unique = dedupe(group)
        dups += len(group) - len(unique)
        total += len(unique)
        for a, b in itertools.combinations(unique, 2):
            if a.rank_score == b.rank_score:
                ties += 1
                continue
            w, l = (a, b) if a.rank_score > b.rank_score else (b, a)
            prompt = w.prompt or l.prompt or pid
            pairs.append(PreferencePair(prompt, w.text, l.text, w.rank_score, l.rank_score))
    return pairs, PairingSummary(len(groups), total, len(pairs), ties, dups)


def emit_dataset(pairs: Iterable[PreferencePair], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps(p.to_record(), ensure_ascii=False, sort_keys=True) + "\n")
            n += 1
    return n


def read_dataset(path) -> list[PreferencePair]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(PreferencePair(**json.loads(line)))
    return out


__all__ = [
    "CandidateResponse", "PairingSummary", "PreferencePair", "EMPIRICAL_THRESHOLD", "FAILED_RANK",
    "dedupe", "emit_dataset", "make_pairs", "read_dataset", "score", "score_all",
]
