"""Prompt templates, an HTTP chat-completions client and offline backends."""

from __future__ import annotations

import json
import logging
import os
import random
import re
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import httpx

from .errors import AuthError, BackendError, EndpointUnreachable, MalformedResponse
from .vocabulary import DRIVING, Vocabulary, phrase

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.8
ENV_URL = "SPECFEEDBACK_BASE_URL"
ENV_TOKEN = "SPECFEEDBACK_API_KEY"
ENV_MODEL = "SPECFEEDBACK_MODEL"


@dataclass(frozen=True)
class PromptTemplate:
    task_template: str = "Define the steps for {task}\n1."
    align_template: str = (
        "Align the following steps to align the set of Boolean propositions {{{props}}} "
        "and actions {{{actions}}}:\n{steps}\n"
    )
    # optional chat wrapper, e.g. the Llama-2 instruction format
    wrapper: str = "{prompt}"
    system: str = ""

    def task_prompt(self, task: str) -> str:
        return self._wrap(self.task_template.format(task=task))

    def align_prompt(self, steps: str, vocabulary: Vocabulary = DRIVING) -> str:
        props = ", ".join(phrase(p) for p in vocabulary.env)
        actions = ", ".join(phrase(a) for a in vocabulary.actions)
        return self._wrap(self.align_template.format(props=props, actions=actions, steps=steps.strip()))

    def _wrap(self, prompt: str) -> str:
        return self.wrapper.format(prompt=prompt, system=self.system)


PLAIN = PromptTemplate()
LLAMA2 = PromptTemplate(
    wrapper="<s>[INST] <<SYS>>\n{system}\n<</SYS>>\n\n{prompt} [/INST]",
    system="You are a careful driving assistant. Reply with detailed, numbered steps.",
)
PROFILES = {"plain": PLAIN, "llama2": LLAMA2}


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str = ""
    token: str | None = None
    model: str = ""

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> EndpointConfig:
        env = os.environ if env is None else env
        return cls(env.get(ENV_URL, ""), env.get(ENV_TOKEN), env.get(ENV_MODEL, ""))


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    num_samples: int = 1
    temperature: float = DEFAULT_TEMPERATURE
    task: str | None = None
    prompt_id: str = ""
    timeout: float = 30.0
    endpoint: EndpointConfig = field(default_factory=EndpointConfig)

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be at least 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


_TASK_PATTERNS = (
    re.compile(r"Define the steps for (.+?)\s*\n"),
    re.compile(r'Steps for\s+["“](.+?)["”]'),
)


def normalize_task(task: str) -> str:
    t = task.strip().strip("\"'“”").lower()
    t = re.sub(r"\bthe\s+", "", t)
    return re.sub(r"\s+", " ", t)


def task_of(req: GenerationRequest) -> str:
    if req.task:
        return req.task
    for pat in _TASK_PATTERNS:
        m = pat.search(req.prompt)
        if m:
            return m.group(1)
    return req.prompt.strip()


class Backend:
    name = "backend"

    def generate(self, req: GenerationRequest) -> list[str]:
        raise NotImplementedError

    def align(self, raw_steps: str, vocabulary: Vocabulary = DRIVING) -> str:
        return rule_align(raw_steps, vocabulary)


# -- HTTP -----------------------------------------------------------------------


class HttpBackend(Backend):
    """Chat-completions style endpoint: ``POST {base_url}/chat/completions``."""

    name = "http"

    def __init__(
        self,
        endpoint: EndpointConfig | None = None,
        *,
        retries: int = 3,
        backoff: float = 0.5,
        template: PromptTemplate = PLAIN,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint or EndpointConfig.from_env()
        self.retries = retries
        self.backoff = backoff
        self.template = template
        self.transport = transport
        self.sleep = sleep

    def _client(self, endpoint: EndpointConfig, timeout: float) -> httpx.Client:
        headers = {"Content-Type": "application/json"}
        if endpoint.token:
            headers["Authorization"] = f"Bearer {endpoint.token}"
        return httpx.Client(timeout=timeout, headers=headers, transport=self.transport)

    def _post(self, client: httpx.Client, endpoint: EndpointConfig, body: dict) -> dict:
        url = endpoint.base_url.rstrip("/") + "/chat/completions"
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = client.post(url, json=body)
            except (httpx.TransportError, httpx.TimeoutException) as exc:
                last = exc
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials ({resp.status_code})")
            if resp.status_code == 429 or resp.status_code >= 500:
                last = BackendError(f"transient HTTP {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except json.JSONDecodeError as exc:
                raise MalformedResponse(f"response is not JSON: {exc}") from None
        raise EndpointUnreachable(f"{url} failed after {self.retries + 1} attempts: {last}")

    @staticmethod
    def _texts(payload: dict) -> list[str]:
        try:
            out = [c["message"]["content"] for c in payload["choices"]]
        except (KeyError, TypeError) as exc:
            raise MalformedResponse(f"unexpected response shape: missing {exc}") from None
        if not all(isinstance(t, str) and t.strip() for t in out) or not out:
            raise MalformedResponse("empty completion")
        return out

    def _complete(self, endpoint: EndpointConfig, prompt: str, n: int, temperature: float, timeout: float) -> list[str]:
        if not endpoint.base_url:
            raise EndpointUnreachable(f"no endpoint configured (set {ENV_URL})")
        texts: list[str] = []
        with self._client(endpoint, timeout) as client:
            while len(texts) < n:
                body = {
                    "model": endpoint.model,
                    "messages": [{"role": "user", "content": prompt}],
                    "n": n - len(texts),
                    "temperature": temperature,
                }
                texts.extend(self._texts(self._post(client, endpoint, body)))
        return texts[:n]

    def generate(self, req: GenerationRequest) -> list[str]:
        endpoint = req.endpoint if req.endpoint.base_url else self.endpoint
        out = self._complete(endpoint, req.prompt, req.num_samples, req.temperature, req.timeout)
        for i, _ in enumerate(out):
            log.info("generated response %d for prompt %s", i, req.prompt_id or "-")
        return out

    def align(self, raw_steps: str, vocabulary: Vocabulary = DRIVING) -> str:
        if is_aligned(raw_steps):
            return raw_steps
        prompt = self.template.align_prompt(raw_steps, vocabulary)
        return self._complete(self.endpoint, prompt, 1, 0.0, 30.0)[0].strip()


# -- offline backends -------------------------------------------------------------


def load_fixture_corpus(data: Mapping | None = None) -> dict[str, list[dict]]:
    if data is None:
        from . import assets

        data = assets.fixture("recorded_responses")
    return {normalize_task(k): list(v) for k, v in data["tasks"].items()}


class FixtureBackend(Backend):
    """Serves recorded responses; cycles when more samples are requested than stored."""

    name = "fixture"

    def __init__(self, corpus: Mapping | None = None):
        self.corpus = load_fixture_corpus(corpus)
        self.aligned = {_norm_text(e["raw"]): e["aligned"] for es in self.corpus.values() for e in es}

    def responses_for(self, task: str) -> list[str]:
        return [e["raw"] for e in self.corpus.get(normalize_task(task), [])]

    def generate(self, req: GenerationRequest) -> list[str]:
        known = self.responses_for(task_of(req))
        if not known:
            raise MalformedResponse(f"no fixture responses for task {task_of(req)!r}")
        return [known[i % len(known)] for i in range(req.num_samples)]

    def align(self, raw_steps: str, vocabulary: Vocabulary = DRIVING) -> str:
        hit = self.aligned.get(_norm_text(raw_steps))
        return hit if hit is not None else rule_align(raw_steps, vocabulary)


class MockBackend(FixtureBackend):
    """Fixture responses first, then seeded synthetic aligned step lists."""

    name = "mock"

    def __init__(self, seed: int = 0, corpus: Mapping | None = None, vocabulary: Vocabulary = DRIVING):
        super().__init__(corpus)
        self.seed = seed
        self.vocabulary = vocabulary
        self.calls = 0

    def generate(self, req: GenerationRequest) -> list[str]:
        task = task_of(req)
        known = self.responses_for(task)
        out = known[: req.num_samples]
        i = 0
        while len(out) < req.num_samples:
            rng = random.Random(f"{self.seed}|{normalize_task(task)}|{i}")
            out.append(synthetic_steps(rng, self.vocabulary))
            i += 1
        self.calls += 1
        return out


def synthetic_steps(rng: random.Random, vocabulary: Vocabulary = DRIVING) -> str:
    """A random but well-formed aligned step list."""
    env = list(vocabulary.env)
    acts = list(vocabulary.actions)

    def lit():
        p = phrase(rng.choice(env)).replace("-", " ")
        return f"no {p}" if rng.random() < 0.5 else p

    lines = []
    n = rng.randint(2, 4)
    for k in range(1, n + 1):
        kind = rng.choice(("observe", "if", "if", "wait", "act"))
        if kind == "observe":
            lines.append(f"{k}. <observe {phrase(rng.choice(env)).replace('-', ' ')}>.")
        elif kind == "if":
            act = phrase(rng.choice(acts))
            cond = lit() if rng.random() < 0.6 else f"{lit()} and {lit()}"
            tail = f"; <else> <{phrase(rng.choice(acts))}>" if rng.random() < 0.3 else ""
            lines.append(f"{k}. <if> <{cond}>, <{act}>{tail}.")
        elif kind == "wait":
            lines.append(f"{k}. <wait for> <{lit()}>.")
        else:
            lines.append(f"{k}. <{phrase(rng.choice(acts))}>.")
    return "\n".join(lines)


# -- rule-based alignment ------------------------------------------------------------

_ALIGNED_LINE = re.compile(r"^\s*\d+\s*\.\s*<")

# phrase -> aligned proposition phrase; longest keys are tried first
PHRASE_TABLE: dict[str, str] = {
    "traffic light": "traffic light",
    "green traffic light": "green traffic light",
    "green light": "green traffic light",
    "light turns green": "green traffic light",
    "left-turn light": "green left turn light",
    "left turn light": "green left turn light",
    "left-turn signal": "green left turn light",
    "flashing left-turn light": "flashing left turn light",
    "oncoming traffic": "opposite car",
    "oncoming car": "opposite car",
    "opposite car": "opposite car",
    "traffic coming from your left": "car from left",
    "your left for oncoming traffic": "car from left",
    "to your left for traffic": "car from left",
    "traffic from the left": "car from left",
    "car from the left": "car from left",
    "car from left": "car from left",
    "left approaching car": "car from left",
    "cars from the right": "car from right",
    "car from right": "car from right",
    "car from the right": "car from right",
    "pedestrians on your right": "pedestrian at right",
    "pedestrian on the right": "pedestrian at right",
    "right side pedestrian": "pedestrian at right",
    "pedestrian at right": "pedestrian at right",
    "pedestrians on your left": "pedestrian at left",
    "pedestrian at left": "pedestrian at left",
    "pedestrian in front": "pedestrian in front",
    "pedestrians in front": "pedestrian in front",
    "stop sign": "stop sign",
}

ACTION_TABLE: dict[str, str] = {
    "turn your vehicle right": "turn right",
    "turn right": "turn right",
    "turn left": "turn left",
    "start moving forward": "go straight",
    "go straight": "go straight",
    "proceed straight": "go straight",
    "drive straight": "go straight",
    "stop": "stop",
    "come to a stop": "stop",
    "wait": "wait",
}

_OBSERVE = re.compile(r"^(?:.*\b)?(look|watch|observe|check|approach|monitor)\b(?P<rest>.*)$", re.I)
_COND = re.compile(r"^(?:if|when|once)\s+(?P<cond>.+?),\s*(?:then\s+)?(?P<act>.+)$", re.I)
_WAIT = re.compile(r"^wait\s+(?:for|until)\s+(?P<cond>.+)$", re.I)
_SAFE = re.compile(r"\b(safe|clear)\b", re.I)
_SIGNALS = frozenset({"traffic light", "green traffic light", "green left turn light", "flashing left turn light", "stop sign"})
_NEGATION = re.compile(r"\b(no|not|isn't|is not|there is no)\b", re.I)


def is_aligned(text: str) -> bool:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    return bool(lines) and all(_ALIGNED_LINE.match(ln) for ln in lines)


def _norm_text(text: str) -> str:
    return "\n".join(re.sub(r"\s+", " ", ln).strip() for ln in text.strip().splitlines() if ln.strip())


def _find(table: Mapping[str, str], text: str) -> list[str]:
    low = text.lower()
    hits = []
    for key in sorted(table, key=len, reverse=True):
        idx = low.find(key)
        if idx >= 0:
            hits.append((idx, table[key]))
            low = low[:idx] + " " * len(key) + low[idx + len(key):]
    return [v for _, v in sorted(hits)]


def _align_cond(text: str, pending: list[str] | None = None) -> str:
    found = _find(PHRASE_TABLE, text)
    if not found:
        hazards = [p for p in pending or () if p not in _SIGNALS]
        if _SAFE.search(text) and hazards:
            return " and ".join(f"no {p}" for p in hazards)
        return text.strip().rstrip(".")
    negated = bool(_NEGATION.search(text))
    parts = [f"no {p}" if negated else p for p in dict.fromkeys(found)]
    return " and ".join(parts)


def _observed(text: str) -> list[str]:
    obs = _OBSERVE.match(text.strip())
    if obs is None or _find(ACTION_TABLE, text):
        return []
    return list(dict.fromkeys(_find(PHRASE_TABLE, obs.group("rest"))))


def _align_act(text: str) -> str:
    """Bracketed aligned effect, possibly several observations joined by ``<and>``."""
    obs = _OBSERVE.match(text.strip())
    if obs and not _find(ACTION_TABLE, text):
        verb = obs.group(1).lower()
        verb = verb if verb in ("check", "approach") else "observe"
        targets = _observed(text)
        if not targets:
            return f"<{verb} {obs.group('rest').strip()}>"
        return " <and> ".join(f"<{verb} {t}>" for t in targets)
    acts = _find(ACTION_TABLE, text)
    return f"<{acts[0] if acts else text.strip().rstrip('.')}>"


def rule_align(raw_steps: str, vocabulary: Vocabulary = DRIVING) -> str:
    """Deterministic phrase-table alignment; unknown phrases pass through in brackets.

    A condition such as "it is safe" stands for the absence of every hazard observed
    since the previous condition.
    """
    if is_aligned(raw_steps):
        return raw_steps
    out: list[str] = []
    pending: list[str] = []
    for k, line in enumerate((ln for ln in raw_steps.splitlines() if ln.strip()), start=1):
        body = re.sub(r"^\s*\d+\s*[.)]\s*", "", line).strip().rstrip(".")
        if (m := _WAIT.match(body)) is not None:
            out.append(f"{k}. <wait for> <{_align_cond(m.group('cond'), pending)}>.")
            pending = []
        elif (m := _COND.match(body)) is not None:
            out.append(f"{k}. <if> <{_align_cond(m.group('cond'), pending)}>, {_align_act(m.group('act'))}.")
            pending = _observed(m.group("act"))
        else:
            out.append(f"{k}. {_align_act(body)}.")
            pending += [p for p in _observed(body) if p not in pending]
    return "\n".join(out)


def align(raw_steps: str, vocabulary: Vocabulary = DRIVING, backend: Backend | None = None) -> str:
    if not raw_steps.strip():
        raise ValueError("nothing to align")
    backend = backend or MockBackend()
    return backend.align(raw_steps, vocabulary)


def generate(req: GenerationRequest, backend: Backend) -> list[str]:
    out = backend.generate(req)
    if len(out) != req.num_samples:
        raise MalformedResponse(f"expected {req.num_samples} responses, got {len(out)}")
    return out


def make_backend(kind: str, seed: int = 0, fixture_path: str | None = None) -> Backend:
    if kind == "mock":
        return MockBackend(seed)
    if kind == "fixture":
        if fixture_path:
            with open(fixture_path, encoding="utf-8") as fh:
                return FixtureBackend(json.load(fh))
        return FixtureBackend()
    if kind == "http":
        return HttpBackend()
    raise ValueError(f"unknown backend {kind!r}")


__all__ = [
    "Backend", "EndpointConfig", "FixtureBackend", "GenerationRequest", "HttpBackend", "LLAMA2", "MockBackend",
    "PLAIN", "PROFILES", "PromptTemplate", "align", "generate", "is_aligned", "make_backend", "normalize_task",
    "rule_align", "synthetic_steps", "task_of",
]

