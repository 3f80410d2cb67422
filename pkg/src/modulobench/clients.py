"""Answer generators: remote chat endpoints, transcript replay, scripts and the oracle.

Every generator returns ``(text, GeneratorUsage)`` from ``propose`` and, when
given a transcript, appends one entry per call.  Replay looks answers up by
the SHA-256 of the prompt, so a recorded batch can be rerun offline.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import httpx

REMOTE, REPLAY, SCRIPTED, ORACLE = "remote", "replay", "scripted", "oracle"
GENERATOR_KINDS = (REMOTE, REPLAY, SCRIPTED, ORACLE)

# chat-completions convention; dotted paths reach into nested objects
DEFAULT_USAGE_FIELDS = {
    "input": "prompt_tokens",
    "output": "completion_tokens",
    "reasoning": "completion_tokens_details.reasoning_tokens",
}


class GeneratorError(RuntimeError):
    pass


class TransportError(GeneratorError):
    """The endpoint could not be reached or kept failing after all retries."""


class AuthError(GeneratorError):
    pass


class ReplayMiss(GeneratorError):
    """The transcript has no answer for this prompt."""


@dataclass(frozen=True)
class GeneratorUsage:
    input_tokens: int = 0
    output_tokens: int = 0
    reasoning_tokens: int = 0
    latency_s: float = 0.0

    def __post_init__(self):
        if min(self.input_tokens, self.output_tokens, self.reasoning_tokens) < 0 or self.latency_s < 0:
            raise ValueError("usage counts must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorUsage":
        return cls(int(d.get("input_tokens", 0)), int(d.get("output_tokens", 0)),
                   int(d.get("reasoning_tokens", 0)), float(d.get("latency_s", 0.0)))


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 4
    backoff_s: float = 2.0
    max_backoff_s: float = 60.0

    def delay(self, attempt: int) -> float:
        return min(self.max_backoff_s, self.backoff_s * 2 ** (attempt - 1))


@dataclass(frozen=True)
class GeneratorConfig:
    kind: str
    model: str | None = None
    endpoint: str | None = None
    temperature: float = 1.0
    timeout_s: float = 600.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    api_key_env: str = "OPENAI_API_KEY"
    transcript: str | None = None
    max_concurrency: int = 4
    requests_per_minute: float | None = None
    usage_fields: dict = field(default_factory=lambda: dict(DEFAULT_USAGE_FIELDS))
    reasoning_in_output: bool = True  # provider counts reasoning inside completion tokens

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.kind == REMOTE and not (self.endpoint and self.model):
            raise ValueError("a remote generator needs an endpoint and a model")
        if self.kind == REPLAY and not self.transcript:
            raise ValueError("a replay generator needs a transcript path")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be at least 1")

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        d = dict(d)
        if "retry" in d:
            d["retry"] = RetryPolicy(**d["retry"])
        if "usage_fields" in d:
            d["usage_fields"] = {**DEFAULT_USAGE_FIELDS, **d["usage_fields"]}
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TranscriptEntry:
    prompt_hash: str
    response: str
    usage: GeneratorUsage
    timestamp: str = ""
    model: str | None = None
    task_id: str | None = None

    def to_json(self) -> str:
        d = asdict(self)
        d["usage"] = self.usage.to_dict()
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "TranscriptEntry":
        d = json.loads(line)
        d["usage"] = GeneratorUsage.from_dict(d["usage"])
        return cls(**d)


class Transcript:
    """Append-only JSONL log of generator calls; safe to share between threads."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self.entries: list = []
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self.entries = self.read(self.path)

    @staticmethod
    def read(path) -> list:
        with open(path, encoding="utf-8") as f:
            return [TranscriptEntry.from_json(line) for line in f if line.strip()]

    def append(self, entry: TranscriptEntry) -> None:
        with self._lock:
            self.entries.append(entry)
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(entry.to_json() + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class Generator:
    """Base class; subclasses implement ``_propose``."""

    kind = ""

    def __init__(self, model: str | None = None, transcript: Transcript | None = None):
        self.model = model or self.kind
        self.transcript = transcript

    def propose(self, prompt: str, task=None) -> tuple:
        text, usage = self._propose(prompt, task)
        if self.transcript is not None:
            self.transcript.append(TranscriptEntry(prompt_hash(prompt), text, usage, _now(), self.model,
                                                   getattr(task, "id", None)))
        return text, usage

    def _propose(self, prompt: str, task):
        raise NotImplementedError

    def close(self) -> None:
        pass


class OracleGenerator(Generator):
    """Answers with the toolkit's own solvers; reports no tokens."""

    kind = ORACLE

    def __init__(self, model: str | None = None, transcript: Transcript | None = None, limits=None):
        super().__init__(model, transcript)
        self.limits = limits

    def _propose(self, prompt, task):
        from .tasks import oracle_answer

        if task is None:
            raise GeneratorError("the oracle generator needs the task, not just the prompt")
        t0 = time.perf_counter()
        text = oracle_answer(task, self.limits)
        return text, GeneratorUsage(latency_s=time.perf_counter() - t0)


ORACLE_ANSWER = object()  # script item standing for the oracle's answer


class ScriptedGenerator(Generator):
    """Plays a fixed script per task.

    ``script`` is either a sequence of items or a callable ``(task, attempt)``
    returning one.  An item is a response string, ``ORACLE_ANSWER``, or a
    callable ``(prompt, task)``.  Past the end of a sequence the last item
    repeats.  Attempts are counted per task id.
    """

    kind = SCRIPTED

    def __init__(self, script, usage: GeneratorUsage | Callable | None = None,
                 model: str | None = None, transcript: Transcript | None = None):
        super().__init__(model, transcript)
        if not callable(script) and not script:
            raise ValueError("empty script")
        self.script = script
        self.usage = usage or GeneratorUsage()
        self._attempts: dict = {}
        self._lock = threading.Lock()

    def _propose(self, prompt, task):
        key = getattr(task, "id", None)
        with self._lock:
            attempt = self._attempts.get(key, 0) + 1
            self._attempts[key] = attempt
        if callable(self.script):
            item = self.script(task, attempt)
        else:
            item = self.script[min(attempt, len(self.script)) - 1]
        if item is ORACLE_ANSWER:
            from .tasks import oracle_answer

            text = oracle_answer(task)
        elif callable(item):
            text = item(prompt, task)
        else:
            text = item
        usage = self.usage(prompt, text) if callable(self.usage) else self.usage
        return text, usage


class ReplayGenerator(Generator):
    """Serves answers recorded in a transcript.

    Entries are matched on the prompt hash and, when recorded, the task id.  A
    prompt seen several times for one task (a repeated wrong answer gives a
    repeated follow-up prompt) replays its entries in recorded order, and the
    last one repeats once they run out.
    """

    kind = REPLAY

    def __init__(self, path, model: str | None = None, transcript: Transcript | None = None):
        entries = Transcript.read(path)
        super().__init__(model or (entries[0].model if entries else None), transcript)
        self.path = Path(path)
        self.table: dict = {}
        for e in entries:
            self.table.setdefault((e.task_id, e.prompt_hash), []).append(e)
            self.table.setdefault((None, e.prompt_hash), []).append(e)
        self._cursor: dict = {}
        self._lock = threading.Lock()

    def _propose(self, prompt, task):
        h = prompt_hash(prompt)
        task_id = getattr(task, "id", None)
        key = (task_id, h) if (task_id, h) in self.table else (None, h)
        found = self.table.get(key)
        if not found:
            where = f" (task {task_id})" if task_id is not None else ""
            raise ReplayMiss(f"no recorded answer for prompt {h[:12]}{where} in {self.path}")
        with self._lock:
            n = self._cursor.get(key, 0)
            self._cursor[key] = n + 1
        entry = found[min(n, len(found) - 1)]
        return entry.response, entry.usage


def _dig(obj, dotted: str):
    for key in dotted.split("."):
        if not isinstance(obj, dict) or key not in obj or obj[key] is None:
            return 0
        obj = obj[key]
    return obj


class _RateLimiter:
    def __init__(self, per_minute: float | None):
        self.interval = 60.0 / per_minute if per_minute else 0.0
        self._next = 0.0
        self._lock = threading.Lock()

    def wait(self) -> None:
        if not self.interval:
            return
        with self._lock:
            now = time.monotonic()
            start = max(now, self._next)
            self._next = start + self.interval
        if start > now:
            time.sleep(start - now)


class RemoteGenerator(Generator):
    """Chat-completions client with retries, a concurrency cap and a request rate cap."""

    kind = REMOTE
    RETRY_STATUS = {408, 409, 429, 500, 502, 503, 504}

    def __init__(self, config: GeneratorConfig, transcript: Transcript | None = None,
                 client: httpx.Client | None = None, sleep: Callable[[float], None] = time.sleep):
        super().__init__(config.model, transcript)
        self.config = config
        key = os.environ.get(config.api_key_env)
        if not key:
            raise AuthError(f"environment variable {config.api_key_env} is not set")
        self._headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}
        self._client = client or httpx.Client(timeout=config.timeout_s)
        self._slots = threading.BoundedSemaphore(config.max_concurrency)
        self._rate = _RateLimiter(config.requests_per_minute)
        self._sleep = sleep
        self.requests_sent = 0

    def _request(self, body: dict) -> dict:
        retry = self.config.retry
        last = None
        for attempt in range(1, retry.max_attempts + 1):
            self._rate.wait()
            try:
                with self._slots:
                    self.requests_sent += 1
                    resp = self._client.post(self.config.endpoint, json=body, headers=self._headers)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
            else:
                if resp.status_code in (401, 403):
                    raise AuthError(f"endpoint rejected the credentials ({resp.status_code})")
                if resp.status_code < 400:
                    return resp.json()
                if resp.status_code not in self.RETRY_STATUS:
                    raise GeneratorError(f"request failed with status {resp.status_code}: {resp.text[:200]}")
                last = f"status {resp.status_code}"
            if attempt < retry.max_attempts:
                self._sleep(retry.delay(attempt))
        raise TransportError(f"giving up after {retry.max_attempts} attempts ({last})")

    def usage_from(self, payload: dict, latency_s: float) -> GeneratorUsage:
        raw = payload.get("usage") or {}
        fields = self.config.usage_fields
        inp = int(_dig(raw, fields["input"]))
        out = int(_dig(raw, fields["output"]))
        reasoning = int(_dig(raw, fields["reasoning"]))
        if self.config.reasoning_in_output:
            out = max(0, out - reasoning)
        return GeneratorUsage(inp, out, reasoning, latency_s)

    def _propose(self, prompt, task):
        body = {"model": self.config.model, "messages": [{"role": "user", "content": prompt}],
                "temperature": self.config.temperature}
        t0 = time.perf_counter()
        payload = self._request(body)
        latency = time.perf_counter() - t0
        try:
            text = payload["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise GeneratorError(f"malformed completion payload: {exc!r}") from None
        return text, self.usage_from(payload, latency)

    def close(self) -> None:
        self._client.close()


def build_generator(config: GeneratorConfig, transcript: Transcript | None = None,
                    script: Sequence | Callable | None = None) -> Generator:
    if config.kind == ORACLE:
        return OracleGenerator(config.model, transcript)
    if config.kind == REPLAY:
        return ReplayGenerator(config.transcript, config.model, transcript)
    if config.kind == SCRIPTED:
        if script is None:
            raise ValueError("a scripted generator needs a script")
        return ScriptedGenerator(script, model=config.model, transcript=transcript)
    return RemoteGenerator(config, transcript)


TRANSLATE_PROMPT = (
    "Rewrite the plan in the answer below as PDDL actions, one per line, each in parentheses "
    "like (action arg1 arg2). Use only these action names: {actions}. Output the actions and "
    "nothing else.\n\nAnswer:\n{text}\n"
)


def make_translator(generator: Generator, domain) -> Callable[[str], str]:
    """Callable that asks ``generator`` to restate a free-form answer as PDDL steps."""
    actions = ", ".join(a.name for a in domain.actions)

    def translate(text: str) -> str:
        out, _ = generator.propose(TRANSLATE_PROMPT.format(actions=actions, text=text))
        return out

    return translate
