"""Uniform text-generation and sentiment-prediction interface.

Two backends: a remote OpenAI-compatible chat-completions endpoint and a
deterministic scripted mock for tests and offline runs. The gateway layers
retries, empty-completion handling and bounded concurrency on top; results
of batched calls are always delivered in input order.
"""
from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Final, Iterable, Mapping, Protocol, Sequence, TypeVar, Union

import requests

from .corpus import POLARITY_ORDER, Polarity
from .errors import DataError, GatewayError

#: Prediction outcome for completions with zero or multiple label keywords.
UNPARSEABLE: Final[str] = "unparseable"

Prediction = Union[Polarity, str]

PREDICTION_INSTRUCTION = "Predict the sentiment of the given aspect in the text."

_ABSA_PROMPT = (
    PREDICTION_INSTRUCTION
    + '\n\nText: "{sentence}"\nAspect: "{aspect}"\nSentiment:'
)

T = TypeVar("T")
R = TypeVar("R")


def escape_field(value: str) -> str:
    """Backslash-escape quotes (and backslashes, so the escaping stays
    unambiguous); prompt templates wrap fields in double quotes."""
    return value.replace("\\", "\\\\").replace('"', '\\"')


def absa_prompt(sentence: str, aspect: str) -> str:
    """The sentiment-prediction prompt for one (sentence, aspect) pair."""
    return _ABSA_PROMPT.format(sentence=escape_field(sentence), aspect=escape_field(aspect))


def parse_polarity_response(completion: str) -> Prediction:
    """Extract a polarity from a model completion.

    Scans the first line, case-insensitively, for the three label keywords.
    Exactly one distinct keyword maps to that label; zero or several yield
    UNPARSEABLE. Total: no input raises.
    """
    stripped = completion.strip()
    first_line = stripped.splitlines()[0].lower() if stripped else ""
    found = [p for p in POLARITY_ORDER if p.value in first_line]
    if len(found) == 1:
        return found[0]
    return UNPARSEABLE


@dataclass(frozen=True)
class GenRequest:
    prompt: str
    n_samples: int = 1
    temperature: float = 1.0
    top_k: int | None = 50
    max_tokens: int = 128
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class GenResponse:
    completions: tuple[str, ...]
    backend_id: str


class Backend(Protocol):
    backend_id: str

    def complete(self, req: GenRequest) -> list[str]:
        """Return exactly req.n_samples raw completions."""
        ...


class OpenAIBackend:
    """POST /chat/completions against an OpenAI-compatible server.

    ``base_url`` should include the API prefix (e.g. http://host:8000/v1).
    The API key is read from the environment; absent keys fall back to
    "EMPTY", which local inference servers accept.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "OPENAI_API_KEY",
        timeout_s: float = 60.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.backend_id = f"openai:{model}@{self.base_url}"

    def complete(self, req: GenRequest) -> list[str]:
        import os

        payload: dict = {
            "model": self.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "n": req.n_samples,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        if req.seed is not None:
            payload["seed"] = req.seed
        if req.top_k is not None:
            # Not part of the OpenAI schema but honored by common
            # open-source serving stacks; ignored elsewhere.
            payload["top_k"] = req.top_k
        headers = {
            "Content-Type": "application/json",
            "Authorization": f"Bearer {os.environ.get(self.api_key_env) or 'EMPTY'}",
        }
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=headers,
                timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise GatewayError(f"transport error talking to {self.backend_id}: {exc}") from exc
        if resp.status_code // 100 != 2:
            excerpt = resp.text[:200]
            raise GatewayError(
                f"{self.backend_id} returned HTTP {resp.status_code}: {excerpt}"
            )
        try:
            choices = resp.json()["choices"]
            completions = [c["message"]["content"] or "" for c in choices]
        except (ValueError, KeyError, TypeError) as exc:
            raise GatewayError(f"{self.backend_id} returned an unexpected body") from exc
        if len(completions) != req.n_samples:
            raise GatewayError(
                f"{self.backend_id} returned {len(completions)} choices, expected {req.n_samples}"
            )
        return completions


class MockBackend:
    """Deterministic scripted backend.

    A script is a sequence of entries, each a list of completions keyed by
    either the exact prompt (``prompt`` / ``prompt_sha256``) or a sequence
    index. Prompts without an explicit key consume sequence entries in
    order; a prompt keeps the entry it was first served, so retries of the
    same logical request are stable. Single-threaded by design.
    """

    backend_id = "mock"

    def __init__(self, script: Iterable[Mapping] = ()) -> None:
        self._by_hash: dict[str, list[str]] = {}
        indexed: list[tuple[int, list[str]]] = []
        for pos, entry in enumerate(script):
            completions = list(entry["completions"])
            if "prompt" in entry:
                self._by_hash[self._hash(entry["prompt"])] = completions
            elif "prompt_sha256" in entry:
                self._by_hash[entry["prompt_sha256"]] = completions
            else:
                indexed.append((int(entry.get("index", pos)), completions))
        indexed.sort(key=lambda pair: pair[0])
        self._sequence: list[list[str]] = [completions for _, completions in indexed]
        self._assigned: dict[str, list[str]] = {}
        self._cursor = 0

    @staticmethod
    def _hash(prompt: str) -> str:
        return hashlib.sha256(prompt.encode("utf-8")).hexdigest()

    @classmethod
    def from_completions(cls, batches: Sequence[Sequence[str]]) -> "MockBackend":
        """Sequential script: the i-th unseen prompt gets the i-th batch."""
        return cls([{"index": i, "completions": list(b)} for i, b in enumerate(batches)])

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "MockBackend":
        entries = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                entries.append(json.loads(line))
        return cls(entries)

    def complete(self, req: GenRequest) -> list[str]:
        key = self._hash(req.prompt)
        entry = self._by_hash.get(key)
        if entry is None:
            entry = self._assigned.get(key)
        if entry is None:
            if self._cursor >= len(self._sequence):
                raise GatewayError(
                    f"mock script exhausted (no entry for prompt starting {req.prompt[:60]!r})"
                )
            entry = self._sequence[self._cursor]
            self._assigned[key] = entry
            self._cursor += 1
        if len(entry) < req.n_samples:
            raise GatewayError(
                f"mock script entry has {len(entry)} completions, request needs {req.n_samples}"
            )
        return list(entry[: req.n_samples])


class LlmGateway:
    """Retry and concurrency wrapper around a backend."""

    def __init__(
        self,
        backend: Backend,
        *,
        retries: int = 3,
        retry_backoff_s: float = 0.5,
        concurrency: int = 4,
        predict_max_tokens: int = 16,
    ) -> None:
        if retries < 1:
            raise ValueError("retries must be >= 1")
        self.backend = backend
        self.retries = retries
        self.retry_backoff_s = retry_backoff_s
        self.concurrency = concurrency
        self.predict_max_tokens = predict_max_tokens

    def generate(self, req: GenRequest) -> GenResponse:
        """Run one generation request; completions come back trimmed.

        Backend failures and empty completions are retried up to the retry
        budget, then surfaced as GatewayError.
        """
        last_err: GatewayError | None = None
        for attempt in range(self.retries):
            if attempt and self.retry_backoff_s:
                time.sleep(self.retry_backoff_s * attempt)
            try:
                raw = self.backend.complete(req)
            except GatewayError as exc:
                last_err = exc
                continue
            completions = tuple(c.strip() for c in raw)
            if len(completions) != req.n_samples:
                last_err = GatewayError(
                    f"{self.backend.backend_id} returned {len(completions)} completions, "
                    f"expected {req.n_samples}"
                )
                continue
            if any(not c for c in completions):
                last_err = GatewayError(
                    f"{self.backend.backend_id} returned an empty completion"
                )
                continue
            return GenResponse(completions=completions, backend_id=self.backend.backend_id)
        raise GatewayError(
            f"generation failed after {self.retries} attempts via "
            f"{self.backend.backend_id}: {last_err}"
        )

    def predict_sentiment(self, sentence: str, aspect: str) -> Prediction:
        """Predict the polarity of ``aspect`` in ``sentence`` (temperature 0)."""
        if not sentence.strip():
            raise DataError("cannot predict sentiment of an empty sentence")
        if not aspect.strip():
            raise DataError("cannot predict sentiment of an empty aspect")
        req = GenRequest(
            prompt=absa_prompt(sentence, aspect),
            n_samples=1,
            temperature=0.0,
            top_k=None,
            max_tokens=self.predict_max_tokens,
        )
        resp = self.generate(req)
        return parse_polarity_response(resp.completions[0])

    def map_ordered(self, fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
        """Apply ``fn`` over ``items`` with bounded concurrency, keeping order.

        The mock backend is single-threaded, so mock-backed gateways always
        run sequentially and stay deterministic.
        """
        workers = 1 if isinstance(self.backend, MockBackend) else self.concurrency
        workers = min(workers, max(len(items), 1))
        if workers <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
