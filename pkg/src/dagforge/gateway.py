"""Uniform chat-completion access with record/replay fixtures and a token ledger.

Three modes:

* ``live``    — POST to the provider's chat endpoint (OpenAI-style payload).
* ``record``  — live call, then persist the exchange under
  ``fixtures/<digest>.json``.
* ``replay``  — serve the stored exchange byte-identically; zero network.

The fixture key is a SHA-256 digest of (system prompt, user prompt, model
key).  Temperature is pinned to 0.0 across the toolchain, so it is excluded
from the key.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import requests

from .errors import AuthError, MissingFixtureError, TransportError

logger = logging.getLogger(__name__)

LIVE = "live"
RECORD = "record"
REPLAY = "replay"

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def count_tokens(text: str, model_key: str = "") -> int:
    """Deterministic local token count (word + punctuation splitting).

    Used as the fallback when the provider does not report usage; the count
    is independent of ``model_key`` by design so replayed sessions stay
    stable across provider configs.
    """
    if not text:
        return 0
    return len(_TOKEN_RE.findall(text))


def fixture_digest(system_prompt: str, user_prompt: str, model_key: str) -> str:
    payload = json.dumps(
        {"system": system_prompt, "user": user_prompt, "model": model_key},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    model_key: str
    temperature: float = 0.0
    max_output_tokens: Optional[int] = None

    @property
    def digest(self) -> str:
        return fixture_digest(self.system_prompt, self.user_prompt, self.model_key)


@dataclass(frozen=True)
class ChatResponse:
    text: str
    input_tokens: int
    output_tokens: int
    provider_reported: bool = False


@dataclass(frozen=True)
class LedgerEntry:
    stage: str
    model_key: str
    input_tokens: int
    output_tokens: int


class TokenLedger:
    """Append-only usage record; appends are atomic, totals are derived."""

    def __init__(self):
        self._entries: list[LedgerEntry] = []
        self._lock = threading.Lock()

    def add(self, stage: str, model_key: str, input_tokens: int, output_tokens: int) -> None:
        entry = LedgerEntry(stage, model_key, int(input_tokens), int(output_tokens))
        with self._lock:
            self._entries.append(entry)

    @property
    def entries(self) -> tuple:
        with self._lock:
            return tuple(self._entries)

    def stage_totals(self) -> dict:
        totals: dict[str, dict[str, int]] = {}
        for entry in self.entries:
            bucket = totals.setdefault(entry.stage, {"input_tokens": 0, "output_tokens": 0})
            bucket["input_tokens"] += entry.input_tokens
            bucket["output_tokens"] += entry.output_tokens
        return totals

    def grand_total(self) -> dict:
        entries = self.entries
        return {
            "input_tokens": sum(e.input_tokens for e in entries),
            "output_tokens": sum(e.output_tokens for e in entries),
            "total_tokens": sum(e.input_tokens + e.output_tokens for e in entries),
        }

    def to_dict(self) -> dict:
        return {
            "entries": [
                {
                    "stage": e.stage,
                    "model_key": e.model_key,
                    "input_tokens": e.input_tokens,
                    "output_tokens": e.output_tokens,
                }
                for e in self.entries
            ],
            "stage_totals": self.stage_totals(),
            "grand_total": self.grand_total(),
        }


@dataclass(frozen=True)
class ProviderConfig:
    """Connection settings for one chat-completion provider.

    Credentials are read from the named environment variable at call time and
    never persisted to artifact files.
    """

    name: str = "replay"
    base_url: str = ""
    credential_env: str = ""
    model_keys: dict = field(default_factory=dict)
    timeout_seconds: float = 60.0
    max_retries: int = 2
    min_interval_seconds: float = 0.0

    def resolve_model(self, model_key: str) -> str:
        return self.model_keys.get(model_key, model_key)


def http_transport(url: str, payload: dict, headers: dict, timeout: float) -> dict:
    response = requests.post(url, json=payload, headers=headers, timeout=timeout)
    response.raise_for_status()
    return response.json()


class Gateway:
    """Shared chat-completion client; safe for concurrent workers.

    The fixture store is read-concurrent and write-serialized; ledger appends
    are atomic; a per-provider minimum-interval gate serializes live dispatch.
    """

    def __init__(
        self,
        provider: ProviderConfig,
        mode: str = REPLAY,
        fixtures_dir: str | Path = "fixtures/llm",
        ledger: Optional[TokenLedger] = None,
        transport: Callable[[str, dict, dict, float], dict] = http_transport,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if mode not in (LIVE, RECORD, REPLAY):
            raise ValueError(f"unknown gateway mode {mode!r}")
        self.provider = provider
        self.mode = mode
        self.fixtures_dir = Path(fixtures_dir)
        self.ledger = ledger if ledger is not None else TokenLedger()
        self._transport = transport
        self._sleep = sleep
        self._write_lock = threading.Lock()
        self._rate_lock = threading.Lock()
        self._last_dispatch = 0.0

    # -- fixture store -----------------------------------------------------

    def _fixture_path(self, digest: str) -> Path:
        return self.fixtures_dir / f"{digest}.json"

    def _load_fixture(self, request: ChatRequest) -> ChatResponse:
        path = self._fixture_path(request.digest)
        if not path.is_file():
            raise MissingFixtureError(
                f"no recorded exchange for model {request.model_key!r}",
                digest=request.digest,
            )
        data = json.loads(path.read_text(encoding="utf-8"))
        stored = data["response"]
        return ChatResponse(
            text=stored["text"],
            input_tokens=int(stored["input_tokens"]),
            output_tokens=int(stored["output_tokens"]),
            provider_reported=bool(stored.get("provider_reported", False)),
        )

    def _store_fixture(self, request: ChatRequest, response: ChatResponse) -> None:
        record = {
            "request": {
                "system_prompt": request.system_prompt,
                "user_prompt": request.user_prompt,
                "model_key": request.model_key,
                "temperature": request.temperature,
            },
            "response": {
                "text": response.text,
                "input_tokens": response.input_tokens,
                "output_tokens": response.output_tokens,
                "provider_reported": response.provider_reported,
            },
        }
        path = self._fixture_path(request.digest)
        with self._write_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(
                json.dumps(record, indent=2, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )
            tmp.replace(path)

    # -- live dispatch -------------------------------------------------------

    def _rate_gate(self) -> None:
        interval = self.provider.min_interval_seconds
        if interval <= 0:
            return
        with self._rate_lock:
            now = time.monotonic()
            wait = self._last_dispatch + interval - now
            if wait > 0:
                self._sleep(wait)
            self._last_dispatch = time.monotonic()

    def _credential(self) -> str:
        env_name = self.provider.credential_env
        if not env_name:
            return ""
        value = os.environ.get(env_name)
        if not value:
            raise AuthError(
                f"credential environment variable {env_name!r} is unset",
                provider=self.provider.name,
            )
        return value

    def _call_live(self, request: ChatRequest) -> ChatResponse:
        credential = self._credential()
        url = self.provider.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.provider.resolve_model(request.model_key),
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
        }
        if request.max_output_tokens is not None:
            payload["max_tokens"] = request.max_output_tokens
        headers = {"Content-Type": "application/json"}
        if credential:
            headers["Authorization"] = f"Bearer {credential}"

        last_error: Exception | None = None
        for attempt in range(self.provider.max_retries + 1):
            self._rate_gate()
            try:
                body = self._transport(url, payload, headers, self.provider.timeout_seconds)
                return self._parse_body(request, body)
            except (requests.RequestException, OSError, ValueError, KeyError) as exc:
                last_error = exc
                logger.warning(
                    "completion attempt %d/%d failed: %s",
                    attempt + 1,
                    self.provider.max_retries + 1,
                    exc,
                )
                if attempt < self.provider.max_retries:
                    self._sleep(min(2.0**attempt, 8.0))
        raise TransportError(
            f"completion failed after {self.provider.max_retries + 1} attempts: "
            f"{last_error}",
            provider=self.provider.name,
        )

    def _parse_body(self, request: ChatRequest, body: dict) -> ChatResponse:
        text = body["choices"][0]["message"]["content"]
        usage = body.get("usage") or {}
        if "prompt_tokens" in usage and "completion_tokens" in usage:
            return ChatResponse(
                text=text,
                input_tokens=int(usage["prompt_tokens"]),
                output_tokens=int(usage["completion_tokens"]),
                provider_reported=True,
            )
        prompt_text = request.system_prompt + "\n" + request.user_prompt
        return ChatResponse(
            text=text,
            input_tokens=count_tokens(prompt_text, request.model_key),
            output_tokens=count_tokens(text, request.model_key),
            provider_reported=False,
        )

    # -- public API ------------------------------------------------------------

    def complete(self, request: ChatRequest, stage: str = "default") -> ChatResponse:
        """Run one chat completion and append exactly one ledger entry."""
        if self.mode == REPLAY:
            response = self._load_fixture(request)
        else:
            response = self._call_live(request)
            if self.mode == RECORD:
                self._store_fixture(request, response)
        self.ledger.add(stage, request.model_key, response.input_tokens, response.output_tokens)
        return response
