"""Chat-completion gateway over OpenAI-compatible endpoints, with a
record/replay transcript for offline deterministic runs, plus extraction of
JSON payloads from model text.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Literal

import httpx

from .errors import (
    ConfigError,
    JsonSyntax,
    NoJsonFound,
    ProviderError,
    ReplayExhausted,
    ReplayMismatch,
    Timeout,
)

log = logging.getLogger(__name__)

API_KEY_ENV = "CREWLINE_API_KEY"
Provider = Literal["remote_chat", "local_chat", "replay"]
Role = Literal["system", "user", "assistant"]

_DEFAULT_URLS = {
    "remote_chat": "https://api.openai.com",
    "local_chat": "http://localhost:11434",
    "replay": "",
}


@dataclass(frozen=True)
class LlmConfig:
    provider: Provider = "replay"
    model: str = "gpt-3.5"
    base_url: str | None = None
    temperature: float = 0.0
    max_output_tokens: int = 1024
    timeout: float = 60.0
    max_retries: int = 3
    max_concurrency: int = 4
    transcript: str | None = None
    api_key: str | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.provider not in _DEFAULT_URLS:
            raise ConfigError(f"unknown provider {self.provider!r}")
        if self.provider == "replay" and not self.transcript:
            raise ConfigError("the replay provider needs a transcript path")
        if not 0 <= self.temperature <= 2:
            raise ConfigError("temperature must be in [0, 2]")
        if self.max_output_tokens < 1 or self.max_retries < 0 or self.max_concurrency < 1:
            raise ConfigError("max_output_tokens and max_concurrency must be positive, max_retries >= 0")

    @property
    def url(self) -> str:
        base = (self.base_url or _DEFAULT_URLS[self.provider]).rstrip("/")
        return f"{base}/v1/chat/completions"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"bad role {self.role!r}")
        if self.role != "assistant" and not self.content.strip():
            raise ValueError(f"{self.role} message must not be empty")

    def to_dict(self) -> dict[str, str]:
        return {"role": self.role, "content": self.content}


def fingerprint(model: str, messages: list[ChatMessage]) -> str:
    payload = json.dumps(
        {"model": model, "messages": [m.to_dict() for m in messages]},
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TranscriptEntry:
    fingerprint: str
    response: str


def load_transcript(path: str | Path) -> list[TranscriptEntry]:
    entries = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                d = json.loads(line)
                entries.append(TranscriptEntry(d["fingerprint"], d["response"]))
    return entries


def transcript_line(entry: TranscriptEntry) -> str:
    return json.dumps({"fingerprint": entry.fingerprint, "response": entry.response}, ensure_ascii=False) + "\n"


class Gateway:
    """Sends chat requests for one ``LlmConfig``.

    ``record_to`` appends every live exchange to a JSON Lines transcript.
    ``transport`` is passed to ``httpx.Client`` (tests and scripted fixtures
    use ``httpx.MockTransport``). ``start`` skips already-consumed replay
    entries and ``append`` extends an existing recording, which lets separate
    stage commands share one transcript.
    """

    def __init__(
        self,
        config: LlmConfig,
        *,
        record_to: str | Path | None = None,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
        start: int = 0,
        append: bool = False,
    ):
        self.config = config
        self._lock = threading.Lock()
        self._sleep = sleep
        self._rng = rng or random.Random(0)
        self._transport = transport
        self._client: httpx.Client | None = None
        self._sem = threading.BoundedSemaphore(config.max_concurrency)
        self.calls = 0
        if config.provider == "replay":
            self._entries = load_transcript(config.transcript)
            self.position = start
        else:
            self._entries = []
            self.position = 0
        self._record_file = None
        if record_to is not None:
            if config.provider == "replay":
                raise ConfigError("cannot record while replaying")
            self._record_file = open(record_to, "a" if append else "w", encoding="utf-8")

    @property
    def parallelism(self) -> int:
        # replayed and recorded sessions must see requests in a fixed order
        if self.config.provider == "replay" or self._record_file is not None:
            return 1
        return self.config.max_concurrency

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
            self._client = None
        if self._record_file is not None:
            self._record_file.close()
            self._record_file = None

    def __enter__(self) -> Gateway:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def complete(self, messages: list[ChatMessage]) -> str:
        if not messages or messages[-1].role != "user":
            raise ValueError("messages must be non-empty and end with a user message")
        fp = fingerprint(self.config.model, messages)
        if self.config.provider == "replay":
            return self._replay(fp)
        with self._sem:
            text = self._post(messages)
        with self._lock:
            self.calls += 1
            if self._record_file is not None:
                self._record_file.write(transcript_line(TranscriptEntry(fp, text)))
                self._record_file.flush()
            self.position += 1
        return text

    def _replay(self, fp: str) -> str:
        with self._lock:
            if self.position >= len(self._entries):
                raise ReplayExhausted(self.position)
            entry = self._entries[self.position]
            if entry.fingerprint != fp:
                raise ReplayMismatch(self.position, entry.fingerprint, fp)
            self.position += 1
            self.calls += 1
            return entry.response

    def _http(self) -> httpx.Client:
        with self._lock:
            if self._client is None:
                headers = {"Content-Type": "application/json"}
                key = self.config.api_key or os.environ.get(API_KEY_ENV)
                if key:
                    headers["Authorization"] = f"Bearer {key}"
                self._client = httpx.Client(
                    timeout=self.config.timeout, headers=headers, transport=self._transport
                )
            return self._client

    def backoff(self, attempt: int) -> float:
        """Delay before retry number ``attempt`` (0-based): 1s * 2**attempt, jittered."""
        return (2.0**attempt) * (0.5 + self._rng.random() / 2)

    def _post(self, messages: list[ChatMessage]) -> str:
        body = {
            "model": self.config.model,
            "messages": [m.to_dict() for m in messages],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        client = self._http()
        attempt = 0
        while True:
            try:
                resp = client.post(self.config.url, json=body)
            except httpx.TimeoutException as e:
                err: Exception = Timeout(f"request timed out after {self.config.timeout}s: {e}")
            except httpx.TransportError as e:
                err = ProviderError(None, f"transport error: {e}")
            else:
                if resp.status_code == 200:
                    try:
                        return resp.json()["choices"][0]["message"]["content"]
                    except (ValueError, KeyError, IndexError, TypeError):
                        raise ProviderError(200, resp.text) from None
                err = ProviderError(resp.status_code, resp.text)
                if resp.status_code != 429 and resp.status_code < 500:
                    raise err
            if attempt >= self.config.max_retries:
                raise err
            delay = self.backoff(attempt)
            log.warning("retrying chat request", extra={"attempt": attempt + 1, "error": str(err)})
            self._sleep(delay)
            attempt += 1


def complete(config: LlmConfig, messages: list[ChatMessage], **kwargs: Any) -> str:
    """One-shot completion through a throwaway gateway."""
    with Gateway(config, **kwargs) as gw:
        return gw.complete(messages)


# --------------------------------------------------------------------------
# JSON extraction

# an opening fence line directly followed by the payload
_FENCE_OPEN = re.compile(r"```[A-Za-z0-9_-]*[ \t]*\r?\n\s*(?=[{\[])")


def _balanced_end(text: str, start: int) -> int | None:
    """Index one past the bracket closing ``text[start]``, string-aware."""
    stack = []
    in_string = escaped = False
    for i in range(start, len(text)):
        c = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif c == "\\":
                escaped = True
            elif c == '"':
                in_string = False
        elif c == '"':
            in_string = True
        elif c in "{[":
            stack.append("}" if c == "{" else "]")
        elif c in "}]":
            if not stack or stack.pop() != c:
                return None
            if not stack:
                return i + 1
    return None


def extract_json(text: str) -> Any:
    """Parse the first balanced ``{...}`` or ``[...]`` region of ``text``.

    Scanning starts after the first Markdown fence line that is followed by a
    bracket, if any. Such a line cannot occur inside JSON (strings hold no raw
    newlines), and the string-aware scan ignores the closing fence. The
    region is parsed strictly; nothing is repaired.
    """
    if fence := _FENCE_OPEN.search(text):
        text = text[fence.end():]
    starts = [i for i in (text.find("{"), text.find("[")) if i >= 0]
    if not starts:
        raise NoJsonFound()
    start = min(starts)
    end = _balanced_end(text, start)
    if end is None:
        raise JsonSyntax(start, "unbalanced brackets")
    try:
        return json.loads(text[start:end])
    except json.JSONDecodeError as e:
        raise JsonSyntax(start + e.pos, e.msg) from None
