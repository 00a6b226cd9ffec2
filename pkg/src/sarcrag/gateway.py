"""Chat-completion transport: live HTTP backend and deterministic record/replay store.

Every call is a ChatRequest (one system message, then user/assistant turns) and
comes back as a ChatExchange. Exchanges are keyed by a digest of the ordered
(role, content) pairs, so a recorded run can be replayed bit-for-bit without a
model server.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import requests

from .errors import EmptyResponse, MissingTranscript, TransportError

log = logging.getLogger(__name__)


class Role(enum.Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


class Purpose(enum.Enum):
    P1 = "P1"
    P2 = "P2"
    KEYWORD_IDENTIFY = "KeywordIdentify"
    KEYWORD_CLEAN = "KeywordClean"
    DEFINE_WORD = "DefineWord"
    REFINE_CHUNKS = "RefineChunks"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self) -> None:
        # Only assistant placeholders may be empty.
        if self.role is not Role.ASSISTANT and not self.content:
            raise ValueError(f"{self.role.value} message must have content")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    purpose: Purpose

    def __post_init__(self) -> None:
        if not self.messages or self.messages[0].role is not Role.SYSTEM:
            raise ValueError("first message must be the system message")
        n_system = sum(1 for m in self.messages if m.role is Role.SYSTEM)
        if n_system != 1:
            raise ValueError(f"expected exactly one system message, got {n_system}")
        if not any(m.role is Role.USER for m in self.messages):
            raise ValueError("at least one user message required")

    @property
    def digest(self) -> str:
        return request_digest(self.messages)


def request_digest(messages: tuple[ChatMessage, ...]) -> str:
    """Content hash of the ordered (role, content) pairs."""
    h = hashlib.sha256()
    for message in messages:
        h.update(message.role.value.encode("utf-8"))
        h.update(b"\n")
        h.update(message.content.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


@dataclass(frozen=True)
class ChatExchange:
    request: ChatRequest
    response_text: str
    backend: str
    latency: float
    request_digest: str


class TranscriptStore:
    """Content-addressed directory of recorded exchanges, one JSON file per digest."""

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        self._lock = threading.Lock()

    def path_for(self, digest: str) -> Path:
        return self.root / f"{digest}.json"

    def lookup(self, digest: str) -> str | None:
        path = self.path_for(digest)
        if not path.exists():
            return None
        record = json.loads(path.read_text(encoding="utf-8"))
        return record["response_text"]

    def save(self, request: ChatRequest, response_text: str) -> None:
        digest = request.digest
        record = {
            "digest": digest,
            "purpose_tag": request.purpose.value,
            "messages": [
                {"role": m.role.value, "content": m.content} for m in request.messages
            ],
            "response_text": response_text,
        }
        with self._lock:
            path = self.path_for(digest)
            if path.exists():
                previous = json.loads(path.read_text(encoding="utf-8"))
                if previous["response_text"] == response_text:
                    return
                log.warning("overwriting transcript %s with different response text", digest)
            self.root.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(record, ensure_ascii=False, indent=1), encoding="utf-8")
            tmp.replace(path)


class ChatBackend(Protocol):
    name: str

    def complete(self, request: ChatRequest) -> str: ...


class LiveBackend:
    """HTTP chat-completion client with bounded retries and exponential backoff.

    No decoding parameters are sent; the server's defaults apply.
    """

    name = "live"

    def __init__(
        self,
        endpoint_url: str,
        model: str,
        *,
        max_attempts: int = 3,
        backoff_base: float = 1.0,
        timeout: float = 120.0,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.endpoint_url = endpoint_url
        self.model = model
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.timeout = timeout
        self.session = session or requests.Session()
        self._sleep = sleep

    def complete(self, request: ChatRequest) -> str:
        payload = {
            "model": self.model,
            "messages": [
                {"role": m.role.value, "content": m.content} for m in request.messages
            ],
            "stream": False,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                self._sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                response = self.session.post(
                    self.endpoint_url, json=payload, timeout=self.timeout
                )
                response.raise_for_status()
                return _extract_text(response.json())
            except (requests.RequestException, ValueError, KeyError) as exc:
                last_error = exc
        raise TransportError(
            f"chat endpoint failed after {self.max_attempts} attempts: {last_error}"
        ) from last_error


def _extract_text(body: dict) -> str:
    """Pull generated text out of the common chat-completion response shapes."""
    if "message" in body:
        return body["message"]["content"]
    if "choices" in body:
        return body["choices"][0]["message"]["content"]
    if "response" in body:
        return body["response"]
    raise KeyError(f"unrecognized response shape: {sorted(body)}")


class ReplayBackend:
    """Serves recorded responses by request digest; never touches the network."""

    name = "replay"

    def __init__(self, store: TranscriptStore) -> None:
        self.store = store

    def complete(self, request: ChatRequest) -> str:
        text = self.store.lookup(request.digest)
        if text is None:
            raise MissingTranscript(request.digest)
        return text


class Gateway:
    """Runs requests against a backend, recording exchanges when a store is attached."""

    def __init__(
        self,
        backend: ChatBackend,
        store: TranscriptStore | None = None,
        exchange_log: Path | None = None,
    ) -> None:
        self.backend = backend
        self.store = store
        self.exchange_log = exchange_log
        self._log_lock = threading.Lock()

    def chat(self, request: ChatRequest) -> ChatExchange:
        started = time.monotonic()
        response_text = self.backend.complete(request)
        latency = time.monotonic() - started
        if not response_text.strip():
            raise EmptyResponse(f"empty model output for {request.purpose.value} request")
        exchange = ChatExchange(
            request=request,
            response_text=response_text,
            backend=self.backend.name,
            latency=latency,
            request_digest=request.digest,
        )
        if self.store is not None:
            self.store.save(request, response_text)
        if self.exchange_log is not None:
            self._append_log(exchange)
        return exchange

    def _append_log(self, exchange: ChatExchange) -> None:
        line = json.dumps(
            {
                "digest": exchange.request_digest,
                "purpose_tag": exchange.request.purpose.value,
                "backend": exchange.backend,
                "latency": exchange.latency,
                "messages": [
                    {"role": m.role.value, "content": m.content}
                    for m in exchange.request.messages
                ],
                "response_text": exchange.response_text,
            },
            ensure_ascii=False,
        )
        with self._log_lock:
            self.exchange_log.parent.mkdir(parents=True, exist_ok=True)
            with self.exchange_log.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
