"""Chat-completions client: retries, a global rate limit, and recordable
transports so every remote call can be replayed offline.

The endpoint is any chat-completions-style HTTP API; base URL and key come
from ``SYNTRA_LLM_BASE_URL`` / ``SYNTRA_LLM_API_KEY`` unless passed
explicitly.
"""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import ConfigError, ReplayMismatch, TransportError

__all__ = [
    "BASE_URL_ENV",
    "API_KEY_ENV",
    "HttpTransport",
    "RecordingTransport",
    "ReplayTransport",
    "SequenceTransport",
    "ChatClient",
]

BASE_URL_ENV = "SYNTRA_LLM_BASE_URL"
API_KEY_ENV = "SYNTRA_LLM_API_KEY"


class _RateLimiter:
    """Minimum spacing between requests, shared process-wide."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self, min_interval: float) -> None:
        if min_interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + min_interval
        if delay > 0:
            time.sleep(delay)


_GLOBAL_LIMITER = _RateLimiter()


class HttpTransport:
    """POSTs chat-completion payloads with retry and backoff."""

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        *,
        timeout: float = 120.0,
        max_retries: int = 4,
        backoff: float = 0.5,
        min_interval: float = 0.0,
    ):
        self.base_url = (base_url or os.environ.get(BASE_URL_ENV, "")).rstrip("/")
        if not self.base_url:
            raise ConfigError(f"no LLM endpoint configured; set {BASE_URL_ENV}")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.min_interval = min_interval

    def send(self, payload: Mapping[str, Any]) -> dict:
        import httpx

        url = f"{self.base_url}/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            _GLOBAL_LIMITER.wait(self.min_interval)
            try:
                response = httpx.post(url, json=dict(payload), headers=headers, timeout=self.timeout)
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = TransportError(f"HTTP {response.status_code}: {response.text[:200]}")
                elif response.status_code >= 400:
                    raise TransportError(f"HTTP {response.status_code}: {response.text[:200]}")
                else:
                    return response.json()
            except httpx.HTTPError as exc:
                last_error = exc
            if attempt < self.max_retries:
                time.sleep(self.backoff * (2**attempt))
        raise TransportError(f"request failed after {self.max_retries + 1} attempts: {last_error}")


class RecordingTransport:
    """Wraps a transport and appends request/response pairs to a jsonl file."""

    def __init__(self, inner, path: str | Path):
        self._inner = inner
        self._path = Path(path)
        self._lock = threading.Lock()

    def send(self, payload: Mapping[str, Any]) -> dict:
        response = self._inner.send(payload)
        record = json.dumps(
            {"request": dict(payload), "response": response}, sort_keys=True, ensure_ascii=False
        )
        with self._lock:
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(record + "\n")
        return response

    def close(self) -> None:
        close = getattr(self._inner, "close", None)
        if close:
            close()


class ReplayTransport:
    """Serves recorded responses in order; diverging requests are errors."""

    def __init__(self, path: str | Path):
        self._records = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                self._records.append(json.loads(line))
        self._cursor = 0
        self._lock = threading.Lock()

    def send(self, payload: Mapping[str, Any]) -> dict:
        with self._lock:
            if self._cursor >= len(self._records):
                raise ReplayMismatch("recorded call log exhausted")
            record = self._records[self._cursor]
            self._cursor += 1
        if record["request"] != dict(payload):
            raise ReplayMismatch("request diverged from the recorded call log")
        return record["response"]


class SequenceTransport:
    """Canned completions for tests: returns the given texts in order."""

    def __init__(self, texts: Sequence[str]):
        self._texts = list(texts)
        self._cursor = 0
        self.requests: list[dict] = []

    def send(self, payload: Mapping[str, Any]) -> dict:
        self.requests.append(dict(payload))
        if self._cursor >= len(self._texts):
            raise TransportError("canned transport exhausted")
        text = self._texts[self._cursor]
        self._cursor += 1
        return {"choices": [{"message": {"role": "assistant", "content": text}}]}


class ChatClient:
    """Thin convenience wrapper: one prompt (or message list) in, text out."""

    def __init__(self, transport, model: str = "default", max_tokens: int | None = None):
        self._transport = transport
        self.model = model
        self.max_tokens = max_tokens

    def complete(
        self,
        prompt: str | Iterable[Mapping[str, str]],
        *,
        temperature: float,
    ) -> str:
        if isinstance(prompt, str):
            messages = [{"role": "user", "content": prompt}]
        else:
            messages = [dict(m) for m in prompt]
        payload: dict[str, Any] = {
            "model": self.model,
            "messages": messages,
            "temperature": temperature,
        }
        if self.max_tokens is not None:
            payload["max_tokens"] = self.max_tokens
        response = self._transport.send(payload)
        try:
            return response["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion response: {exc}") from exc
