"""Pluggable text-generation provider.

``remote`` posts to a chat-completions-style endpoint with bearer-token auth
from an environment variable (the key never reaches logs or error messages).
``scripted`` replays canned replies keyed by (case_id, turn) from a JSON file,
consuming duplicates in order, which makes every downstream test and the whole
acceptance suite deterministic and offline.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import ConfigError, ContractError, ScriptExhaustedError, TransportError
from .prompting import PromptBundle

logger = logging.getLogger(__name__)

# Test seam: retry backoff sleeps go through this hook.
_sleep = time.sleep


@dataclass(frozen=True)
class LlmConfig:
    kind: str = "remote"  # "remote" | "scripted"
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    model_name: str = "gpt-3.5-turbo"
    api_key_env_var: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    max_output_tokens: int = 2048
    timeout: float = 60.0
    max_retries: int = 3
    script_path: str | Path | None = None

    def __post_init__(self):
        if self.kind not in ("remote", "scripted"):
            raise ConfigError(f"unknown generation provider kind: {self.kind!r}")
        if self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")
        if self.kind == "scripted" and not self.script_path:
            raise ConfigError("scripted provider requires script_path")
        if self.kind == "remote" and not self.endpoint_url:
            raise ConfigError("remote provider requires endpoint_url")


@dataclass
class LlmResponse:
    text: str
    model_name: str
    latency_ms: float
    usage: dict | None = None


class ScriptedClient:
    """Replays scripted replies; thread-safe so benchmark cases can share it."""

    def __init__(self, config: LlmConfig):
        self.config = config
        path = Path(config.script_path)
        try:
            entries = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"script file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"script file {path} is not valid JSON: {exc}") from exc
        if not isinstance(entries, list):
            raise ConfigError(f"script file {path} must hold a JSON array")
        self._queues: dict[tuple[str, int], deque[str]] = {}
        for i, entry in enumerate(entries):
            try:
                key = (str(entry["case_id"]), int(entry["turn"]))
                reply = str(entry["reply"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"script entry {i} malformed: {exc}") from exc
            self._queues.setdefault(key, deque()).append(reply)
        self._lock = threading.Lock()

    def generate(self, prompt: PromptBundle, case_id: str = "", turn: int = 1) -> LlmResponse:
        start = time.perf_counter()
        with self._lock:
            queue = self._queues.get((case_id, turn))
            if not queue:
                raise ScriptExhaustedError(
                    f"no scripted reply for case {case_id!r} turn {turn}"
                )
            reply = queue.popleft()
        latency_ms = (time.perf_counter() - start) * 1000.0
        logger.info(
            "scripted reply: case=%s turn=%d chars=%d", case_id, turn, len(reply)
        )
        return LlmResponse(
            text=reply, model_name=self.config.model_name, latency_ms=latency_ms
        )


class RemoteChatClient:
    """Chat-completions-style HTTP client with retries and key redaction."""

    def __init__(self, config: LlmConfig):
        self.config = config

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key_env_var:
            key = os.environ.get(self.config.api_key_env_var, "")
            if not key:
                raise ConfigError(
                    f"environment variable {self.config.api_key_env_var} is not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def generate(self, prompt: PromptBundle, case_id: str = "", turn: int = 1) -> LlmResponse:
        body = {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
        }
        start = time.perf_counter()
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                resp = requests.post(
                    self.config.endpoint_url,
                    json=body,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
            except requests.RequestException as exc:
                last_error = exc
            else:
                if resp.status_code == 200:
                    return self._parse(resp.json(), start, case_id, turn)
                if resp.status_code in (408, 429) or resp.status_code >= 500:
                    last_error = TransportError(
                        f"generation endpoint returned {resp.status_code}"
                    )
                else:
                    raise ConfigError(
                        f"generation endpoint rejected request: "
                        f"{resp.status_code} {resp.text[:500]}"
                    )
            if attempt < self.config.max_retries:
                _sleep(min(0.5 * 2**attempt, 4.0))
        raise TransportError(
            f"generation request failed after {self.config.max_retries} retries: {last_error}"
        )

    def _parse(self, data: dict, start: float, case_id: str, turn: int) -> LlmResponse:
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ContractError(f"malformed generation response: {exc}") from exc
        usage = data.get("usage")
        latency_ms = (time.perf_counter() - start) * 1000.0
        logger.info(
            "chat call: model=%s case=%s turn=%d latency_ms=%.0f chars=%d",
            self.config.model_name, case_id, turn, latency_ms, len(text),
        )
        return LlmResponse(
            text=text,
            model_name=str(data.get("model", self.config.model_name)),
            latency_ms=latency_ms,
            usage=usage if isinstance(usage, dict) else None,
        )


LlmClient = ScriptedClient | RemoteChatClient


def make_client(config: LlmConfig) -> LlmClient:
    if config.kind == "scripted":
        return ScriptedClient(config)
    return RemoteChatClient(config)


def generate(
    prompt: PromptBundle, config: LlmConfig, case_id: str = "", turn: int = 1
) -> LlmResponse:
    """One-shot convenience wrapper around ``make_client``."""
    return make_client(config).generate(prompt, case_id=case_id, turn=turn)
