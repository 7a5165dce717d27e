"""Model client with transcript recording and deterministic replay.

Live mode performs one generic chat-completion HTTP exchange per call and
appends the exchange to a JSON-lines transcript. Replay mode serves
responses back from such a transcript, matching requests by content digest
in strict order, so an entire session can be re-run byte-identically with
no model behind it.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .errors import GatewayError
from .prompts import BundleItem

DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4o"


@dataclass
class Attachment:
    name: str
    content: str
    truncated: bool = False

    @classmethod
    def from_bundle_item(cls, item: BundleItem) -> "Attachment":
        return cls(item.artifact_name, item.content, item.truncated)


@dataclass
class ModelRequest:
    system: str
    user: str
    attachments: list[Attachment] = field(default_factory=list)
    model_id: str = DEFAULT_MODEL
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.user:
            raise GatewayError("request user text must be non-empty", code="EMPTY_REQUEST")
        if not 0.0 <= self.temperature <= 2.0:
            raise GatewayError(
                f"temperature {self.temperature} outside [0, 2]", code="BAD_TEMPERATURE"
            )


@dataclass
class ModelResponse:
    text: str
    finish_reason: str = "stop"  # "stop" | "length" | "error"
    usage: dict | None = None


def request_digest(request: ModelRequest) -> str:
    """Content hash of a request, stable across processes.

    Attachments are sorted by (name, content) so that incidental ordering
    does not change the digest, while any content change does.
    """
    canonical = {
        "system": request.system,
        "user": request.user,
        "model": request.model_id,
        "temperature": request.temperature,
        "attachments": sorted(
            [[a.name, a.content] for a in request.attachments],
            key=lambda pair: (pair[0], pair[1]),
        ),
    }
    payload = json.dumps(canonical, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class Transcript:
    """Append-only JSONL transcript of request digests and responses."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def append(self, digest: str, response: ModelResponse, timestamp: str) -> None:
        entry = {
            "request_digest": digest,
            "response": {
                "text": response.text,
                "finish_reason": response.finish_reason,
                "usage": response.usage,
            },
            "timestamp": timestamp,
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def entries(self) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out


Transport = Callable[[ModelRequest], ModelResponse]


def http_transport(request: ModelRequest) -> ModelResponse:
    """One chat-completion exchange against a generic JSON HTTP endpoint."""
    import requests

    base_url = os.environ.get("ADD_LLM_BASE_URL", DEFAULT_BASE_URL).rstrip("/")
    api_key = os.environ.get("ADD_LLM_API_KEY", "")
    messages = [{"role": "system", "content": request.system}]
    for a in request.attachments:
        messages.append(
            {"role": "user", "content": f"<attachment name=\"{a.name}\">\n{a.content}\n</attachment>"}
        )
    messages.append({"role": "user", "content": request.user})
    resp = requests.post(
        f"{base_url}/chat/completions",
        headers={"Authorization": f"Bearer {api_key}"},
        json={
            "model": request.model_id,
            "temperature": request.temperature,
            "messages": messages,
        },
        timeout=300,
    )
    resp.raise_for_status()
    data = resp.json()
    choice = data["choices"][0]
    return ModelResponse(
        text=choice["message"]["content"],
        finish_reason=choice.get("finish_reason", "stop"),
        usage=data.get("usage"),
    )


def _utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


class Gateway:
    """complete() in live or replay mode. One in-flight request at a time."""

    def __init__(
        self,
        *,
        transcript: Transcript,
        mode: str = "live",
        transport: Transport | None = None,
        clock: Callable[[], str] | None = None,
        strict_order: bool = True,
    ):
        if mode not in ("live", "replay"):
            raise GatewayError(f"unknown gateway mode {mode!r}", code="BAD_MODE")
        self.mode = mode
        self.transcript = transcript
        self.transport = transport or http_transport
        self.clock = clock or _utc_now
        self.strict_order = strict_order
        self._replay_entries: list[dict] | None = None
        self._replay_cursor = 0

    @classmethod
    def for_replay(cls, transcript_path: Path, *, strict_order: bool = True) -> "Gateway":
        return cls(transcript=Transcript(transcript_path), mode="replay", strict_order=strict_order)

    def complete(self, request: ModelRequest) -> ModelResponse:
        digest = request_digest(request)
        if self.mode == "replay":
            return self._replay(digest)
        return self._live(request, digest)

    def _live(self, request: ModelRequest, digest: str) -> ModelResponse:
        last_error: Exception | None = None
        for _ in range(2):  # one automatic retry
            try:
                response = self.transport(request)
            except Exception as exc:
                last_error = exc
                continue
            self.transcript.append(digest, response, self.clock())
            return response
        failed = ModelResponse(text="", finish_reason="error")
        self.transcript.append(digest, failed, self.clock())
        raise GatewayError(
            f"model transport failed after retry: {last_error}", code="TRANSPORT_ERROR"
        )

    def _replay(self, digest: str) -> ModelResponse:
        if self._replay_entries is None:
            self._replay_entries = self.transcript.entries()
        entries = self._replay_entries
        if self.strict_order:
            if self._replay_cursor >= len(entries):
                raise GatewayError(
                    "transcript exhausted: no recorded response for this request",
                    code="REPLAY_MISS",
                )
            entry = entries[self._replay_cursor]
            if entry["request_digest"] != digest:
                if any(e["request_digest"] == digest for e in entries):
                    raise GatewayError(
                        f"recorded response for {digest[:12]} exists but out of order "
                        f"(expected {entry['request_digest'][:12]} next)",
                        code="REPLAY_ORDER",
                    )
                raise GatewayError(
                    f"no recorded response for request {digest[:12]}", code="REPLAY_MISS"
                )
            self._replay_cursor += 1
        else:
            entry = next(
                (
                    e
                    for i, e in enumerate(entries)
                    if i >= self._replay_cursor and e["request_digest"] == digest
                ),
                None,
            )
            if entry is None:
                raise GatewayError(
                    f"no recorded response for request {digest[:12]}", code="REPLAY_MISS"
                )
        payload = entry["response"]
        return ModelResponse(
            text=payload["text"],
            finish_reason=payload.get("finish_reason", "stop"),
            usage=payload.get("usage"),
        )


def scripted_transport(responses: Sequence[str]) -> Transport:
    """Transport returning canned texts in order; raises when exhausted.

    Used by tests and the fixture generator.
    """
    queue = list(responses)

    def transport(request: ModelRequest) -> ModelResponse:
        if not queue:
            raise RuntimeError("scripted transport exhausted")
        return ModelResponse(text=queue.pop(0))

    return transport
