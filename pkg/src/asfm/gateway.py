"""Chat-completion gateway: one call site, three interchangeable transports.

live sends the request to a remote endpoint (credentials via environment),
mock hands it to a deterministic responder callable, and replay serves the
recorded response for the request's tag from a transcript, refusing to answer
if the request text no longer matches what was recorded.  Every completion
(and every transport failure) is appended to the transcript, so a run
recorded once can be re-executed byte-for-byte with no network at all.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .agents import HOLD, ParseError, TraderAction, parse_tool_calls
from .core import CompanyRegistry, MarketError


class GatewayError(MarketError):
    pass


class Timeout(GatewayError):
    pass


class RemoteError(GatewayError):
    pass


class ReplayMiss(GatewayError):
    """Replay transport has no record for the request's tag."""


class DriftDetected(GatewayError):
    """A replayed request no longer matches its recorded digest."""


@dataclass(frozen=True)
class RequestTag:
    """Unique address of one completion attempt within a run."""

    run_id: str
    day: int
    agent_id: str
    attempt: str

    def key(self) -> str:
        return f"{self.run_id}|{self.day}|{self.agent_id}|{self.attempt}"


@dataclass(frozen=True)
class CompletionRequest:
    system_text: str
    user_text: str
    tag: RequestTag
    temperature: float = 0.0
    max_tokens: int = 512


def request_digest(req: CompletionRequest) -> str:
    """Binds a transcript record to the exact prompt text it answered."""
    h = hashlib.sha256()
    h.update(req.system_text.encode("utf-8"))
    h.update(b"\x00")
    h.update(req.user_text.encode("utf-8"))
    return h.hexdigest()


def _record_digest(tag: RequestTag, req_digest: str, response: str, error: str) -> str:
    h = hashlib.sha256()
    h.update(f"{tag.key()}|{req_digest}|{error}|".encode("utf-8"))
    h.update(response.encode("utf-8"))
    return h.hexdigest()


@dataclass(frozen=True)
class TranscriptRecord:
    tag: RequestTag
    request_digest: str
    response: str
    error: str = ""  # "Timeout: ..." / "RemoteError: ..." when the call failed
    record_digest: str = ""

    def __post_init__(self) -> None:
        expected = _record_digest(self.tag, self.request_digest, self.response, self.error)
        if self.record_digest == "":
            object.__setattr__(self, "record_digest", expected)

    def is_intact(self) -> bool:
        return self.record_digest == _record_digest(
            self.tag, self.request_digest, self.response, self.error
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "run_id": self.tag.run_id,
                "day": self.tag.day,
                "agent_id": self.tag.agent_id,
                "attempt": self.tag.attempt,
                "request_digest": self.request_digest,
                "response": self.response,
                "error": self.error,
                "record_digest": self.record_digest,
            },
            separators=(",", ":"),
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "TranscriptRecord":
        data = json.loads(line)
        return cls(
            tag=RequestTag(
                run_id=data["run_id"],
                day=int(data["day"]),
                agent_id=data["agent_id"],
                attempt=str(data["attempt"]),
            ),
            request_digest=data["request_digest"],
            response=data["response"],
            error=data.get("error", ""),
            record_digest=data["record_digest"],
        )


class Transcript:
    """Append-only record of every completion attempt, keyed by tag."""

    def __init__(self) -> None:
        self.records: list[TranscriptRecord] = []
        self._by_key: dict[str, TranscriptRecord] = {}

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TranscriptRecord]:
        return iter(self.records)

    def append(self, record: TranscriptRecord) -> None:
        key = record.tag.key()
        if key in self._by_key:
            raise ValueError(f"duplicate transcript tag {key}")
        self.records.append(record)
        self._by_key[key] = record

    def get(self, tag: RequestTag) -> TranscriptRecord | None:
        return self._by_key.get(tag.key())

    def tampered_tags(self) -> list[RequestTag]:
        return [r.tag for r in self.records if not r.is_intact()]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for record in self.records:
                fh.write(record.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        transcript = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    transcript.append(TranscriptRecord.from_json(line))
        return transcript


class MockTransport:
    """Deterministic scripted responder; the offline stand-in for a model."""

    name = "mock"

    def __init__(self, responder: Callable[[CompletionRequest], str]):
        self._responder = responder

    def complete(self, req: CompletionRequest) -> str:
        return self._responder(req)


class ReplayTransport:
    """Serves recorded responses; any divergence from the recording raises."""

    name = "replay"

    def __init__(self, transcript: Transcript):
        self._transcript = transcript

    def complete(self, req: CompletionRequest) -> str:
        record = self._transcript.get(req.tag)
        if record is None:
            raise ReplayMiss(f"no transcript record for tag {req.tag.key()}")
        if record.request_digest != request_digest(req):
            raise DriftDetected(
                f"request text drifted from recording at tag {req.tag.key()}"
            )
        if record.error:
            kind, _, message = record.error.partition(": ")
            raise (Timeout if kind == "Timeout" else RemoteError)(message)
        return record.response


class LiveTransport:
    """Remote chat-completion endpoint over HTTP with bounded retries."""

    name = "live"

    def __init__(
        self,
        url: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        timeout: float = 30.0,
        max_attempts: int = 3,
    ):
        self.url = url or os.environ.get("ASFM_API_URL", "")
        self.api_key = api_key or os.environ.get("ASFM_API_KEY", "")
        self.model = model or os.environ.get("ASFM_MODEL", "")
        self.timeout = timeout
        self.max_attempts = max_attempts
        if not self.url or not self.model:
            raise GatewayError(
                "live transport needs ASFM_API_URL and ASFM_MODEL (ASFM_API_KEY "
                "if the endpoint requires it)"
            )

    def complete(self, req: CompletionRequest) -> str:
        import httpx

        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.system_text},
                {"role": "user", "content": req.user_text},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last: Exception | None = None
        for _ in range(self.max_attempts):
            try:
                response = httpx.post(
                    self.url, json=payload, headers=headers, timeout=self.timeout
                )
                response.raise_for_status()
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except httpx.TimeoutException as exc:
                last = Timeout(str(exc))
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last = RemoteError(str(exc))
        assert last is not None
        raise last


def complete(
    req: CompletionRequest, transport, transcript: Transcript | None = None
) -> str:
    """Run one completion, recording the outcome unless we are replaying."""
    recording = transcript is not None and not isinstance(transport, ReplayTransport)
    try:
        response = transport.complete(req)
    except (Timeout, RemoteError) as exc:
        if recording:
            transcript.append(
                TranscriptRecord(
                    tag=req.tag,
                    request_digest=request_digest(req),
                    response="",
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
        raise
    if recording:
        transcript.append(
            TranscriptRecord(
                tag=req.tag, request_digest=request_digest(req), response=response
            )
        )
    return response


CORRECTIVE_INSTRUCTION = (
    "\n\nYour previous reply could not be parsed into valid tool calls. "
    "Answer again with exactly one JSON tool call per line and no other text."
)


@dataclass
class ActionOutcome:
    actions: list[TraderAction]
    attempts: int
    response: str | None = None
    failures: list[str] = field(default_factory=list)


def action_with_retry(
    system_text: str,
    user_text: str,
    universe: CompanyRegistry,
    transport,
    tag_factory: Callable[[int], RequestTag],
    transcript: Transcript | None = None,
    retries: int = 2,
    temperature: float = 0.0,
    max_tokens: int = 512,
) -> ActionOutcome:
    """Completion plus parse, with the retry-then-Hold failure policy.

    Parse failures retry with a corrective instruction appended; transport
    failures retry as-is.  After `retries` extra attempts everything degrades
    to a single Hold, never an exception (replay divergence excepted, which
    must surface).
    """
    failures: list[str] = []
    user = user_text
    for attempt in range(1, retries + 2):
        req = CompletionRequest(
            system_text=system_text,
            user_text=user,
            tag=tag_factory(attempt),
            temperature=temperature,
            max_tokens=max_tokens,
        )
        try:
            response = complete(req, transport, transcript)
        except (Timeout, RemoteError) as exc:
            failures.append(f"attempt {attempt}: {type(exc).__name__}: {exc}")
            continue
        try:
            actions = parse_tool_calls(response, universe)
        except ParseError as exc:
            failures.append(f"attempt {attempt}: ParseError: {exc}")
            user = user_text + CORRECTIVE_INSTRUCTION
            continue
        return ActionOutcome(actions=actions, attempts=attempt, response=response, failures=failures)
    return ActionOutcome(actions=[HOLD], attempts=retries + 1, response=None, failures=failures)
