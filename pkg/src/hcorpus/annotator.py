"""Annotator client contract and implementations.

The pipeline never talks to a model directly; it sends
``AnnotationRequest`` objects through a client. ``MockAnnotator`` is a
pure function of (task, input text) — given the same construction
parameters it always returns the same output, which is what makes
end-to-end runs reproducible byte for byte. ``RemoteAnnotator`` speaks a
small JSON-over-HTTP contract with retry, exponential backoff, and a
client-side token-bucket rate limit.

Wire contract (POST to the configured endpoint)::

    request:  {"request_id": str, "task": str, "input_text": str, "context": {...}}
    response: {"request_id": str, "output": str, "model_version": str}

Responses with status 429 or 5xx are retried; other 4xx are fatal.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
import urllib.error
import urllib.request
import uuid
from dataclasses import dataclass, field
from enum import Enum

from . import markers

logger = logging.getLogger(__name__)


class Task(str, Enum):
    TRANSLATE = "translate"
    DIACRITIZE = "diacritize"
    SUMMARIZE = "summarize"
    KEY_POINTS = "key_points"
    TAG = "tag"
    SEGMENT_WINDOW = "segment_window"
    CLASSIFY_HADITH = "classify_hadith"


@dataclass
class AnnotationRequest:
    task: Task
    input_text: str
    context: dict = field(default_factory=dict)  # e.g. {"language": "fa"}

    def validate(self) -> None:
        if not self.input_text:
            raise ValueError("annotation input_text must be non-empty")
        if self.task == Task.TRANSLATE and not self.context.get("language"):
            raise ValueError("translate requests need context['language']")


@dataclass
class AnnotationOutcome:
    ok: bool
    output: str = ""
    model_version: str = ""
    annotator: str = ""
    attempts: int = 1
    error: str | None = None


class AnnotatorClient:
    """Protocol: implementations provide ``annotate`` and ``name``."""

    name = "abstract"

    def annotate(self, request: AnnotationRequest) -> AnnotationOutcome:  # pragma: no cover
        raise NotImplementedError


def _stable_int(text: str) -> int:
    return int.from_bytes(hashlib.sha1(text.encode("utf-8")).digest()[:8], "big")


_TRANSLIT = {
    "ا": "a", "ب": "b", "ت": "t", "ث": "th", "ج": "j",
    "ح": "h", "خ": "kh", "د": "d", "ذ": "dh", "ر": "r",
    "ز": "z", "س": "s", "ش": "sh", "ص": "s", "ض": "d",
    "ط": "t", "ظ": "z", "ع": "'", "غ": "gh", "ف": "f",
    "ق": "q", "ك": "k", "ل": "l", "م": "m", "ن": "n",
    "ه": "h", "و": "w", "ي": "y", "ء": "'", "ة": "h",
    "ى": "a", "أ": "a", "إ": "i", "آ": "a",
}

_HARAKAT_CYCLE = ("َ", "ُ", "ِ", "ْ")  # fatha damma kasra sukun

_ARABIC_LETTER_RANGE = ("ء", "ي")


def _is_arabic_letter(ch: str) -> bool:
    return _ARABIC_LETTER_RANGE[0] <= ch <= _ARABIC_LETTER_RANGE[1]


class MockAnnotator(AnnotatorClient):
    """Deterministic stand-in annotator.

    Every task is a pure function of the input text (plus the fixed
    construction parameters), so repeated runs produce identical corpora.
    Outputs are well-formed: diacritization preserves the skeleton exactly,
    translations transliterate into Latin script at roughly source length,
    summaries are strictly shorter than their input.
    """

    name = "mock"
    model_version = "mock-1"

    def __init__(self, tag_vocabulary: tuple[str, ...] = ()):
        self.tag_vocabulary = tuple(tag_vocabulary)

    def annotate(self, request: AnnotationRequest) -> AnnotationOutcome:
        request.validate()
        handler = {
            Task.TRANSLATE: self._translate,
            Task.DIACRITIZE: self._diacritize,
            Task.SUMMARIZE: self._summarize,
            Task.KEY_POINTS: self._key_points,
            Task.TAG: self._tag,
            Task.SEGMENT_WINDOW: self._segment_window,
            Task.CLASSIFY_HADITH: self._classify,
        }[request.task]
        return AnnotationOutcome(
            ok=True,
            output=handler(request),
            model_version=self.model_version,
            annotator=self.name,
        )

    def _translate(self, request: AnnotationRequest) -> str:
        lang = request.context["language"]
        out = []
        for ch in request.input_text:
            out.append(_TRANSLIT.get(ch, ch))
        return "[%s] %s" % (lang, "".join(out))

    def _diacritize(self, request: AnnotationRequest) -> str:
        out = []
        for i, ch in enumerate(request.input_text):
            out.append(ch)
            if _is_arabic_letter(ch):
                out.append(_HARAKAT_CYCLE[(_stable_int(ch) + i) % len(_HARAKAT_CYCLE)])
        return "".join(out)

    def _summarize(self, request: AnnotationRequest) -> str:
        words = request.input_text.split()
        keep = max(1, len(words) // 3)
        out = " ".join(words[:keep])
        if len(out) >= len(request.input_text):
            out = request.input_text[: max(0, len(request.input_text) - 1)].rstrip()
        return out

    def _key_points(self, request: AnnotationRequest) -> str:
        words = request.input_text.split()
        n_points = min(3, max(1, len(words) // 4))
        chunk = max(1, len(words) // n_points)
        lines = []
        for k in range(n_points):
            part = words[k * chunk:(k + 1) * chunk] or words[-chunk:]
            lines.append(" ".join(part))
        return "\n".join(lines)

    def _tag(self, request: AnnotationRequest) -> str:
        if not self.tag_vocabulary:
            return ""
        h = _stable_int(request.input_text)
        count = 1 + h % min(3, len(self.tag_vocabulary))
        picked = []
        for k in range(count):
            idx = _stable_int("%s#%d" % (request.input_text, k)) % len(self.tag_vocabulary)
            tag = self.tag_vocabulary[idx]
            if tag not in picked:
                picked.append(tag)
        return "\n".join(picked)

    def _segment_window(self, request: AnnotationRequest) -> str:
        spans = [
            {
                "chain": list(s.chain) if s.chain is not None else None,
                "body": list(s.body),
                "is_hadith": s.is_hadith,
                "confidence": s.confidence,
            }
            for s in markers.parse_window(request.input_text)
        ]
        return json.dumps({"spans": spans}, ensure_ascii=False)

    def _classify(self, request: AnnotationRequest) -> str:
        return "true" if markers.OPENER_RE.search(request.input_text) else "false"


class TransportError(Exception):
    """Network-level failure (connection refused, timeout, DNS...)."""


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_initial: float = 0.5
    backoff_multiplier: float = 2.0

    def delay(self, attempt: int) -> float:
        return self.backoff_initial * self.backoff_multiplier ** (attempt - 1)


class TokenBucket:
    """Client-side rate limiter: ``rate`` requests per second."""

    def __init__(self, rate: float, capacity: float | None = None,
                 clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()

    def acquire(self) -> None:
        now = self._clock()
        self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
        self._last = now
        if self._tokens < 1.0:
            wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)
            self._tokens = 1.0
            self._last = self._clock()
        self._tokens -= 1.0


def _urllib_transport(url: str, payload: dict, timeout: float) -> tuple[int, dict]:
    data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
    req = urllib.request.Request(url, data=data, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.status, json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        return exc.code, {}
    except (urllib.error.URLError, TimeoutError, OSError) as exc:
        raise TransportError(str(exc))


class RemoteAnnotator(AnnotatorClient):
    name = "remote"

    def __init__(
        self,
        endpoint: str,
        policy: RetryPolicy | None = None,
        rate_limit: float | None = None,
        timeout: float = 30.0,
        transport=None,
        sleep=time.sleep,
    ):
        self.endpoint = endpoint
        self.policy = policy or RetryPolicy()
        self.bucket = TokenBucket(rate_limit) if rate_limit else None
        self.timeout = timeout
        self.transport = transport or _urllib_transport
        self._sleep = sleep

    def annotate(self, request: AnnotationRequest) -> AnnotationOutcome:
        request.validate()
        payload = {
            "request_id": uuid.uuid4().hex,
            "task": request.task.value,
            "input_text": request.input_text,
            "context": request.context,
        }
        last_error = "no attempts made"
        for attempt in range(1, self.policy.max_attempts + 1):
            if self.bucket is not None:
                self.bucket.acquire()
            try:
                status, body = self.transport(self.endpoint, payload, self.timeout)
            except TransportError as exc:
                last_error = "transport: %s" % exc
            else:
                if status == 200:
                    if body.get("request_id") != payload["request_id"] or "output" not in body:
                        last_error = "malformed response body"
                    else:
                        return AnnotationOutcome(
                            ok=True,
                            output=str(body["output"]),
                            model_version=str(body.get("model_version", "")),
                            annotator=self.name,
                            attempts=attempt,
                        )
                elif status == 429 or status >= 500:
                    last_error = "retryable status %d" % status
                else:
                    return AnnotationOutcome(
                        ok=False, annotator=self.name, attempts=attempt,
                        error="fatal status %d" % status,
                    )
            if attempt < self.policy.max_attempts:
                self._sleep(self.policy.delay(attempt))
        return AnnotationOutcome(
            ok=False, annotator=self.name, attempts=self.policy.max_attempts, error=last_error
        )
