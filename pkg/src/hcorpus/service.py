"""HTTP service backing the expert-review form.

Endpoints (JSON unless noted):

* ``GET /api/queue/next?evaluator_id=E`` — the next narration E has not
  yet scored, with its enrichment bundle and group neighbors; returns
  ``{"done": true}`` when E has scored everything.
* ``POST /api/records`` — submit one evaluation record; the store key is
  narration_id:evaluator_id, so resubmitting the same pair overwrites
  rather than duplicates (idempotent submissions). 201 on success, 400
  with the violated invariant on bad input.
* ``GET /api/report`` — live aggregate statistics over all submitted
  records (``?format=text`` for the plain-text rendering).

Static files (the review UI bundle) are served from the configured
directory for any other GET path. All store writes funnel through one
shared RecordStore guarded by its internal lock, so every acknowledged
submission is visible to the next report read.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .config import PipelineConfig
from .evaluate import build_report, format_report
from .model import (
    EnrichmentBundle,
    EvaluationRecord,
    InvariantViolation,
    Narration,
)
from .store import RecordStore

logger = logging.getLogger(__name__)

MAX_BODY_BYTES = 1 << 20


def report_to_dict(report) -> dict:
    return {
        "sample_size": report.sample_size,
        "n_narrations": report.n_narrations,
        "non_hadith_count": report.non_hadith_count,
        "non_hadith_rate": report.non_hadith_rate,
        "critical_count": report.critical_count,
        "critical_rate": report.critical_rate,
        "critical_threshold": report.critical_threshold,
        "overall_mean": report.overall_mean,
        "aspect_means": {a.value: v for a, v in report.aspect_means.items()},
        "micro_rates": {d.value: v for d, v in report.micro_rates.items()},
        "macro_rates": {d.value: v for d, v in report.macro_rates.items()},
    }


class ReviewService:
    """Owns the stores and the HTTP server; stateless above the stores."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.evaluations = RecordStore(config.evaluations_store)
        self.narrations = (
            RecordStore(config.narrations_store, create=False)
            if config.narrations_store.exists()
            else None
        )
        self.bundles = (
            RecordStore(config.bundles_store, create=False)
            if config.bundles_store.exists()
            else None
        )
        self.static_dir = Path(config.service.static_dir) if config.service.static_dir else None
        handler = _make_handler(self)
        self.httpd = ThreadingHTTPServer((config.service.host, config.service.port), handler)

    @property
    def address(self) -> tuple[str, int]:
        host, port = self.httpd.server_address[:2]
        return str(host), int(port)

    def serve_forever(self):
        logger.info("review service listening on %s:%d", *self.address)
        self.httpd.serve_forever()

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        thread.start()
        return thread

    def shutdown(self):
        self.httpd.shutdown()
        self.httpd.server_close()
        self.evaluations.flush_index()

    # -- domain operations -------------------------------------------------

    def next_item(self, evaluator_id: str) -> dict:
        if self.narrations is None:
            return {"done": True, "reason": "no narration store"}
        scored = {
            r.narration_id
            for r in self.evaluations.records(EvaluationRecord.KIND)
            if r.evaluator_id == evaluator_id
        }
        for narration in self.narrations.records(Narration.KIND):
            if narration.narration_id in scored:
                continue
            bundle = (
                self.bundles.get(EnrichmentBundle.KIND, narration.narration_id)
                if self.bundles is not None
                else None
            )
            return {
                "narration": narration.to_dict(),
                "bundle": bundle.to_dict() if bundle is not None else None,
                "neighbors": self._neighbors(narration),
            }
        return {"done": True}

    def _neighbors(self, narration: Narration, limit: int = 10) -> list[str]:
        if narration.group_id is None or self.narrations is None:
            return []
        out = []
        for other in self.narrations.records(Narration.KIND):
            if other.group_id == narration.group_id and other.narration_id != narration.narration_id:
                out.append(other.narration_id)
                if len(out) >= limit:
                    break
        return out

    def submit(self, payload: dict) -> dict:
        record = EvaluationRecord.from_dict(payload)
        record.validate()
        self.evaluations.put(record)
        return {"ok": True, "record_key": record.record_key()}

    def report(self):
        return build_report(self.evaluations.records(EvaluationRecord.KIND))


def _make_handler(service: ReviewService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            logger.debug("http: " + fmt, *args)

        def _send_json(self, status: int, obj) -> None:
            body = json.dumps(obj, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_text(self, status: int, text: str, content_type="text/plain") -> None:
            body = text.encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "%s; charset=utf-8" % content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            url = urlparse(self.path)
            query = parse_qs(url.query)
            try:
                if url.path == "/api/queue/next":
                    evaluator = query.get("evaluator_id", [""])[0]
                    if not evaluator:
                        self._send_json(400, {"error": "evaluator_id query parameter required"})
                        return
                    self._send_json(200, service.next_item(evaluator))
                elif url.path == "/api/report":
                    report = service.report()
                    if query.get("format", [""])[0] == "text":
                        self._send_text(200, format_report(report))
                    else:
                        self._send_json(200, report_to_dict(report))
                else:
                    self._serve_static(url.path)
            except Exception as exc:
                logger.exception("GET %s failed", self.path)
                self._send_json(500, {"error": str(exc)})

        def do_POST(self):
            url = urlparse(self.path)
            if url.path != "/api/records":
                self._send_json(404, {"error": "unknown endpoint"})
                return
            length = int(self.headers.get("Content-Length") or 0)
            if length <= 0 or length > MAX_BODY_BYTES:
                self._send_json(400, {"error": "body required (at most %d bytes)" % MAX_BODY_BYTES})
                return
            raw = self.rfile.read(length)
            try:
                payload = json.loads(raw.decode("utf-8"))
                if not isinstance(payload, dict):
                    raise ValueError("record must be a JSON object")
            except (UnicodeDecodeError, ValueError) as exc:
                self._send_json(400, {"error": "malformed JSON: %s" % exc})
                return
            try:
                result = service.submit(payload)
            except InvariantViolation as exc:
                self._send_json(400, {"error": str(exc)})
                return
            except (KeyError, TypeError, ValueError) as exc:
                self._send_json(400, {"error": "invalid record: %s" % exc})
                return
            except OSError as exc:
                logger.exception("store write failed")
                self._send_json(500, {"error": "store failure: %s" % exc})
                return
            self._send_json(201, result)

        def _serve_static(self, path: str) -> None:
            if service.static_dir is None:
                self._send_json(404, {"error": "not found"})
                return
            rel = path.lstrip("/") or "index.html"
            target = (service.static_dir / rel).resolve()
            root = service.static_dir.resolve()
            if root not in target.parents and target != root:
                self._send_json(404, {"error": "not found"})
                return
            if target.is_dir():
                target = target / "index.html"
            if not target.is_file():
                self._send_json(404, {"error": "not found"})
                return
            content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            body = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler
