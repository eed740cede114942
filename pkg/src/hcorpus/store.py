"""Append-only JSON Lines record store.

One self-describing record per line: ``{"schema": 1, "kind": ..., "key":
..., "body": {...}}``. Rewrites append a new line; the latest line per
(kind, key) wins. A sidecar offset index (``<path>.idx``) makes reopening
cheap: if the indexed byte size matches the file we trust it, if the file
grew we scan only the tail, otherwise we rebuild.

Corrupted lines never poison the rest of the store: scanning records them
as (line number, reason) pairs and keeps going.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from .model import RECORD_TYPES, SCHEMA_VERSION

logger = logging.getLogger(__name__)


class StoreError(Exception):
    pass


class CorruptLineError(StoreError):
    def __init__(self, line_no: int, reason: str):
        super().__init__("corrupt record at line %d: %s" % (line_no, reason))
        self.line_no = line_no
        self.reason = reason


def _encode(record) -> str:
    envelope = {
        "schema": SCHEMA_VERSION,
        "kind": record.KIND,
        "key": record.record_key(),
        "body": record.to_dict(),
    }
    return json.dumps(envelope, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _decode_line(line: str, line_no: int):
    try:
        envelope = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptLineError(line_no, "invalid JSON (%s)" % exc.msg)
    if not isinstance(envelope, dict):
        raise CorruptLineError(line_no, "record line is not an object")
    for field in ("schema", "kind", "key", "body"):
        if field not in envelope:
            raise CorruptLineError(line_no, "missing %r field" % field)
    kind = envelope["kind"]
    record_type = RECORD_TYPES.get(kind)
    if record_type is None:
        raise CorruptLineError(line_no, "unknown record kind %r" % kind)
    try:
        record = record_type.from_dict(envelope["body"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptLineError(line_no, "undecodable %s body: %s" % (kind, exc))
    return kind, envelope["key"], record


class RecordStore:
    """Store over a single ``.jsonl`` file. Last write wins per (kind, key)."""

    def __init__(self, path: str | Path, create: bool = True):
        self.path = Path(path)
        self.index_path = self.path.with_name(self.path.name + ".idx")
        self._lock = threading.RLock()
        self._offsets: dict[tuple[str, str], tuple[int, int]] = {}  # (kind, key) -> (offset, line_no)
        self.corrupt_lines: list[tuple[int, str]] = []
        self._n_lines = 0
        self._size = 0
        if not self.path.exists():
            if not create:
                raise StoreError("store file does not exist: %s" % self.path)
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch()
        self._open_index()

    # -- index maintenance ------------------------------------------------

    def _open_index(self) -> None:
        file_size = self.path.stat().st_size
        base = None
        if self.index_path.exists():
            try:
                base = json.loads(self.index_path.read_text(encoding="utf-8"))
            except (json.JSONDecodeError, OSError):
                base = None
        if base is not None and base.get("size", -1) <= file_size and base.get("schema") == SCHEMA_VERSION:
            self._offsets = {
                (kind, key): (off, ln)
                for kind, key, off, ln in base.get("entries", [])
            }
            self._n_lines = base.get("lines", 0)
            self.corrupt_lines = [tuple(c) for c in base.get("corrupt", [])]
            self._scan(from_offset=base["size"])
        else:
            self._scan(from_offset=0)
        self._size = file_size

    def _scan(self, from_offset: int) -> None:
        with self.path.open("rb") as fh:
            fh.seek(from_offset)
            offset = from_offset
            line_no = self._n_lines
            for raw in fh:
                line_no += 1
                stripped = raw.strip()
                if stripped:
                    try:
                        kind, key, _ = _decode_line(stripped.decode("utf-8"), line_no)
                        self._offsets[(kind, key)] = (offset, line_no)
                    except (CorruptLineError, UnicodeDecodeError) as exc:
                        reason = exc.reason if isinstance(exc, CorruptLineError) else "undecodable bytes"
                        self.corrupt_lines.append((line_no, reason))
                        logger.warning("%s: skipping corrupt line %d (%s)", self.path, line_no, reason)
                offset += len(raw)
            self._n_lines = line_no
            self._size = offset

    def flush_index(self) -> None:
        with self._lock:
            payload = {
                "schema": SCHEMA_VERSION,
                "size": self._size,
                "lines": self._n_lines,
                "entries": [[k, key, off, ln] for (k, key), (off, ln) in sorted(self._offsets.items())],
                "corrupt": [list(c) for c in self.corrupt_lines],
            }
            tmp = self.index_path.with_suffix(".idx.tmp")
            tmp.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")
            tmp.replace(self.index_path)

    # -- record operations -------------------------------------------------

    def put(self, record) -> int:
        """Validate and append a record; returns its byte offset."""
        record.validate()
        line = _encode(record) + "\n"
        data = line.encode("utf-8")
        with self._lock:
            offset = self._size
            with self.path.open("ab") as fh:
                fh.write(data)
            self._size += len(data)
            self._n_lines += 1
            self._offsets[(record.KIND, record.record_key())] = (offset, self._n_lines)
            return offset

    def get(self, kind: str, key: str):
        """Latest record for (kind, key) or None."""
        with self._lock:
            entry = self._offsets.get((kind, key))
            if entry is None:
                return None
            offset, line_no = entry
            with self.path.open("rb") as fh:
                fh.seek(offset)
                raw = fh.readline()
            _, _, record = _decode_line(raw.decode("utf-8"), line_no)
            return record

    def keys(self, kind: str) -> list[str]:
        with self._lock:
            return sorted(key for (k, key) in self._offsets if k == kind)

    def records(self, kind: str | None = None) -> list:
        """Latest version of every record, in key order (per kind)."""
        out = []
        with self._lock:
            items = sorted(item for item in self._offsets.items() if kind is None or item[0][0] == kind)
            with self.path.open("rb") as fh:
                for (_, _), (offset, line_no) in items:
                    fh.seek(offset)
                    raw = fh.readline()
                    _, _, record = _decode_line(raw.decode("utf-8"), line_no)
                    out.append(record)
        return out

    def count(self, kind: str) -> int:
        with self._lock:
            return sum(1 for (k, _) in self._offsets if k == kind)

    def __enter__(self) -> "RecordStore":
        return self

    def __exit__(self, *exc) -> None:
        self.flush_index()
