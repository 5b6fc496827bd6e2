"""Append-only audit log: numbered, digested, replayable.

Records carry no wall-clock timestamps on purpose — two runs of the same
seed and command script must produce byte-identical log files, and the
simulated day is the only clock that matters.  One record per line,
canonical JSON, UTF-8.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, TextIO

from .jsonutil import canonical_json, digest, jsonable


@dataclass(frozen=True)
class AuditRecord:
    seq: int
    tick: int
    actor: str  # "system", "user:<name>", or an agent name
    event_kind: str
    payload: dict
    payload_digest: str

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "tick": self.tick,
            "actor": self.actor,
            "event_kind": self.event_kind,
            "payload": self.payload,
            "payload_digest": self.payload_digest,
        }

    def to_line(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "AuditRecord":
        return cls(
            seq=int(d["seq"]),
            tick=int(d["tick"]),
            actor=d["actor"],
            event_kind=d["event_kind"],
            payload=d["payload"],
            payload_digest=d["payload_digest"],
        )


class AuditLog:
    """In-memory record list with an optional JSONL file sink and listeners.

    Listeners exist for live event streaming; a listener that raises is
    dropped rather than allowed to take the engine down with it.
    """

    def __init__(self, path: str | Path | None = None) -> None:
        self.records: list[AuditRecord] = []
        self._file: TextIO | None = None
        self._listeners: list[Callable[[AuditRecord], None]] = []
        if path is not None:
            self._file = open(path, "w", encoding="utf-8")

    def append(self, tick: int, actor: str, event_kind: str, payload: dict) -> AuditRecord:
        normalized = jsonable(payload)
        record = AuditRecord(
            seq=len(self.records) + 1,
            tick=tick,
            actor=actor,
            event_kind=event_kind,
            payload=normalized,
            payload_digest=digest(normalized),
        )
        self.records.append(record)
        if self._file is not None:
            self._file.write(record.to_line() + "\n")
            self._file.flush()
        for listener in list(self._listeners):
            try:
                listener(record)
            except Exception:
                self._listeners.remove(listener)
        return record

    def subscribe(self, listener: Callable[[AuditRecord], None]) -> None:
        self._listeners.append(listener)

    def unsubscribe(self, listener: Callable[[AuditRecord], None]) -> None:
        if listener in self._listeners:
            self._listeners.remove(listener)

    def log_digest(self) -> str:
        """One hash over the whole log — the run's fingerprint."""
        return digest([r.to_dict() for r in self.records])

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None


def verify_integrity(records: Iterable[AuditRecord]) -> None:
    """Raise ValueError on the first gap, duplicate, or digest mismatch."""
    expected = 1
    for record in records:
        if record.seq != expected:
            raise ValueError(f"audit seq gap: expected {expected}, found {record.seq}")
        recomputed = digest(record.payload)
        if recomputed != record.payload_digest:
            raise ValueError(
                f"audit digest mismatch at seq {record.seq}: "
                f"stored {record.payload_digest[:12]}..., recomputed {recomputed[:12]}..."
            )
        expected += 1


def load(path: str | Path) -> list[AuditRecord]:
    import json

    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(AuditRecord.from_dict(json.loads(line)))
    return records
