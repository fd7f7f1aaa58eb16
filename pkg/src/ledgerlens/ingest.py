"""Corpus ingestion: parse, validate, normalize and persist transaction records.

The on-disk form is line-delimited JSON, one object per line, written in a
canonical order (sorted by (timestamp, tx_id), fixed key order) so that
persist/load round-trips are byte-exact.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateTxId, InvalidField, IoFailure, MalformedRecord

logger = logging.getLogger(__name__)

TX_ID_RE = re.compile(r"^0x[0-9a-f]{64}$")
ADDR_RE = re.compile(r"^0x[0-9a-f]{40}$")

_TX_KEYS = ("tx_id", "from", "to", "value", "timestamp", "block", "gas_used", "tags")
_EVENT_KEYS = ("event_id", "start_ts", "end_ts", "description")
_META_KEYS = ("addr", "known_associations", "risk_notes")


@dataclass(frozen=True, order=True)
class Transaction:
    tx_id: str
    from_addr: str
    to_addr: str
    value: int
    timestamp: int
    block: int
    gas_used: int
    tags: tuple[str, ...] = ()

    @property
    def sort_key(self) -> tuple[int, str]:
        return (self.timestamp, self.tx_id)


@dataclass(frozen=True)
class ExternalEvent:
    event_id: str
    start_ts: int
    end_ts: int
    description: str


@dataclass(frozen=True)
class AccountMeta:
    addr: str
    known_associations: tuple[str, ...]
    risk_notes: str = ""


@dataclass
class LoadReport:
    loaded: int = 0
    rejected: int = 0
    errors: list[str] = field(default_factory=list)


@dataclass(eq=False)
class Corpus:
    transactions: list[Transaction] = field(default_factory=list)
    events: list[ExternalEvent] = field(default_factory=list)
    meta: list[AccountMeta] = field(default_factory=list)
    report: LoadReport = field(default_factory=LoadReport)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return (
            self.transactions == other.transactions
            and self.events == other.events
            and self.meta == other.meta
        )

    def tx_by_id(self) -> dict[str, Transaction]:
        return {t.tx_id: t for t in self.transactions}


def _require(obj: dict, key: str, line_no: int | None):
    if key not in obj or obj[key] is None:
        raise MalformedRecord(key, line_no)
    return obj[key]


def _as_uint(raw, key: str, line_no: int | None) -> int:
    try:
        v = int(raw)
    except (TypeError, ValueError):
        raise InvalidField(key, line_no, f"not an integer: {raw!r}")
    if v < 0:
        raise InvalidField(key, line_no, "must be non-negative")
    return v


def parse_transaction_line(line: str, line_no: int | None = None) -> Transaction:
    """Parse one JSON record into a validated, normalized Transaction."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord("<line>", line_no, str(exc))
    if not isinstance(obj, dict):
        raise MalformedRecord("<line>", line_no, "record is not an object")

    unknown = set(obj) - set(_TX_KEYS)
    if unknown:
        logger.warning("line %s: ignoring unknown keys %s", line_no, sorted(unknown))

    tx_id = str(_require(obj, "tx_id", line_no)).lower()
    from_addr = str(_require(obj, "from", line_no)).lower()
    to_addr = str(_require(obj, "to", line_no)).lower()
    value = _as_uint(_require(obj, "value", line_no), "value", line_no)
    timestamp = _as_uint(_require(obj, "timestamp", line_no), "timestamp", line_no)
    block = _as_uint(obj.get("block", 0), "block", line_no)
    gas_used = _as_uint(obj.get("gas_used", 0), "gas_used", line_no)
    raw_tags = obj.get("tags", [])
    if not isinstance(raw_tags, list) or not all(isinstance(t, str) for t in raw_tags):
        raise InvalidField("tags", line_no, "must be an array of strings")
    tags = tuple(raw_tags)

    if not TX_ID_RE.match(tx_id):
        raise InvalidField("tx_id", line_no, "expected 0x + 64 lowercase hex chars")
    if not ADDR_RE.match(from_addr):
        raise InvalidField("from_addr", line_no, "expected 0x + 40 lowercase hex chars")
    if not ADDR_RE.match(to_addr):
        raise InvalidField("to_addr", line_no, "expected 0x + 40 lowercase hex chars")
    if timestamp <= 0:
        raise InvalidField("timestamp", line_no, "must be > 0")
    if from_addr == to_addr and "self-transfer" not in tags:
        raise InvalidField("to_addr", line_no, "self-transfer without 'self-transfer' tag")

    return Transaction(
        tx_id=tx_id,
        from_addr=from_addr,
        to_addr=to_addr,
        value=value,
        timestamp=timestamp,
        block=block,
        gas_used=gas_used,
        tags=tags,
    )


def parse_event_line(line: str, line_no: int | None = None) -> ExternalEvent:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord("<line>", line_no, str(exc))
    event_id = str(_require(obj, "event_id", line_no))
    start_ts = _as_uint(_require(obj, "start_ts", line_no), "start_ts", line_no)
    end_ts = _as_uint(_require(obj, "end_ts", line_no), "end_ts", line_no)
    description = str(_require(obj, "description", line_no))
    if start_ts > end_ts:
        raise InvalidField("end_ts", line_no, "start_ts must be <= end_ts")
    return ExternalEvent(event_id, start_ts, end_ts, description)


def parse_meta_line(line: str, line_no: int | None = None) -> AccountMeta:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord("<line>", line_no, str(exc))
    addr = str(_require(obj, "addr", line_no)).lower()
    if not ADDR_RE.match(addr):
        raise InvalidField("addr", line_no, "expected 0x + 40 lowercase hex chars")
    assoc = obj.get("known_associations", [])
    if not isinstance(assoc, list):
        raise InvalidField("known_associations", line_no, "must be an array")
    return AccountMeta(addr, tuple(str(a) for a in assoc), str(obj.get("risk_notes", "")))


def load_corpus(
    tx_path: str | Path,
    events_path: str | Path | None = None,
    meta_path: str | Path | None = None,
) -> Corpus:
    """Load a corpus from line-delimited files.

    Malformed/invalid lines are rejected and counted in the report (no silent
    drops); a duplicate tx_id aborts the load.
    """
    corpus = Corpus()
    seen_ids: set[str] = set()
    try:
        lines = Path(tx_path).read_text().splitlines()
    except OSError as exc:
        raise IoFailure(str(exc))
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            tx = parse_transaction_line(line, line_no=i)
        except (MalformedRecord, InvalidField) as exc:
            corpus.report.rejected += 1
            corpus.report.errors.append(str(exc))
            continue
        if tx.tx_id in seen_ids:
            raise DuplicateTxId(tx.tx_id)
        seen_ids.add(tx.tx_id)
        corpus.transactions.append(tx)
        corpus.report.loaded += 1
    corpus.transactions.sort(key=lambda t: t.sort_key)

    if events_path is not None:
        try:
            ev_lines = Path(events_path).read_text().splitlines()
        except OSError as exc:
            raise IoFailure(str(exc))
        seen_events: set[str] = set()
        for i, line in enumerate(ev_lines, start=1):
            if not line.strip():
                continue
            ev = parse_event_line(line, line_no=i)
            if ev.event_id in seen_events:
                raise InvalidField("event_id", i, f"duplicate event_id {ev.event_id}")
            seen_events.add(ev.event_id)
            corpus.events.append(ev)
        corpus.events.sort(key=lambda e: (e.start_ts, e.event_id))

    if meta_path is not None:
        try:
            meta_lines = Path(meta_path).read_text().splitlines()
        except OSError as exc:
            raise IoFailure(str(exc))
        seen_addrs: set[str] = set()
        for i, line in enumerate(meta_lines, start=1):
            if not line.strip():
                continue
            m = parse_meta_line(line, line_no=i)
            if m.addr in seen_addrs:
                raise InvalidField("addr", i, f"duplicate meta addr {m.addr}")
            seen_addrs.add(m.addr)
            corpus.meta.append(m)
        corpus.meta.sort(key=lambda m: m.addr)

    return corpus


def transaction_to_line(tx: Transaction) -> str:
    return json.dumps(
        {
            "tx_id": tx.tx_id,
            "from": tx.from_addr,
            "to": tx.to_addr,
            "value": str(tx.value),
            "timestamp": tx.timestamp,
            "block": tx.block,
            "gas_used": tx.gas_used,
            "tags": list(tx.tags),
        },
        separators=(",", ":"),
    )


def event_to_line(ev: ExternalEvent) -> str:
    return json.dumps(
        {
            "event_id": ev.event_id,
            "start_ts": ev.start_ts,
            "end_ts": ev.end_ts,
            "description": ev.description,
        },
        separators=(",", ":"),
    )


def meta_to_line(m: AccountMeta) -> str:
    return json.dumps(
        {
            "addr": m.addr,
            "known_associations": list(m.known_associations),
            "risk_notes": m.risk_notes,
        },
        separators=(",", ":"),
    )


def persist_corpus(corpus: Corpus, store_dir: str | Path) -> None:
    """Write the canonical line-delimited form into a store directory."""
    store = Path(store_dir)
    try:
        store.mkdir(parents=True, exist_ok=True)
        txs = sorted(corpus.transactions, key=lambda t: t.sort_key)
        body = "".join(transaction_to_line(t) + "\n" for t in txs)
        (store / "transactions.ndjson").write_text(body)
        ev_body = "".join(
            event_to_line(e) + "\n"
            for e in sorted(corpus.events, key=lambda e: (e.start_ts, e.event_id))
        )
        (store / "events.ndjson").write_text(ev_body)
        meta_body = "".join(
            meta_to_line(m) + "\n" for m in sorted(corpus.meta, key=lambda m: m.addr)
        )
        (store / "meta.ndjson").write_text(meta_body)
    except OSError as exc:
        raise IoFailure(str(exc))


def load_store(store_dir: str | Path) -> Corpus:
    """Load a corpus previously written by persist_corpus."""
    store = Path(store_dir)
    events = store / "events.ndjson"
    meta = store / "meta.ndjson"
    return load_corpus(
        store / "transactions.ndjson",
        events if events.exists() else None,
        meta if meta.exists() else None,
    )
