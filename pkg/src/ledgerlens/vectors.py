"""Embedding vector helpers and the line-delimited exchange format."""

from __future__ import annotations

import hashlib
import json
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, IoFailure, MalformedRecord, ZeroVector

_SEED_MASK = (1 << 64) - 1


def unit(v: np.ndarray) -> np.ndarray:
    """L2-normalize; rejects zero and non-finite input."""
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ZeroVector("vector has non-finite entries")
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    return v / n


def is_unit(v: np.ndarray, tol: float = 1e-6) -> bool:
    return abs(float(np.linalg.norm(v)) - 1.0) <= tol


@lru_cache(maxsize=1 << 18)
def token_hash(token: str, seed: int) -> int:
    """Stable 64-bit keyed hash of a token (independent of PYTHONHASHSEED)."""
    key = (seed & _SEED_MASK).to_bytes(8, "little")
    h = hashlib.blake2b(token.encode("utf-8"), key=key, digest_size=8)
    return int.from_bytes(h.digest(), "little")


def token_slot(token: str, seed: int, dim: int) -> tuple[int, float]:
    """Map a token to a (bucket index, ±1 sign) pair."""
    h = token_hash(token, seed)
    return (h >> 1) % dim, 1.0 if h & 1 else -1.0


def write_embeddings(path: str | Path, items: dict[str, np.ndarray]) -> None:
    try:
        with open(path, "w") as fh:
            for key in sorted(items):
                v = items[key]
                rec = {"tx_id": key, "dim": len(v), "values": [float(x) for x in v]}
                fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc))


def read_embeddings(path: str | Path) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise IoFailure(str(exc))
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord("<line>", i, str(exc))
        for key in ("tx_id", "dim", "values"):
            if key not in rec:
                raise MalformedRecord(key, i)
        v = np.asarray(rec["values"], dtype=np.float64)
        if len(v) != int(rec["dim"]):
            raise DimensionMismatch(f"line {i}: dim {rec['dim']} != {len(v)} values")
        out[str(rec["tx_id"])] = v
    return out
