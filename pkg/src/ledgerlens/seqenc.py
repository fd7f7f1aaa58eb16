"""Deterministic transaction-sequence encoder.

Stands in for a trained sequence model: each transaction in an account's
recent history is tokenized (direction, value/gas/time-gap buckets, tags),
tokens are signed-hashed into a fixed-dimension vector, and positions are
weighted by an exponential decay so the most recent transaction dominates.
Externally computed embeddings can be imported through the exchange format.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ContextMismatch, DimensionMismatch, EmptySequence, UnorderedSequence
from .ingest import Transaction
from .vectors import read_embeddings, token_slot, unit


@dataclass(frozen=True)
class BucketSpec:
    """Quantization boundaries; bucket index = count of boundaries <= x."""

    value_bounds: tuple[float, ...] = tuple(10.0**i for i in range(1, 31))
    gas_bounds: tuple[float, ...] = tuple(10.0**i for i in range(1, 10))
    gap_bounds: tuple[float, ...] = tuple(2.0**i for i in range(0, 26))

    def value_bucket(self, x: int) -> int:
        return bisect_right(self.value_bounds, float(x))

    def gas_bucket(self, x: int) -> int:
        return bisect_right(self.gas_bounds, float(x))

    def gap_bucket(self, x: int) -> int:
        return bisect_right(self.gap_bounds, float(x))


@dataclass(frozen=True)
class SeqEncoderConfig:
    dim: int = 64
    window: int = 25
    decay: float = 0.9
    seed: int = 0
    buckets: BucketSpec = field(default_factory=BucketSpec)

    def __post_init__(self):
        if self.dim < 8:
            raise ValueError("dim must be >= 8")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not (0.0 < self.decay <= 1.0):
            raise ValueError("decay must be in (0, 1]")


def tokenize_transaction(
    tx: Transaction,
    context_addr: str,
    prev_ts: int | None = None,
    buckets: BucketSpec = BucketSpec(),
) -> list[str]:
    """Token view of one transaction relative to the account observing it."""
    if context_addr not in (tx.from_addr, tx.to_addr):
        raise ContextMismatch(f"{context_addr} not on transaction {tx.tx_id}")
    if tx.from_addr == tx.to_addr:
        direction = "self"
    elif context_addr == tx.from_addr:
        direction = "out"
    else:
        direction = "in"
    tokens = [
        f"dir:{direction}",
        f"val:b{buckets.value_bucket(tx.value)}",
        f"gas:b{buckets.gas_bucket(tx.gas_used)}",
        "gap:first" if prev_ts is None else f"gap:b{buckets.gap_bucket(tx.timestamp - prev_ts)}",
    ]
    tokens.extend(f"tag:{t}" for t in tx.tags)
    return tokens


def encode_sequence(
    seq: list[Transaction], context_addr: str, cfg: SeqEncoderConfig
) -> np.ndarray:
    """Unit-norm embedding of an account's transaction history.

    Position 0 is the most recent transaction (weight 1); older positions
    decay geometrically. Transactions beyond the window are dropped before
    encoding so they cannot influence the result.
    """
    if not seq:
        raise EmptySequence("cannot encode an empty sequence")
    for i in range(1, len(seq)):
        if seq[i - 1].sort_key >= seq[i].sort_key:
            raise UnorderedSequence(
                f"sequence not strictly ordered at position {i}"
            )
    window = seq[-cfg.window :]

    idx: list[int] = []
    contrib: list[float] = []
    last = len(window) - 1
    for j, tx in enumerate(window):
        prev_ts = window[j - 1].timestamp if j > 0 else None
        weight = cfg.decay ** (last - j)
        for token in tokenize_transaction(tx, context_addr, prev_ts, cfg.buckets):
            slot, sign = token_slot(token, cfg.seed, cfg.dim)
            idx.append(slot)
            contrib.append(sign * weight)

    v = kernels.signed_accumulate(
        cfg.dim, np.asarray(idx, dtype=np.int64), np.asarray(contrib, dtype=np.float64)
    )
    return unit(v)


def import_embeddings(path, dim: int) -> dict[str, np.ndarray]:
    """Load externally computed embeddings; re-normalizes to unit norm."""
    raw = read_embeddings(path)
    out: dict[str, np.ndarray] = {}
    for tx_id, v in raw.items():
        if len(v) != dim:
            raise DimensionMismatch(
                f"embedding for {tx_id} has dim {len(v)}, expected {dim}"
            )
        out[tx_id] = unit(v)
    return out
