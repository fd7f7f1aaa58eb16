"""Embedding fusion and exact cosine top-k retrieval.

The index is an exact full scan over unit-normalized rows, with the tie
rule (score descending, id ascending) applied everywhere so rankings are
reproducible. Writes replace the entire backing arrays atomically; readers
never observe a partial index.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EmptyIndex, IoFailure, ZeroVector
from .vectors import unit

SPACES = ("seq", "narrative", "fused", "graph")


@dataclass(frozen=True)
class Hit:
    id: str
    score: float
    space: str


@dataclass
class FusedRecord:
    tx_id: str
    e_t: np.ndarray
    e_n: np.ndarray
    e_c: np.ndarray


@dataclass
class NodeRecord:
    addr: str
    e_g: np.ndarray


def fuse(
    e_t: np.ndarray, e_n: np.ndarray, w_t: float = 1.0, w_n: float = 1.0
) -> np.ndarray:
    """Weighted concatenation of the sequence and narrative blocks, then
    renormalized to unit length."""
    if w_t <= 0 or w_n <= 0:
        raise ValueError("fusion weights must be positive")
    t_block = w_t * np.asarray(e_t, dtype=np.float64)
    n_block = w_n * np.asarray(e_n, dtype=np.float64)
    if not np.any(t_block) or not np.any(n_block):
        raise ZeroVector("a weighted fusion block is all zeros")
    return unit(np.concatenate([t_block, n_block]))


def cosine(q: np.ndarray, x: np.ndarray) -> float:
    q = np.asarray(q, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if q.shape != x.shape:
        raise DimensionMismatch(f"{q.shape} vs {x.shape}")
    nq = float(np.linalg.norm(q))
    nx = float(np.linalg.norm(x))
    if nq == 0.0 or nx == 0.0:
        raise ZeroVector("cosine undefined for the zero vector")
    return float(np.dot(q, x) / (nq * nx))


class VectorIndex:
    """Exact cosine index over one embedding space.

    Vectors are stored unit-normalized; queries are normalized on entry, so
    ranking is invariant under positive scaling of the query.
    """

    def __init__(self, space: str, dim: int, weights: tuple[float, float] | None = None):
        if space not in SPACES:
            raise ValueError(f"unknown space {space!r}")
        self.space = space
        self.dim = dim
        self.weights = weights
        self._ids: list[str] = []
        self._matrix = np.zeros((0, dim), dtype=np.float64)
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._ids)

    def rebuild(self, items: dict[str, np.ndarray]) -> None:
        """Replace the whole index; the swap of (ids, matrix) is atomic."""
        ids = sorted(items)
        if ids:
            mat = np.stack([unit(items[i]) for i in ids])
            if mat.shape[1] != self.dim:
                raise DimensionMismatch(
                    f"expected dim {self.dim}, got {mat.shape[1]}"
                )
        else:
            mat = np.zeros((0, self.dim), dtype=np.float64)
        with self._lock:
            self._ids = ids
            self._matrix = mat

    def update(self, key: str, vector: np.ndarray) -> None:
        """Replace (or insert) a single entry; copy-on-write then swap."""
        v = unit(vector)
        if len(v) != self.dim:
            raise DimensionMismatch(f"expected dim {self.dim}, got {len(v)}")
        with self._lock:
            if key in self._ids:
                i = self._ids.index(key)
                mat = self._matrix.copy()
                mat[i] = v
                self._matrix = mat
            else:
                ids = sorted(self._ids + [key])
                i = ids.index(key)
                self._matrix = np.insert(self._matrix, i, v, axis=0)
                self._ids = ids

    def topk(self, q: np.ndarray, k: int) -> list[Hit]:
        if k < 1:
            raise ValueError("k must be >= 1")
        ids, mat = self._ids, self._matrix
        if not ids:
            raise EmptyIndex(f"index for space {self.space!r} is empty")
        q = np.asarray(q, dtype=np.float64)
        if q.shape[0] != self.dim:
            raise DimensionMismatch(f"query dim {q.shape[0]} != index dim {self.dim}")
        scores = kernels.dot_scores(mat, unit(q))
        # lexsort: last key is primary -> score desc, then id asc
        order = np.lexsort((np.asarray(ids), -scores))
        return [
            Hit(id=ids[i], score=float(scores[i]), space=self.space)
            for i in order[:k]
        ]

    def get(self, key: str) -> np.ndarray | None:
        with self._lock:
            if key not in self._ids:
                return None
            return self._matrix[self._ids.index(key)].copy()

    def save(self, path: str | Path) -> None:
        header = {
            "space": self.space,
            "dim": self.dim,
            "count": len(self._ids),
            "weights": list(self.weights) if self.weights else None,
            "ids": self._ids,
        }
        try:
            with open(path, "wb") as fh:
                fh.write(json.dumps(header, separators=(",", ":")).encode() + b"\n")
                fh.write(self._matrix.astype("<f8").tobytes())
        except OSError as exc:
            raise IoFailure(str(exc))

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        try:
            with open(path, "rb") as fh:
                header = json.loads(fh.readline().decode())
                raw = fh.read()
        except OSError as exc:
            raise IoFailure(str(exc))
        idx = cls(
            header["space"],
            header["dim"],
            tuple(header["weights"]) if header.get("weights") else None,
        )
        mat = np.frombuffer(raw, dtype="<f8").reshape(header["count"], header["dim"])
        idx._matrix = mat.copy()
        idx._ids = list(header["ids"])
        return idx


def topk(index: VectorIndex, q: np.ndarray, k: int, space: str | None = None) -> list[Hit]:
    if space is not None and space != index.space:
        raise ValueError(f"index holds space {index.space!r}, not {space!r}")
    return index.topk(q, k)


def node_topk(index: VectorIndex, q: np.ndarray, k: int) -> list[Hit]:
    return index.topk(q, k)
