"""Hot-loop kernels with backend selection.

The compiled extension (`ledgerlens._kernels`, built from Cython) is used
when available; otherwise numpy implementations take over. Set
LEDGERLENS_PURE=1 to force the numpy path (used by the benchmark).
"""

from __future__ import annotations

import os

import numpy as np

_native = None
if os.environ.get("LEDGERLENS_PURE") != "1":
    try:
        from . import _kernels as _native  # type: ignore[attr-defined]
    except ImportError:
        _native = None


def backend_name() -> str:
    return "native" if _native is not None else "numpy"


def _numpy_dot_scores(mat: np.ndarray, q: np.ndarray) -> np.ndarray:
    return mat @ q


def _numpy_signed_accumulate(
    dim: int, idx: np.ndarray, contrib: np.ndarray
) -> np.ndarray:
    out = np.zeros(dim, dtype=np.float64)
    np.add.at(out, idx, contrib)
    return out


def dot_scores(mat: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise dot products of a (n, d) matrix against a query vector."""
    mat = np.ascontiguousarray(mat, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    if _native is not None:
        return np.asarray(_native.dot_scores(mat, q))
    return _numpy_dot_scores(mat, q)


def signed_accumulate(dim: int, idx: np.ndarray, contrib: np.ndarray) -> np.ndarray:
    """Scatter-add signed contributions into a dim-length vector."""
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    contrib = np.ascontiguousarray(contrib, dtype=np.float64)
    if _native is not None:
        return np.asarray(_native.signed_accumulate(dim, idx, contrib))
    return _numpy_signed_accumulate(dim, idx, contrib)
