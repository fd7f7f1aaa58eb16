#!/usr/bin/env python3
"""Compare the compiled kernel extension against the pure-numpy fallback.

Run from the repo root:

    python3 benchmarks/bench_kernels.py [--rows 20000] [--dim 64] [--repeat 20]

Both backends are exercised in-process (the fallback is reached directly,
not via the LEDGERLENS_PURE switch) and results are cross-checked before
timing, so a wrong-but-fast kernel cannot win.
"""

import argparse
import time

import numpy as np

from ledgerlens import kernels
from ledgerlens.kernels import _numpy_dot_scores, _numpy_signed_accumulate


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=20000)
    ap.add_argument("--dim", type=int, default=64)
    ap.add_argument("--tokens", type=int, default=200000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    mat = np.ascontiguousarray(rng.standard_normal((args.rows, args.dim)))
    q = np.ascontiguousarray(rng.standard_normal(args.dim))
    idx = rng.integers(0, args.dim, size=args.tokens).astype(np.int64)
    contrib = rng.standard_normal(args.tokens)

    print(f"active backend: {kernels.backend_name()}")
    print(f"dot_scores: {args.rows} x {args.dim}; signed_accumulate: {args.tokens} tokens")

    assert np.allclose(
        kernels.dot_scores(mat, q), _numpy_dot_scores(mat, q), atol=1e-9
    )
    assert np.allclose(
        kernels.signed_accumulate(args.dim, idx, contrib),
        _numpy_signed_accumulate(args.dim, idx, contrib),
        atol=1e-9,
    )

    rows = [
        ("dot_scores", lambda: kernels.dot_scores(mat, q),
         lambda: _numpy_dot_scores(mat, q)),
        ("signed_accumulate",
         lambda: kernels.signed_accumulate(args.dim, idx, contrib),
         lambda: _numpy_signed_accumulate(args.dim, idx, contrib)),
    ]
    print(f"{'kernel':<18}{'active (ms)':>12}{'numpy (ms)':>12}{'speedup':>9}")
    for name, active, fallback in rows:
        ta = _time(active, args.repeat) * 1e3
        tn = _time(fallback, args.repeat) * 1e3
        print(f"{name:<18}{ta:>12.3f}{tn:>12.3f}{tn / ta:>8.2f}x")


if __name__ == "__main__":
    main()
