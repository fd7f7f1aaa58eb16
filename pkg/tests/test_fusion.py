import math

import numpy as np
import pytest

from ledgerlens.errors import DimensionMismatch, EmptyIndex, ZeroVector
from ledgerlens.fusion import Hit, VectorIndex, cosine, fuse, node_topk, topk


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def brute_force_topk(items: dict[str, np.ndarray], q: np.ndarray, k: int):
    scored = []
    for key, v in items.items():
        num = sum(a * b for a, b in zip(q, v))
        den = math.sqrt(sum(a * a for a in q)) * math.sqrt(sum(b * b for b in v))
        scored.append((key, num / den))
    scored.sort(key=lambda p: (-p[1], p[0]))
    return scored[:k]


def test_fuse_equal_weights():
    out = fuse(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert np.allclose(out, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], atol=1e-12)


def test_fuse_weighted():
    out = fuse(np.array([1.0, 0.0]), np.array([0.0, 1.0]), w_t=2, w_n=1)
    assert np.allclose(out, [2 / math.sqrt(5), 0, 0, 1 / math.sqrt(5)], atol=1e-12)


def test_fuse_unit_norm(rng):
    for _ in range(50):
        e_t = unit(rng.standard_normal(16))
        e_n = unit(rng.standard_normal(8))
        out = fuse(e_t, e_n, w_t=rng.uniform(0.1, 3), w_n=rng.uniform(0.1, 3))
        assert abs(np.linalg.norm(out) - 1.0) <= 1e-9


def test_fuse_zero_block_rejected():
    with pytest.raises(ZeroVector):
        fuse(np.zeros(4), unit(np.ones(4)))


def test_fuse_block_isolation_analytics(rng):
    # identical e_t, orthogonal e_n, default weights -> cosine exactly 1/2
    e_t = unit(rng.standard_normal(8))
    e_n1 = np.zeros(8)
    e_n1[0] = 1.0
    e_n2 = np.zeros(8)
    e_n2[1] = 1.0
    c = cosine(fuse(e_t, e_n1), fuse(e_t, e_n2))
    assert abs(c - 0.5) <= 1e-9


def test_cosine_units():
    v = np.array([0.3, -0.4, 0.5])
    assert abs(cosine(v, v) - 1.0) <= 1e-9
    assert abs(cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0]))) <= 1e-9
    assert abs(cosine(np.array([1.0, 0.0]), np.array([1.0, 1.0])) - 1 / math.sqrt(2)) <= 1e-9


def test_cosine_symmetry(rng):
    for _ in range(20):
        q = rng.standard_normal(16)
        x = rng.standard_normal(16)
        assert abs(cosine(q, x) - cosine(x, q)) <= 1e-12


def test_cosine_errors():
    with pytest.raises(DimensionMismatch):
        cosine(np.ones(3), np.ones(4))
    with pytest.raises(ZeroVector):
        cosine(np.zeros(3), np.ones(3))


def make_index(items, space="fused"):
    dim = len(next(iter(items.values())))
    idx = VectorIndex(space, dim)
    idx.rebuild(items)
    return idx


def test_topk_single_vector(rng):
    idx = make_index({"only": unit(rng.standard_normal(8))})
    hits = topk(idx, rng.standard_normal(8), k=5)
    assert [h.id for h in hits] == ["only"]
    assert hits[0].space == "fused"


def test_topk_self_query_first(rng):
    items = {f"v{i}": unit(rng.standard_normal(8)) for i in range(20)}
    idx = make_index(items)
    hits = topk(idx, items["v7"], k=3)
    assert hits[0].id == "v7"
    assert abs(hits[0].score - 1.0) <= 1e-9


def test_topk_matches_brute_force(rng):
    items = {f"v{i:04d}": unit(rng.standard_normal(64)) for i in range(300)}
    idx = make_index(items)
    for _ in range(20):
        q = rng.standard_normal(64)
        for k in (1, 5, 10):
            got = topk(idx, q, k)
            want = brute_force_topk(items, q, k)
            assert [h.id for h in got] == [w[0] for w in want]
            for h, w in zip(got, want):
                assert abs(h.score - w[1]) <= 1e-9


def test_topk_full_enumeration(rng):
    items = {f"v{i}": unit(rng.standard_normal(8)) for i in range(50)}
    idx = make_index(items)
    hits = topk(idx, rng.standard_normal(8), k=len(items))
    assert sorted(h.id for h in hits) == sorted(items)
    scores = [h.score for h in hits]
    assert scores == sorted(scores, reverse=True)


def test_topk_scale_invariance(rng):
    items = {f"v{i}": unit(rng.standard_normal(16)) for i in range(100)}
    idx = make_index(items)
    q = rng.standard_normal(16)
    base = [h.id for h in topk(idx, q, 10)]
    for c in (0.001, 3.7, 1e6):
        assert [h.id for h in topk(idx, c * q, 10)] == base


def test_topk_tie_break_by_id(rng):
    v = unit(rng.standard_normal(8))
    idx = make_index({"bbb": v, "aaa": v, "ccc": v})
    hits = topk(idx, v, 3)
    assert [h.id for h in hits] == ["aaa", "bbb", "ccc"]


def test_topk_errors(rng):
    idx = VectorIndex("fused", 8)
    with pytest.raises(EmptyIndex):
        idx.topk(np.ones(8), 1)
    idx.rebuild({"a": unit(np.ones(8))})
    with pytest.raises(DimensionMismatch):
        idx.topk(np.ones(4), 1)


def test_node_topk(rng):
    items = {"acct1": unit(rng.standard_normal(8))}
    idx = make_index(items, space="graph")
    hits = node_topk(idx, items["acct1"], 5)
    assert hits[0].id == "acct1"
    assert abs(hits[0].score - 1.0) <= 1e-9


def test_index_save_load(tmp_path, rng):
    items = {f"v{i}": unit(rng.standard_normal(16)) for i in range(30)}
    idx = VectorIndex("narrative", 16, weights=(1.0, 2.0))
    idx.rebuild(items)
    idx.save(tmp_path / "x.idx")
    loaded = VectorIndex.load(tmp_path / "x.idx")
    assert loaded.space == "narrative"
    assert loaded.weights == (1.0, 2.0)
    q = rng.standard_normal(16)
    assert [h.id for h in loaded.topk(q, 10)] == [h.id for h in idx.topk(q, 10)]


def test_index_update_replaces_entry(rng):
    items = {f"v{i}": unit(rng.standard_normal(8)) for i in range(5)}
    idx = make_index(items)
    new = unit(rng.standard_normal(8))
    idx.update("v2", new)
    assert np.allclose(idx.get("v2"), new)
    hits = idx.topk(new, 1)
    assert hits[0].id == "v2"
