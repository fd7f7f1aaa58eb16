"""Transaction graph: accounts are nodes, transactions are directed edges.

Hop queries traverse undirected; extracted subgraphs keep edge direction.
A built TxGraph is immutable by convention and safe to share across readers.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownAddress
from .ingest import Corpus, Transaction

N_NODE_FEATURES = 7


@dataclass
class TxGraph:
    nodes: set[str] = field(default_factory=set)
    edges: list[Transaction] = field(default_factory=list)
    out_adj: dict[str, list[Transaction]] = field(default_factory=dict)
    in_adj: dict[str, list[Transaction]] = field(default_factory=dict)
    neighbors: dict[str, set[str]] = field(default_factory=dict)
    _incident_cache: dict[str, list[Transaction]] = field(default_factory=dict)

    def incident(self, addr: str) -> list[Transaction]:
        """All edges touching addr, ascending (timestamp, tx_id).

        Cached; the graph is immutable after build.
        """
        cached = self._incident_cache.get(addr)
        if cached is not None:
            return cached
        merged = self.out_adj.get(addr, []) + self.in_adj.get(addr, [])
        merged.sort(key=lambda t: t.sort_key)
        # self-transfers appear in both adjacency lists; keep one copy
        out: list[Transaction] = []
        for tx in merged:
            if not out or out[-1].tx_id != tx.tx_id:
                out.append(tx)
        self._incident_cache[addr] = out
        return out


@dataclass
class Subgraph:
    center: str
    radius: int
    nodes: dict[str, int]  # addr -> hop distance from center
    edges: list[Transaction]
    node_features: dict[str, np.ndarray]

    def export(self) -> dict:
        """Wire form consumed by the service and the UI."""
        return {
            "center": self.center,
            "radius": self.radius,
            "nodes": [
                {"addr": a, "hop": h, "features": self.node_features[a].tolist()}
                for a, h in sorted(self.nodes.items())
            ],
            "edges": [
                {
                    "from": e.from_addr,
                    "to": e.to_addr,
                    "tx_id": e.tx_id,
                    "value": str(e.value),
                    "timestamp": e.timestamp,
                }
                for e in self.edges
            ],
        }


def build_graph(corpus: Corpus) -> TxGraph:
    g = TxGraph()
    for tx in corpus.transactions:
        g.nodes.add(tx.from_addr)
        g.nodes.add(tx.to_addr)
        g.edges.append(tx)
        g.out_adj.setdefault(tx.from_addr, []).append(tx)
        g.in_adj.setdefault(tx.to_addr, []).append(tx)
        g.neighbors.setdefault(tx.from_addr, set()).add(tx.to_addr)
        g.neighbors.setdefault(tx.to_addr, set()).add(tx.from_addr)
    for adj in (g.out_adj, g.in_adj):
        for lst in adj.values():
            lst.sort(key=lambda t: t.sort_key)
    return g


def hop_distances(graph: TxGraph, center: str, k: int) -> dict[str, int]:
    """BFS over undirected neighbors, bounded to k hops."""
    if center not in graph.nodes:
        raise UnknownAddress(center)
    dist = {center: 0}
    frontier = deque([center])
    while frontier:
        u = frontier.popleft()
        if dist[u] == k:
            continue
        for v in graph.neighbors.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                frontier.append(v)
    return dist


def k_hop_nodes(graph: TxGraph, center: str, k: int) -> set[str]:
    return set(hop_distances(graph, center, k))


def _node_features(
    nodes: dict[str, int], edges: list[Transaction]
) -> dict[str, np.ndarray]:
    """Structural features over the induced (post-truncation) edge set only."""
    in_deg: dict[str, int] = {a: 0 for a in nodes}
    out_deg: dict[str, int] = {a: 0 for a in nodes}
    in_val: dict[str, int] = {a: 0 for a in nodes}
    out_val: dict[str, int] = {a: 0 for a in nodes}
    times: dict[str, list[int]] = {a: [] for a in nodes}
    for e in edges:
        out_deg[e.from_addr] += 1
        in_deg[e.to_addr] += 1
        out_val[e.from_addr] += e.value
        in_val[e.to_addr] += e.value
        times[e.from_addr].append(e.timestamp)
        if e.to_addr != e.from_addr:
            times[e.to_addr].append(e.timestamp)

    feats: dict[str, np.ndarray] = {}
    for a, hop in nodes.items():
        ts = sorted(times[a])
        if len(ts) >= 2:
            gaps = [math.log1p(t2 - t1) for t1, t2 in zip(ts, ts[1:])]
            mean_gap = sum(gaps) / len(gaps)
        else:
            mean_gap = 0.0
        feats[a] = np.array(
            [
                math.log1p(in_deg[a]),
                math.log1p(out_deg[a]),
                math.log1p(float(in_val[a])),
                math.log1p(float(out_val[a])),
                math.log1p(in_deg[a] + out_deg[a]),
                mean_gap,
                float(hop),
            ],
            dtype=np.float64,
        )
    return feats


def extract_subgraph(
    graph: TxGraph, center: str, k: int, max_nodes: int = 256
) -> Subgraph:
    """Induced k-hop ego subgraph, truncated deterministically to max_nodes.

    Truncation rank: ascending hop, then total incident value over the k-hop
    induced edge set descending, then address. Features are computed on the
    retained induced edges so the result depends only on the extract itself.
    """
    dist = hop_distances(graph, center, k)
    member = set(dist)
    induced = [
        e for e in graph.edges if e.from_addr in member and e.to_addr in member
    ]

    incident_value: dict[str, int] = {a: 0 for a in member}
    for e in induced:
        incident_value[e.from_addr] += e.value
        if e.to_addr != e.from_addr:
            incident_value[e.to_addr] += e.value

    ranked = sorted(member, key=lambda a: (dist[a], -incident_value[a], a))
    kept = ranked[:max_nodes]
    kept_set = set(kept)
    nodes = {a: dist[a] for a in kept}
    edges = [e for e in induced if e.from_addr in kept_set and e.to_addr in kept_set]
    edges.sort(key=lambda t: t.sort_key)
    return Subgraph(
        center=center,
        radius=k,
        nodes=nodes,
        edges=edges,
        node_features=_node_features(nodes, edges),
    )


def account_sequence(graph: TxGraph, addr: str, window: int) -> list[Transaction]:
    """The most recent `window` transactions incident to addr, in time order."""
    if addr not in graph.nodes:
        raise UnknownAddress(addr)
    inc = graph.incident(addr)
    return inc[-window:]


def sequence_ending_at(
    graph: TxGraph, addr: str, tx: Transaction, window: int
) -> list[Transaction]:
    """Incident history of addr up to and including tx, truncated to window."""
    if addr not in graph.nodes:
        raise UnknownAddress(addr)
    inc = graph.incident(addr)
    pos = bisect_right([t.sort_key for t in inc], tx.sort_key)
    return inc[max(0, pos - window) : pos]
