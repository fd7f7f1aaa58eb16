"""Connectivity encoder: attention aggregation over an account-centered subgraph.

Weights are drawn once per config from a seeded PCG64 generator in a fixed
order (layer by layer, head by head, then the output projection), so the
encoder is a pure function of (subgraph, config). Neighborhoods are
undirected; direction shows up only through the in/out node features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySubgraph
from .graph import N_NODE_FEATURES, Subgraph
from .vectors import unit


@dataclass(frozen=True)
class GraphEncoderConfig:
    hidden_dim: int = 32
    out_dim: int = 64
    layers: int = 2
    heads: int = 2
    leaky_slope: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.heads < 1:
            raise ValueError("heads must be >= 1")


@dataclass(frozen=True)
class HeadWeights:
    W: np.ndarray  # (in_dim, hidden_dim)
    a: np.ndarray  # (2 * hidden_dim,)


@dataclass(frozen=True)
class LayerWeights:
    heads: tuple[HeadWeights, ...]
    concat: bool  # concat head outputs (hidden layers) vs average (final)


@dataclass(frozen=True)
class EncoderWeights:
    layers: tuple[LayerWeights, ...]
    projection: np.ndarray  # (hidden_dim, out_dim)


def build_weights(cfg: GraphEncoderConfig) -> EncoderWeights:
    rng = np.random.default_rng(cfg.seed)
    layers: list[LayerWeights] = []
    in_dim = N_NODE_FEATURES
    for li in range(cfg.layers):
        concat = li < cfg.layers - 1
        heads = []
        for _ in range(cfg.heads):
            W = rng.standard_normal((in_dim, cfg.hidden_dim)) / np.sqrt(in_dim)
            a = rng.standard_normal(2 * cfg.hidden_dim)
            heads.append(HeadWeights(W=W, a=a))
        layers.append(LayerWeights(heads=tuple(heads), concat=concat))
        in_dim = cfg.hidden_dim * cfg.heads if concat else cfg.hidden_dim
    projection = rng.standard_normal((cfg.hidden_dim, cfg.out_dim)) / np.sqrt(
        cfg.hidden_dim
    )
    return EncoderWeights(layers=tuple(layers), projection=projection)


def _leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x >= 0, x, slope * x)


def _elu(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, x, np.expm1(x))


def attention_coefficients(
    h_u: np.ndarray,
    neighbors: list[np.ndarray],
    W: np.ndarray,
    a: np.ndarray,
    slope: float = 0.2,
) -> np.ndarray:
    """Softmax attention over the self-loop plus each neighbor.

    Returns len(neighbors) + 1 coefficients; index 0 is the self-loop. The
    softmax is stabilized by max-subtraction and must agree with the naive
    exponential form within 1e-9 on non-overflowing inputs.
    """
    if not neighbors:
        raise DimensionMismatch("neighbor list must be nonempty")
    h_u = np.asarray(h_u, dtype=np.float64)
    if h_u.shape[0] != W.shape[0]:
        raise DimensionMismatch(
            f"feature dim {h_u.shape[0]} does not match W rows {W.shape[0]}"
        )
    hidden = W.shape[1]
    if a.shape[0] != 2 * hidden:
        raise DimensionMismatch(f"attention vector must have length {2 * hidden}")
    z_u = h_u @ W
    scores = []
    for h_v in [h_u] + list(neighbors):
        h_v = np.asarray(h_v, dtype=np.float64)
        if h_v.shape[0] != W.shape[0]:
            raise DimensionMismatch("neighbor feature dim mismatch")
        z_v = h_v @ W
        e = float(a[:hidden] @ z_u + a[hidden:] @ z_v)
        scores.append(e)
    s = _leaky_relu(np.asarray(scores), slope)
    s = np.exp(s - np.max(s))
    return s / np.sum(s)


def _neighbor_map(subgraph: Subgraph) -> dict[str, list[str]]:
    nbrs: dict[str, set[str]] = {a: set() for a in subgraph.nodes}
    for e in subgraph.edges:
        if e.from_addr != e.to_addr:
            nbrs[e.from_addr].add(e.to_addr)
            nbrs[e.to_addr].add(e.from_addr)
    return {a: sorted(v) for a, v in nbrs.items()}


def aggregate_layer(
    subgraph: Subgraph,
    features: dict[str, np.ndarray],
    layer: LayerWeights,
    slope: float = 0.2,
) -> dict[str, np.ndarray]:
    """One attention pass: per node, ELU of the coefficient-weighted sum of
    projected neighbor (plus self) features; heads concatenated or averaged."""
    nbrs = _neighbor_map(subgraph)
    out: dict[str, np.ndarray] = {}
    for u in subgraph.nodes:
        head_outputs = []
        feats = np.stack([features[u]] + [features[v] for v in nbrs[u]])
        for head in layer.heads:
            hidden = head.W.shape[1]
            z_all = feats @ head.W
            if feats.shape[0] > 1:
                scores = float(head.a[:hidden] @ z_all[0]) + z_all @ head.a[hidden:]
                scores = _leaky_relu(scores, slope)
                scores = np.exp(scores - np.max(scores))
                alpha = scores / np.sum(scores)
            else:
                alpha = np.ones(1)
            head_outputs.append(_elu(alpha @ z_all))
        if layer.concat:
            out[u] = np.concatenate(head_outputs)
        else:
            out[u] = np.mean(head_outputs, axis=0)
    return out


def encode_subgraph(
    subgraph: Subgraph,
    cfg: GraphEncoderConfig,
    weights: EncoderWeights | None = None,
) -> np.ndarray:
    """Unit-norm connectivity embedding of an account-centered subgraph.

    Node vectors from the final layer are mean-pooled with weight
    1/(1 + hop distance) to keep the embedding centered on the query
    account, then projected to out_dim.
    """
    if not subgraph.nodes:
        raise EmptySubgraph("cannot encode an empty subgraph")
    if weights is None:
        weights = build_weights(cfg)
    feats = subgraph.node_features
    for layer in weights.layers:
        feats = aggregate_layer(subgraph, feats, layer, cfg.leaky_slope)

    pool_w = {a: 1.0 / (1.0 + hop) for a, hop in subgraph.nodes.items()}
    total = sum(pool_w.values())
    pooled = np.zeros(cfg.hidden_dim, dtype=np.float64)
    for a in sorted(subgraph.nodes):
        pooled += (pool_w[a] / total) * feats[a]
    return unit(pooled @ weights.projection)
