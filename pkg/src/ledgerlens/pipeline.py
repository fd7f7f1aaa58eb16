"""End-to-end store build: encode, narrate, fuse, index.

An InvestigationStore bundles the corpus, the transaction graph, all four
embedding spaces, the narrative records, and the feedback log. Queries are
read-only; feedback application serializes behind a lock and swaps index
rows atomically.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IndexNotReady, UnknownAddress, UnknownTxId
from .fusion import FusedRecord, Hit, VectorIndex, fuse
from .graph import TxGraph, build_graph, extract_subgraph, sequence_ending_at
from .graphenc import GraphEncoderConfig, build_weights, encode_subgraph
from .ingest import Corpus, Transaction, load_store, persist_corpus
from .narrative import (
    DeterministicBackend,
    NarrativeBackend,
    NarrativeRecord,
    embed_text,
    load_narratives,
    narrate,
    save_narratives,
)
from .seqenc import SeqEncoderConfig, encode_sequence


@dataclass(frozen=True)
class PipelineConfig:
    seq: SeqEncoderConfig = field(default_factory=SeqEncoderConfig)
    graph_enc: GraphEncoderConfig = field(default_factory=GraphEncoderConfig)
    narrative_dim: int = 64
    narrative_seed: int = 1
    w_t: float = 1.0
    w_n: float = 1.0
    subgraph_k: int = 2
    max_subgraph_nodes: int = 256
    max_rounds: int = 3

    def to_json(self) -> dict:
        return {
            "seq": {
                "dim": self.seq.dim,
                "window": self.seq.window,
                "decay": self.seq.decay,
                "seed": self.seq.seed,
            },
            "graph_enc": {
                "hidden_dim": self.graph_enc.hidden_dim,
                "out_dim": self.graph_enc.out_dim,
                "layers": self.graph_enc.layers,
                "heads": self.graph_enc.heads,
                "leaky_slope": self.graph_enc.leaky_slope,
                "seed": self.graph_enc.seed,
            },
            "narrative_dim": self.narrative_dim,
            "narrative_seed": self.narrative_seed,
            "w_t": self.w_t,
            "w_n": self.w_n,
            "subgraph_k": self.subgraph_k,
            "max_subgraph_nodes": self.max_subgraph_nodes,
            "max_rounds": self.max_rounds,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PipelineConfig":
        return cls(
            seq=SeqEncoderConfig(**obj.get("seq", {})),
            graph_enc=GraphEncoderConfig(**obj.get("graph_enc", {})),
            narrative_dim=obj.get("narrative_dim", 64),
            narrative_seed=obj.get("narrative_seed", 1),
            w_t=obj.get("w_t", 1.0),
            w_n=obj.get("w_n", 1.0),
            subgraph_k=obj.get("subgraph_k", 2),
            max_subgraph_nodes=obj.get("max_subgraph_nodes", 256),
            max_rounds=obj.get("max_rounds", 3),
        )


class InvestigationStore:
    def __init__(self, corpus: Corpus, cfg: PipelineConfig):
        self.corpus = corpus
        self.cfg = cfg
        self.graph: TxGraph = build_graph(corpus)
        self.tx_by_id: dict[str, Transaction] = corpus.tx_by_id()
        self.narratives: dict[str, NarrativeRecord] = {}
        self.narrative_versions: dict[str, list[str]] = {}
        self.fused: dict[str, FusedRecord] = {}
        self.seq_index = VectorIndex("seq", cfg.seq.dim)
        self.narrative_index = VectorIndex("narrative", cfg.narrative_dim)
        self.fused_index = VectorIndex(
            "fused", cfg.seq.dim + cfg.narrative_dim, weights=(cfg.w_t, cfg.w_n)
        )
        self.node_index = VectorIndex("graph", cfg.graph_enc.out_dim)
        self.feedback_log: list[dict] = []
        self.feedback_path: Path | None = None
        self._write_lock = threading.Lock()
        self.ready = False

    # -- build ------------------------------------------------------------

    def build(
        self,
        backend: NarrativeBackend | None = None,
        node_addrs: list[str] | None = None,
    ) -> "InvestigationStore":
        """Encode every transaction, narrate it, fuse, and index.

        node_addrs limits graph-space encoding to a subset of accounts
        (the benchmark samples accounts; the service encodes all).
        """
        backend = backend or DeterministicBackend()
        cfg = self.cfg
        e_t_map: dict[str, np.ndarray] = {}
        e_n_map: dict[str, np.ndarray] = {}
        e_c_map: dict[str, np.ndarray] = {}
        for tx in self.corpus.transactions:
            seq = sequence_ending_at(self.graph, tx.from_addr, tx, cfg.seq.window)
            e_t = encode_sequence(seq, tx.from_addr, cfg.seq)
            record = narrate(
                tx,
                self.corpus.meta,
                self.corpus.events,
                backend,
                max_rounds=cfg.max_rounds,
                embed_dim=cfg.narrative_dim,
                embed_seed=cfg.narrative_seed,
            )
            e_n = record.embedding
            e_c = fuse(e_t, e_n, cfg.w_t, cfg.w_n)
            self.narratives[tx.tx_id] = record
            self.fused[tx.tx_id] = FusedRecord(tx.tx_id, e_t, e_n, e_c)
            e_t_map[tx.tx_id] = e_t
            e_n_map[tx.tx_id] = e_n
            e_c_map[tx.tx_id] = e_c

        self.seq_index.rebuild(e_t_map)
        self.narrative_index.rebuild(e_n_map)
        self.fused_index.rebuild(e_c_map)
        self.build_node_index(node_addrs)
        self.ready = True
        return self

    def build_node_index(self, node_addrs: list[str] | None = None) -> None:
        cfg = self.cfg
        weights = build_weights(cfg.graph_enc)
        addrs = sorted(node_addrs) if node_addrs is not None else sorted(self.graph.nodes)
        e_g_map = {}
        for addr in addrs:
            sg = extract_subgraph(
                self.graph, addr, cfg.subgraph_k, cfg.max_subgraph_nodes
            )
            e_g_map[addr] = encode_subgraph(sg, cfg.graph_enc, weights)
        self.node_index.rebuild(e_g_map)

    # -- queries ----------------------------------------------------------

    def require_ready(self) -> None:
        if not self.ready:
            raise IndexNotReady("store has not been built or loaded")

    def get_tx(self, tx_id: str) -> Transaction:
        tx = self.tx_by_id.get(tx_id)
        if tx is None:
            raise UnknownTxId(tx_id)
        return tx

    def get_narrative(self, tx_id: str) -> NarrativeRecord:
        rec = self.narratives.get(tx_id)
        if rec is None:
            raise UnknownTxId(tx_id)
        return rec

    def get_subgraph_export(self, addr: str, k: int) -> dict:
        if addr not in self.graph.nodes:
            raise UnknownAddress(addr)
        return extract_subgraph(
            self.graph, addr, k, self.cfg.max_subgraph_nodes
        ).export()

    # -- feedback ---------------------------------------------------------

    def apply_feedback(self, fb: dict) -> None:
        """Append feedback durably; a correction replaces the served
        narrative text (original retained as a version) and re-embeds."""
        tx_id = fb["tx_id"]
        if tx_id not in self.tx_by_id:
            raise UnknownTxId(tx_id)
        corrected = fb.get("corrected_text")
        if corrected and fb.get("narrative_ok", False):
            raise ValueError("corrected_text requires narrative_ok=false")
        with self._write_lock:
            self.feedback_log.append(fb)
            if self.feedback_path is not None:
                with open(self.feedback_path, "a") as fh:
                    fh.write(json.dumps(fb, separators=(",", ":")) + "\n")
            if corrected:
                rec = self.narratives.get(tx_id)
                if rec is None:
                    raise UnknownTxId(tx_id)
                self.narrative_versions.setdefault(tx_id, []).append(rec.text)
                rec.text = corrected
                rec.verified = True
                rec.embedding = embed_text(
                    corrected, self.cfg.narrative_dim, self.cfg.narrative_seed
                )
                fused_rec = self.fused[tx_id]
                fused_rec.e_n = rec.embedding
                fused_rec.e_c = fuse(
                    fused_rec.e_t, fused_rec.e_n, self.cfg.w_t, self.cfg.w_n
                )
                self.narrative_index.update(tx_id, rec.embedding)
                self.fused_index.update(tx_id, fused_rec.e_c)

    # -- persistence --------------------------------------------------------

    def save(self, store_dir: str | Path) -> None:
        store = Path(store_dir)
        store.mkdir(parents=True, exist_ok=True)
        persist_corpus(self.corpus, store)
        save_narratives(store / "narratives.ndjson", self.narratives)
        self.seq_index.save(store / "seq.idx")
        self.narrative_index.save(store / "narrative.idx")
        self.fused_index.save(store / "fused.idx")
        self.node_index.save(store / "graph.idx")
        (store / "pipeline.json").write_text(json.dumps(self.to_json_cfg(), indent=2))

    def to_json_cfg(self) -> dict:
        return self.cfg.to_json()

    @classmethod
    def load(cls, store_dir: str | Path) -> "InvestigationStore":
        store = Path(store_dir)
        cfg = PipelineConfig.from_json(json.loads((store / "pipeline.json").read_text()))
        corpus = load_store(store)
        inst = cls(corpus, cfg)
        inst.narratives = load_narratives(
            store / "narratives.ndjson", cfg.narrative_dim, cfg.narrative_seed
        )
        inst.seq_index = VectorIndex.load(store / "seq.idx")
        inst.narrative_index = VectorIndex.load(store / "narrative.idx")
        inst.fused_index = VectorIndex.load(store / "fused.idx")
        inst.node_index = VectorIndex.load(store / "graph.idx")
        for tx_id, rec in inst.narratives.items():
            e_t = inst.seq_index.get(tx_id)
            e_c = inst.fused_index.get(tx_id)
            if e_t is not None and e_c is not None:
                inst.fused[tx_id] = FusedRecord(tx_id, e_t, rec.embedding, e_c)
        inst.feedback_path = store / "feedback.ndjson"
        if inst.feedback_path.exists():
            inst.feedback_log = [
                json.loads(ln)
                for ln in inst.feedback_path.read_text().splitlines()
                if ln.strip()
            ]
        inst.ready = True
        return inst


def build_store(
    corpus: Corpus,
    cfg: PipelineConfig | None = None,
    backend: NarrativeBackend | None = None,
    node_addrs: list[str] | None = None,
) -> InvestigationStore:
    store = InvestigationStore(corpus, cfg or PipelineConfig())
    t0 = time.monotonic()
    store.build(backend=backend, node_addrs=node_addrs)
    store.build_seconds = time.monotonic() - t0
    return store
