"""HTTP investigation service.

Orchestrates the retrieval flow: analyst queries (free text, transaction by
example, or account by example) are answered with ranked hits per embedding
space, subgraph exports for the top graph hits, attached narratives, and an
append-only analyst feedback log.
"""

from __future__ import annotations

import time
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from .errors import (
    EmptyIndex,
    IndexNotReady,
    UnknownAddress,
    UnknownTxId,
)
from .fusion import Hit
from .graph import extract_subgraph
from .graphenc import build_weights, encode_subgraph
from .narrative import embed_text
from .pipeline import InvestigationStore

MAX_SUBGRAPH_ATTACHMENTS = 5

_MODE_SPACES = {
    "text": ["narrative", "fused"],
    "tx_example": ["fused"],
    "account_example": ["graph"],
}


class QueryRequest(BaseModel):
    mode: Literal["text", "tx_example", "account_example"]
    text: Optional[str] = None
    tx_id: Optional[str] = None
    addr: Optional[str] = None
    k: int = Field(default=10, ge=1, le=100)
    spaces: Optional[list[Literal["fused", "seq", "narrative", "graph"]]] = None

    @model_validator(mode="after")
    def _exactly_one_selector(self):
        expected = {"text": self.text, "tx_example": self.tx_id, "account_example": self.addr}
        present = [m for m, v in expected.items() if v]
        if present != [self.mode]:
            raise ValueError(
                f"mode {self.mode!r} requires exactly its own selector field"
            )
        return self


class FeedbackRequest(BaseModel):
    feedback_id: str
    tx_id: str
    narrative_ok: bool
    corrected_text: Optional[str] = None
    note: str = ""
    created_ts: int = Field(ge=0)

    @model_validator(mode="after")
    def _correction_implies_not_ok(self):
        if self.corrected_text is not None and self.narrative_ok:
            raise ValueError("corrected_text requires narrative_ok=false")
        return self


def _hit_dict(h: Hit) -> dict:
    return {"id": h.id, "score": h.score, "space": h.space}


def answer_query(store: InvestigationStore, req: QueryRequest) -> dict:
    store.require_ready()
    t0 = time.monotonic()
    cfg = store.cfg
    spaces = _MODE_SPACES[req.mode]
    if req.spaces:
        spaces = [s for s in spaces if s in req.spaces]

    hits: list[Hit] = []
    flags: list[str] = []

    if req.mode == "text":
        q_n = embed_text(req.text, cfg.narrative_dim, cfg.narrative_seed)
        if "narrative" in spaces:
            hits.extend(store.narrative_index.topk(q_n, req.k))
        if "fused" in spaces:
            q_f = np.concatenate([np.zeros(cfg.seq.dim), q_n])
            hits.extend(store.fused_index.topk(q_f, req.k))
            flags.append("fused_seq_block_zero_padded")
    elif req.mode == "tx_example":
        rec = store.fused.get(req.tx_id)
        if rec is None:
            raise UnknownTxId(req.tx_id)
        if "fused" in spaces:
            hits.extend(store.fused_index.topk(rec.e_c, req.k))
    else:  # account_example
        q_g = store.node_index.get(req.addr)
        if q_g is None:
            if req.addr not in store.graph.nodes:
                raise UnknownAddress(req.addr)
            sg = extract_subgraph(
                store.graph, req.addr, cfg.subgraph_k, cfg.max_subgraph_nodes
            )
            q_g = encode_subgraph(sg, cfg.graph_enc, build_weights(cfg.graph_enc))
        if "graph" in spaces:
            hits.extend(store.node_index.topk(q_g, req.k))

    subgraphs = [
        store.get_subgraph_export(h.id, cfg.subgraph_k)
        for h in hits
        if h.space == "graph"
    ][:MAX_SUBGRAPH_ATTACHMENTS]

    narratives = {}
    for h in hits:
        if h.space in ("seq", "narrative", "fused") and h.id in store.narratives:
            rec = store.narratives[h.id]
            narratives[h.id] = {
                "text": rec.text,
                "flags": [] if rec.verified else ["unverified"],
            }

    return {
        "hits": [_hit_dict(h) for h in hits],
        "subgraphs": subgraphs,
        "narratives": narratives,
        "flags": flags,
        "elapsed_ms": int((time.monotonic() - t0) * 1000),
    }


def create_app(store: InvestigationStore) -> FastAPI:
    app = FastAPI(title="ledgerlens investigation service")

    def _wrap(fn, *args):
        try:
            return fn(*args)
        except (UnknownTxId, UnknownAddress) as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except (IndexNotReady, EmptyIndex) as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/v1/query")
    def query(req: QueryRequest):
        return _wrap(answer_query, store, req)

    @app.get("/v1/tx/{tx_id}")
    def get_tx(tx_id: str):
        tx = _wrap(store.get_tx, tx_id)
        return {
            "tx_id": tx.tx_id,
            "from": tx.from_addr,
            "to": tx.to_addr,
            "value": str(tx.value),
            "timestamp": tx.timestamp,
            "block": tx.block,
            "gas_used": tx.gas_used,
            "tags": list(tx.tags),
        }

    @app.get("/v1/subgraph/{addr}")
    def get_subgraph(addr: str, k: int = 2):
        return _wrap(store.get_subgraph_export, addr, k)

    @app.get("/v1/narrative/{tx_id}")
    def get_narrative(tx_id: str):
        rec = _wrap(store.get_narrative, tx_id)
        return {
            "tx_id": rec.tx_id,
            "text": rec.text,
            "rounds": [list(r) for r in rec.rounds],
            "backend_id": rec.backend_id,
            "flags": [] if rec.verified else ["unverified"],
            "versions": store.narrative_versions.get(tx_id, []),
        }

    @app.post("/v1/feedback")
    def feedback(fb: FeedbackRequest):
        _wrap(store.apply_feedback, fb.model_dump())
        return {"status": "stored", "feedback_id": fb.feedback_id}

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok" if store.ready else "not_ready",
            "transactions": len(store.corpus.transactions),
            "accounts": len(store.graph.nodes),
            "indexes": {
                "seq": len(store.seq_index),
                "narrative": len(store.narrative_index),
                "fused": len(store.fused_index),
                "graph": len(store.node_index),
            },
            "feedback_entries": len(store.feedback_log),
        }

    return app
