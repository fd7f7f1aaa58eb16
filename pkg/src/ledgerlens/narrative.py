"""Narrative generation with a generate -> critique -> refine loop.

Two backends: a deterministic template backend (used everywhere tests need
reproducibility, and as the fallback when no external model is reachable)
and an HTTP client for an external LLM. The critic judges four criteria --
coherence, relevance, accuracy, completeness -- which the deterministic
backend checks mechanically against the transaction facts.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    BackendTimeout,
    BackendUnavailable,
    EmptyText,
    IoFailure,
)
from .ingest import AccountMeta, ExternalEvent, Transaction
from .vectors import token_slot, unit

NARRATIVE_PROMPT = (
    "Given the provided cryptocurrency transaction details, its associated "
    "metadata, and relevant external events, generate a concise 3-point "
    "narrative encapsulating the transaction's essence."
)

CRITIC_PROMPT = (
    "Review the provided narrative generated for the cryptocurrency "
    "transaction. Assess its coherence, relevance, accuracy, and "
    "completeness. Provide refined output as an improvement if necessary."
)

CRITERIA = ("coherence", "relevance", "accuracy", "completeness")


@dataclass(frozen=True)
class PromptBundle:
    narrative_prompt: str
    critic_prompt: str
    transaction_details: str
    meta_information: str
    external_events: str

    def facts(self) -> dict[str, str]:
        """Parse the transaction_details block back into key/value facts."""
        out: dict[str, str] = {}
        for line in self.transaction_details.splitlines():
            if ": " in line:
                k, v = line.split(": ", 1)
                out[k] = v
        return out


@dataclass
class NarrativeRecord:
    tx_id: str
    text: str
    rounds: list[tuple[str, str, str]]  # (draft, critique, verdict)
    backend_id: str
    embedding: np.ndarray
    verified: bool = True


def format_date(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


def format_amount(value: int) -> str:
    return f"{value} wei"


def render_context(
    tx: Transaction,
    meta: list[AccountMeta],
    events: list[ExternalEvent],
) -> PromptBundle:
    """Build the prompt bundle: both prompt templates plus the three context
    blocks, in a fixed field order. Events are filtered to those overlapping
    the transaction timestamp; missing context renders as 'none known'."""
    details = "\n".join(
        [
            f"tx_id: {tx.tx_id}",
            f"date: {format_date(tx.timestamp)}",
            f"amount: {format_amount(tx.value)}",
            f"from: {tx.from_addr}",
            f"to: {tx.to_addr}",
            f"block: {tx.block}",
            f"gas_used: {tx.gas_used}",
            f"tags: {', '.join(tx.tags) if tx.tags else 'none'}",
        ]
    )

    relevant_meta = [m for m in meta if m.addr in (tx.from_addr, tx.to_addr)]
    relevant_meta.sort(key=lambda m: (m.addr != tx.from_addr, m.addr))
    if relevant_meta:
        meta_lines = []
        for m in relevant_meta:
            assoc = ", ".join(m.known_associations) if m.known_associations else "none"
            note = m.risk_notes if m.risk_notes else "none"
            meta_lines.append(f"{m.addr}: associations={assoc}; notes={note}")
        meta_block = "\n".join(meta_lines)
    else:
        meta_block = "none known"

    overlapping = [e for e in events if e.start_ts <= tx.timestamp <= e.end_ts]
    overlapping.sort(key=lambda e: (e.start_ts, e.event_id))
    if overlapping:
        event_block = "\n".join(
            f"{e.event_id}: {e.description} "
            f"({format_date(e.start_ts)} to {format_date(e.end_ts)})"
            for e in overlapping
        )
    else:
        event_block = "none known"

    return PromptBundle(
        narrative_prompt=NARRATIVE_PROMPT,
        critic_prompt=CRITIC_PROMPT,
        transaction_details=details,
        meta_information=meta_block,
        external_events=event_block,
    )


class NarrativeBackend:
    """Interface for narrative generation and critique."""

    backend_id = "abstract"

    def generate(self, bundle: PromptBundle) -> str:
        raise NotImplementedError

    def critique(
        self, draft: str, bundle: PromptBundle
    ) -> tuple[str, str, str | None]:
        """Returns (verdict 'accept'|'revise', critique text, optional revision)."""
        raise NotImplementedError


def _render_template(bundle: PromptBundle) -> str:
    facts = bundle.facts()
    b1 = (
        f"- On {facts.get('date', '?')}, {facts.get('amount', '?')} was "
        f"transferred from {facts.get('from', '?')} to {facts.get('to', '?')}."
    )
    if bundle.external_events != "none known":
        first_event = bundle.external_events.splitlines()[0]
        desc = first_event.split(": ", 1)[1] if ": " in first_event else first_event
        b2 = f"- This transaction occurred during {desc}."
    else:
        b2 = "- No notable external events overlapped this transaction."
    if bundle.meta_information != "none known":
        first_meta = bundle.meta_information.splitlines()[0]
        addr = first_meta.split(":", 1)[0]
        info = first_meta.split(": ", 1)[1] if ": " in first_meta else first_meta
        b3 = f"- Notably, {addr} has {info}."
    else:
        b3 = "- No prior associations are known for either account."
    return "\n".join([b1, b2, b3])


def check_criteria(draft: str, bundle: PromptBundle) -> list[str]:
    """Mechanical pass over the four critic criteria; returns failures."""
    facts = bundle.facts()
    failures = []
    bullets = [ln for ln in draft.splitlines() if ln.startswith("- ")]
    if len(bullets) != 3:
        failures.append("coherence")
    if facts.get("from", "") not in draft or facts.get("to", "") not in draft:
        failures.append("relevance")
    if facts.get("amount", "") not in draft or facts.get("date", "") not in draft:
        failures.append("accuracy")
    if bundle.external_events != "none known":
        first_event = bundle.external_events.splitlines()[0]
        desc = first_event.split(": ", 1)[1] if ": " in first_event else first_event
        if desc not in draft:
            failures.append("completeness")
    return failures


class DeterministicBackend(NarrativeBackend):
    """Template renderer plus mechanical critic. Pure and byte-stable."""

    backend_id = "deterministic"

    def generate(self, bundle: PromptBundle) -> str:
        return _render_template(bundle)

    def critique(self, draft, bundle):
        failures = check_criteria(draft, bundle)
        if not failures:
            return ("accept", "all criteria satisfied", None)
        critique = "failed: " + ", ".join(failures)
        return ("revise", critique, _render_template(bundle))


class ExternalBackend(NarrativeBackend):
    """HTTP client for an external LLM endpoint.

    Request body: {"prompt": ..., "max_tokens": ..., "temperature": 0};
    response body: {"text": ...}. The bearer token is read from the
    environment variable named in the constructor.
    """

    backend_id = "external"

    def __init__(self, endpoint: str, credential_env: str = "LEDGERLENS_LLM_TOKEN",
                 timeout: float = 30.0, max_tokens: int = 512):
        self.endpoint = endpoint
        self.credential_env = credential_env
        self.timeout = timeout
        self.max_tokens = max_tokens

    def _complete(self, prompt: str) -> str:
        import httpx

        headers = {}
        token = os.environ.get(self.credential_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            resp = httpx.post(
                self.endpoint,
                json={"prompt": prompt, "max_tokens": self.max_tokens, "temperature": 0},
                headers=headers,
                timeout=self.timeout,
            )
        except httpx.TimeoutException as exc:
            raise BackendTimeout(str(exc))
        except httpx.HTTPError as exc:
            raise BackendUnavailable(str(exc))
        if resp.status_code != 200:
            raise BackendUnavailable(f"status {resp.status_code}")
        return resp.json().get("text", "")

    def generate(self, bundle: PromptBundle) -> str:
        prompt = "\n\n".join(
            [
                bundle.narrative_prompt,
                bundle.transaction_details,
                bundle.meta_information,
                bundle.external_events,
            ]
        )
        return self._complete(prompt)

    def critique(self, draft, bundle):
        prompt = "\n\n".join(
            [bundle.critic_prompt, draft, bundle.transaction_details]
        )
        response = self._complete(prompt)
        first = response.splitlines()[0].lower() if response else ""
        if "accept" in first:
            return ("accept", response, None)
        rest = "\n".join(response.splitlines()[1:]).strip()
        return ("revise", response, rest or None)


def generate_narrative(bundle: PromptBundle, backend: NarrativeBackend) -> str:
    return backend.generate(bundle)


def critique(
    draft: str, bundle: PromptBundle, backend: NarrativeBackend
) -> tuple[str, str, str | None]:
    if not draft:
        raise EmptyText("draft is empty")
    return backend.critique(draft, bundle)


def embed_text(text: str, dim: int, seed: int) -> np.ndarray:
    """Reference text embedder: lowercase word unigrams plus adjacent-word
    bigrams (degenerate repeated-word bigrams skipped), signed-hashed into
    dim buckets and L2-normalized."""
    if not text or not text.strip():
        raise EmptyText("cannot embed empty text")
    words = re.findall(r"[a-z0-9]+", text.lower())
    if not words:
        raise EmptyText("no word tokens in text")
    tokens = [f"w:{w}" for w in words]
    tokens.extend(
        f"b:{w1}_{w2}" for w1, w2 in zip(words, words[1:]) if w1 != w2
    )
    idx = []
    contrib = []
    for token in tokens:
        slot, sign = token_slot(token, seed, dim)
        idx.append(slot)
        contrib.append(sign)
    v = kernels.signed_accumulate(
        dim, np.asarray(idx, dtype=np.int64), np.asarray(contrib, dtype=np.float64)
    )
    return unit(v)


def narrate(
    tx: Transaction,
    meta: list[AccountMeta],
    events: list[ExternalEvent],
    backend: NarrativeBackend,
    max_rounds: int = 3,
    embed_dim: int = 64,
    embed_seed: int = 0,
    fallback: NarrativeBackend | None = None,
) -> NarrativeRecord:
    """Run the generate/critique loop and embed the final narrative.

    Stops on the first accept or after max_rounds critique passes; a never-
    accepted narrative keeps the final revision (or last draft) and is
    flagged unverified rather than dropped.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    bundle = render_context(tx, meta, events)
    try:
        draft = backend.generate(bundle)
        active = backend
    except (BackendUnavailable, BackendTimeout):
        if fallback is None:
            raise
        active = fallback
        draft = active.generate(bundle)

    rounds: list[tuple[str, str, str]] = []
    text = draft
    verified = False
    for _ in range(max_rounds):
        verdict, critique_text, revised = active.critique(draft, bundle)
        rounds.append((draft, critique_text, verdict))
        if verdict == "accept":
            text = draft
            verified = True
            break
        text = revised if revised is not None else draft
        draft = text
    return NarrativeRecord(
        tx_id=tx.tx_id,
        text=text,
        rounds=rounds,
        backend_id=active.backend_id,
        embedding=embed_text(text, embed_dim, embed_seed),
        verified=verified,
    )


def save_narratives(path: str | Path, records: dict[str, NarrativeRecord]) -> None:
    try:
        with open(path, "w") as fh:
            for tx_id in sorted(records):
                r = records[tx_id]
                fh.write(
                    json.dumps(
                        {
                            "tx_id": r.tx_id,
                            "text": r.text,
                            "rounds": [list(t) for t in r.rounds],
                            "backend_id": r.backend_id,
                            "flags": [] if r.verified else ["unverified"],
                        },
                        separators=(",", ":"),
                    )
                    + "\n"
                )
    except OSError as exc:
        raise IoFailure(str(exc))


def load_narratives(
    path: str | Path, embed_dim: int, embed_seed: int
) -> dict[str, NarrativeRecord]:
    out: dict[str, NarrativeRecord] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise IoFailure(str(exc))
    for line in lines:
        if not line.strip():
            continue
        rec = json.loads(line)
        out[rec["tx_id"]] = NarrativeRecord(
            tx_id=rec["tx_id"],
            text=rec["text"],
            rounds=[tuple(t) for t in rec["rounds"]],
            backend_id=rec["backend_id"],
            embedding=embed_text(rec["text"], embed_dim, embed_seed),
            verified="unverified" not in rec.get("flags", []),
        )
    return out
