"""Synthetic corpora with planted mixing chains, plus retrieval evaluation.

Background traffic is drawn over a fixed address pool with log-normal
values. Each mixing template instance is a chain of hops through fresh
addresses at a disjoint time offset; labels map every transaction back to
its (template, instance) or to background. Evaluation queries planted
transactions and asks whether the fused index surfaces the *other*
instance of the same template, never crediting same-instance hits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NoPlantedPatterns
from .ingest import Corpus, Transaction
from .pipeline import InvestigationStore, PipelineConfig, build_store

BASE_TS = 1_600_000_000
BACKGROUND_POOL = 200
INSTANCE_SPACING = 10_000_000

Label = "tuple[str, int] | None"


@dataclass(frozen=True)
class MixingTemplate:
    template_id: str = "chain25"
    chain_len: int = 25
    fan: int = 2
    hop_gap_mean: float = 600.0
    hop_gap_jitter: float = 60.0
    value_noise: float = 0.05
    start_value: int = 10**18
    seed: int = 0

    def __post_init__(self):
        if self.chain_len < 2:
            raise ValueError("chain_len must be >= 2")
        if self.fan < 1:
            raise ValueError("fan must be >= 1")


def chain25() -> MixingTemplate:
    """The default benchmark template: a linear 25-hop mixing chain."""
    return MixingTemplate(template_id="chain25", chain_len=25, fan=1)


TEMPLATE_PRESETS = {"chain25": chain25, "fan2": lambda: MixingTemplate("fan2")}


def _rand_addr(rng: np.random.Generator) -> str:
    return "0x" + rng.bytes(20).hex()


def _rand_tx_id(rng: np.random.Generator) -> str:
    return "0x" + rng.bytes(32).hex()


def _instantiate_template(
    tpl: MixingTemplate, start_ts: int, rng: np.random.Generator
) -> list[Transaction]:
    addrs = [_rand_addr(rng) for _ in range(tpl.chain_len + 1)]
    txs: list[Transaction] = []
    ts = start_ts
    value = tpl.start_value
    for hop in range(tpl.chain_len):
        ts += max(1, int(rng.normal(tpl.hop_gap_mean, tpl.hop_gap_jitter)))
        value = max(1, int(value * (1.0 - rng.uniform(0.0, tpl.value_noise))))
        txs.append(
            Transaction(
                tx_id=_rand_tx_id(rng),
                from_addr=addrs[hop],
                to_addr=addrs[hop + 1],
                value=value,
                timestamp=ts,
                block=ts // 12,
                gas_used=21_000,
            )
        )
        # side splits: fan-1 dead-end outputs per hop
        for _ in range(tpl.fan - 1):
            side_value = max(1, int(value * rng.uniform(0.1, 0.5)))
            txs.append(
                Transaction(
                    tx_id=_rand_tx_id(rng),
                    from_addr=addrs[hop],
                    to_addr=_rand_addr(rng),
                    value=side_value,
                    timestamp=ts + 1,
                    block=(ts + 1) // 12,
                    gas_used=21_000,
                )
            )
    return txs


def gen_corpus(
    n_background: int,
    templates: list[MixingTemplate],
    n_instances_per_template: int,
    seed: int,
) -> tuple[Corpus, dict[str, tuple[str, int] | None]]:
    """Background + planted instances; returns the corpus and per-tx labels."""
    rng = np.random.default_rng(seed)
    txs: list[Transaction] = []
    labels: dict[str, tuple[str, int] | None] = {}

    pool = [_rand_addr(rng) for _ in range(min(BACKGROUND_POOL, max(2, n_background)))]
    span = max(1, n_background * 30)
    for _ in range(n_background):
        i, j = rng.choice(len(pool), size=2, replace=False)
        ts = BASE_TS + int(rng.integers(0, span))
        tx = Transaction(
            tx_id=_rand_tx_id(rng),
            from_addr=pool[int(i)],
            to_addr=pool[int(j)],
            value=max(1, int(rng.lognormal(mean=math.log(1e17), sigma=2.0))),
            timestamp=ts,
            block=ts // 12,
            gas_used=int(rng.integers(21_000, 300_000)),
        )
        txs.append(tx)
        labels[tx.tx_id] = None

    instance_no = 0
    for tpl in templates:
        for inst in range(n_instances_per_template):
            instance_no += 1
            start_ts = BASE_TS + span + instance_no * INSTANCE_SPACING
            planted = _instantiate_template(tpl, start_ts, rng)
            for tx in planted:
                labels[tx.tx_id] = (tpl.template_id, inst)
            txs.extend(planted)

    txs.sort(key=lambda t: t.sort_key)
    return Corpus(transactions=txs), labels


@dataclass
class BenchReport:
    recall_at_k: dict[int, float] = field(default_factory=dict)
    graph_recall_at_k: dict[int, float] = field(default_factory=dict)
    per_seed: list[dict] = field(default_factory=list)
    corpus_stats: dict = field(default_factory=dict)
    chance_baseline: float = 0.0
    control_recall: float | None = None

    def to_json(self) -> dict:
        return {
            "recall_at_k": {str(k): v for k, v in self.recall_at_k.items()},
            "graph_recall_at_k": {
                str(k): v for k, v in self.graph_recall_at_k.items()
            },
            "per_seed": self.per_seed,
            "corpus_stats": self.corpus_stats,
            "chance_baseline": self.chance_baseline,
            "control_recall": self.control_recall,
        }


def _planted_accounts(
    corpus: Corpus, labels: dict[str, tuple[str, int] | None]
) -> dict[str, tuple[str, int]]:
    """Address -> (template, instance); chain addresses are instance-fresh."""
    out: dict[str, tuple[str, int]] = {}
    for tx in corpus.transactions:
        lab = labels.get(tx.tx_id)
        if lab is not None:
            out[tx.from_addr] = lab
            out[tx.to_addr] = lab
    return out


def eval_retrieval(
    store: InvestigationStore,
    labels: dict[str, tuple[str, int] | None],
    k: int,
    n_queries: int,
    seed: int,
    eval_graph_space: bool = True,
) -> dict:
    """Cross-instance recall@k for one built store.

    Queries are planted transactions from each template's first instance;
    hits from the query's own instance are excluded before counting k.
    """
    rng = np.random.default_rng(seed)
    planted = [t for t, lab in labels.items() if lab is not None]
    if not planted:
        raise NoPlantedPatterns("corpus has no planted labels")

    first_instance = [t for t in planted if labels[t][1] == 0]
    n_queries = min(n_queries, len(first_instance))
    chosen = rng.choice(len(first_instance), size=n_queries, replace=False)
    queries = [first_instance[int(i)] for i in chosen]

    max_instance = max(len([t for t in planted if labels[t][0] == tpl])
                       for tpl in {labels[t][0] for t in planted})
    successes = 0
    per_query = []
    for q in queries:
        tpl_id, inst = labels[q]
        rec = store.fused[q]
        raw = store.fused_index.topk(rec.e_c, k + max_instance + 1)
        hits = [
            h for h in raw
            if h.id != q and labels.get(h.id) != (tpl_id, inst)
        ][:k]
        ok = any(
            labels.get(h.id) is not None
            and labels[h.id][0] == tpl_id
            and labels[h.id][1] != inst
            for h in hits
        )
        successes += ok
        per_query.append({"query": q, "success": bool(ok)})
    recall = successes / n_queries if n_queries else 0.0

    graph_recall = None
    if eval_graph_space and len(store.node_index) > 0:
        acct_labels = _planted_accounts(store.corpus, labels)
        hub_accounts = sorted(
            a for a, lab in acct_labels.items()
            if lab[1] == 0 and store.node_index.get(a) is not None
        )
        g_success = 0
        g_total = 0
        for addr in hub_accounts[: n_queries]:
            tpl_id, inst = acct_labels[addr]
            q_g = store.node_index.get(addr)
            raw = store.node_index.topk(q_g, k + len(hub_accounts) + 1)
            hits = [
                h for h in raw
                if h.id != addr and acct_labels.get(h.id) != (tpl_id, inst)
            ][:k]
            g_total += 1
            g_success += any(
                acct_labels.get(h.id) is not None
                and acct_labels[h.id][0] == tpl_id
                and acct_labels[h.id][1] != inst
                for h in hits
            )
        graph_recall = g_success / g_total if g_total else 0.0

    return {
        "recall": recall,
        "graph_recall": graph_recall,
        "n_queries": n_queries,
        "per_query": per_query,
    }


def run_benchmark(
    n_background: int = 5000,
    template: MixingTemplate | None = None,
    n_instances: int = 2,
    k: int = 10,
    n_queries: int = 20,
    seeds: list[int] | None = None,
    cfg: PipelineConfig | None = None,
    background_node_sample: int = 50,
    with_control: bool = True,
) -> BenchReport:
    """Generate + build + evaluate over a list of seeds; aggregates recall."""
    template = template or chain25()
    seeds = seeds if seeds is not None else list(range(20))
    cfg = cfg or PipelineConfig()
    report = BenchReport()

    recalls = []
    graph_recalls = []
    for s in seeds:
        corpus, labels = gen_corpus(n_background, [template], n_instances, seed=s)
        acct_labels = _planted_accounts(corpus, labels)
        rng = np.random.default_rng(s + 1)
        background_accounts = sorted(
            {a for tx in corpus.transactions for a in (tx.from_addr, tx.to_addr)}
            - set(acct_labels)
        )
        sample_n = min(background_node_sample, len(background_accounts))
        sampled = (
            [background_accounts[int(i)]
             for i in rng.choice(len(background_accounts), size=sample_n, replace=False)]
            if sample_n
            else []
        )
        node_addrs = sorted(set(acct_labels) | set(sampled))
        store = build_store(corpus, cfg, node_addrs=node_addrs)
        result = eval_retrieval(store, labels, k, n_queries, seed=s)
        result["seed"] = s
        report.per_seed.append(result)
        recalls.append(result["recall"])
        if result["graph_recall"] is not None:
            graph_recalls.append(result["graph_recall"])

    report.recall_at_k[k] = float(np.mean(recalls)) if recalls else 0.0
    if graph_recalls:
        report.graph_recall_at_k[k] = float(np.mean(graph_recalls))
    n_planted = template.chain_len * template.fan * n_instances
    report.corpus_stats = {
        "background": n_background,
        "planted_per_corpus": n_planted,
        "total": n_background + n_planted,
        "template": template.template_id,
        "instances": n_instances,
        "seeds": seeds,
    }
    report.chance_baseline = k / (n_background + n_planted)

    if with_control and n_background > 0:
        report.control_recall = _control_run(
            n_background, template, k, n_queries, seed=seeds[0], cfg=cfg
        )
    return report


def _control_run(
    n_background: int,
    template: MixingTemplate,
    k: int,
    n_queries: int,
    seed: int,
    cfg: PipelineConfig,
) -> float:
    """Pure-background corpus with pseudo-labels: chance-level reference."""
    corpus, _ = gen_corpus(n_background, [], 0, seed=seed)
    rng = np.random.default_rng(seed + 17)
    ids = [t.tx_id for t in corpus.transactions]
    size = min(n_queries, len(ids) // 2)
    picks = rng.choice(len(ids), size=2 * size, replace=False)
    pseudo: dict[str, tuple[str, int] | None] = {t: None for t in ids}
    # Distinct pseudo template per pair so a "hit" means finding one
    # specific random counterpart, i.e. chance level ~ k / corpus size.
    for j, i in enumerate(picks):
        pseudo[ids[int(i)]] = (f"pseudo-{j % size}", 0 if j < size else 1)
    store = build_store(corpus, cfg, node_addrs=[])
    result = eval_retrieval(
        store, pseudo, k, n_queries, seed=seed, eval_graph_space=False
    )
    return result["recall"]


def save_labels(path: str | Path, labels: dict[str, tuple[str, int] | None]) -> None:
    obj = {
        t: (None if lab is None else {"template": lab[0], "instance": lab[1]})
        for t, lab in labels.items()
    }
    Path(path).write_text(json.dumps(obj, indent=0, sort_keys=True))


def load_labels(path: str | Path) -> dict[str, tuple[str, int] | None]:
    obj = json.loads(Path(path).read_text())
    return {
        t: (None if lab is None else (lab["template"], lab["instance"]))
        for t, lab in obj.items()
    }
