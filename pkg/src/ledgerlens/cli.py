"""Command-line entry points: ingest, synth gen/eval, pipeline build, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .ingest import load_corpus, load_store, persist_corpus
from .pipeline import InvestigationStore, PipelineConfig, build_store
from .synth import (
    TEMPLATE_PRESETS,
    gen_corpus,
    run_benchmark,
    save_labels,
)


@click.group()
def cli():
    """Multimodal transaction investigation toolkit."""


@cli.command()
@click.option("--tx", "tx_path", required=True, type=click.Path(exists=True))
@click.option("--events", "events_path", type=click.Path(exists=True))
@click.option("--meta", "meta_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def ingest(tx_path, events_path, meta_path, out_dir):
    """Parse, validate and persist a transaction corpus into a store dir."""
    corpus = load_corpus(tx_path, events_path, meta_path)
    persist_corpus(corpus, out_dir)
    click.echo(
        f"loaded {corpus.report.loaded} transactions "
        f"({corpus.report.rejected} rejected), "
        f"{len(corpus.events)} events, {len(corpus.meta)} meta records -> {out_dir}"
    )
    for err in corpus.report.errors:
        click.echo(f"  rejected: {err}", err=True)


@cli.group()
def synth():
    """Synthetic corpora with planted mixing patterns."""


@synth.command("gen")
@click.option("--background", default=5000, type=int)
@click.option("--template", "template_name", default="chain25",
              type=click.Choice(sorted(TEMPLATE_PRESETS)))
@click.option("--instances", default=2, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
def synth_gen(background, template_name, instances, seed, out_dir):
    """Generate a labeled corpus and write it to a store directory."""
    template = TEMPLATE_PRESETS[template_name]()
    corpus, labels = gen_corpus(background, [template], instances, seed)
    out = Path(out_dir)
    persist_corpus(corpus, out)
    save_labels(out / "labels.json", labels)
    (out / "genconfig.json").write_text(
        json.dumps(
            {
                "background": background,
                "template": template_name,
                "instances": instances,
                "seed": seed,
            },
            indent=2,
        )
    )
    n_planted = sum(1 for v in labels.values() if v is not None)
    click.echo(
        f"generated {len(corpus.transactions)} transactions "
        f"({n_planted} planted) -> {out_dir}"
    )


@synth.command("eval")
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--k", default=10, type=int)
@click.option("--queries", default=20, type=int)
@click.option("--seeds", default=20, type=int, help="number of trial seeds")
@click.option("--report", "report_path", type=click.Path())
def synth_eval(store_dir, k, queries, seeds, report_path):
    """Run the planted-pattern recall benchmark over multiple seeds."""
    gen_cfg = json.loads((Path(store_dir) / "genconfig.json").read_text())
    template = TEMPLATE_PRESETS[gen_cfg["template"]]()
    report = run_benchmark(
        n_background=gen_cfg["background"],
        template=template,
        n_instances=gen_cfg["instances"],
        k=k,
        n_queries=queries,
        seeds=list(range(seeds)),
    )
    text = json.dumps(report.to_json(), indent=2)
    if report_path:
        Path(report_path).write_text(text + "\n")
    click.echo(text)
    mean_recall = report.recall_at_k.get(k, 0.0)
    click.echo(
        f"mean recall@{k} = {mean_recall:.3f} "
        f"(chance baseline {report.chance_baseline:.4f}, "
        f"control {report.control_recall})"
    )


@cli.group()
def pipeline():
    """Build the embedding and index artifacts over a store."""


@pipeline.command("build")
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True))
def pipeline_build(store_dir):
    """Encode + narrate + fuse + index the corpus in a store directory."""
    corpus = load_store(store_dir)
    store = build_store(corpus, PipelineConfig())
    store.save(store_dir)
    click.echo(
        f"built store over {len(corpus.transactions)} transactions "
        f"in {store.build_seconds:.1f}s -> {store_dir}"
    )


@cli.command()
@click.option("--store", "store_dir", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8400, type=int)
def serve(store_dir, config_path, host, port):
    """Serve the investigation HTTP API over a built store."""
    import uvicorn

    from .service import create_app

    if config_path:
        cfg = json.loads(Path(config_path).read_text())
        store_dir = cfg.get("store_dir", store_dir)
        host = cfg.get("host", host)
        port = cfg.get("port", port)
    if not store_dir:
        click.echo("either --store or --config with store_dir is required", err=True)
        sys.exit(2)
    store = InvestigationStore.load(store_dir)
    store.feedback_path = Path(store_dir) / "feedback.ndjson"
    uvicorn.run(create_app(store), host=host, port=port)


def main():
    cli()


if __name__ == "__main__":
    main()
