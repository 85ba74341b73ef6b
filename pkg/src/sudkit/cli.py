"""Command-line entry points for ingestion, classification, masking previews,
experiments and the workbench service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import experiments as experiments_mod
from .backends import create_backend
from .entailment import classify as classify_fn
from .masking import MaskingPolicy, load_embeddings, mask_text
from .templates import (
    CandidateLabelSet,
    builtin_templates,
    resolve_template,
    validate_template,
)


@click.group()
def main():
    """Zero-shot toolkit for socially unacceptable discourse."""


# --- corpus -----------------------------------------------------------------


@main.group("corpus")
def corpus_group():
    """Ingest and inspect corpora."""


@corpus_group.command("ingest")
@click.option("--manifest", "manifest_ref", required=True,
              help="Manifest file path or bundled dataset id.")
@click.option("--in", "source", required=True, type=click.Path(exists=True))
@click.option("--out", "target", required=True, type=click.Path())
@click.option("--malformed-threshold", default=corpus_mod.DEFAULT_MALFORMED_THRESHOLD,
              show_default=True, help="Fail when the malformed-row share exceeds this.")
def corpus_ingest(manifest_ref, source, target, malformed_threshold):
    """Convert a source file to the canonical JSONL record format."""
    manifest = corpus_mod.get_manifest(manifest_ref)
    loaded, report = corpus_mod.load_dataset_with_report(
        source, manifest, malformed_threshold
    )
    corpus_mod.save_jsonl(loaded, target)
    click.echo(
        f"{manifest.dataset_id}: kept {report.rows_kept}/{report.rows_read} rows "
        f"({report.dropped} dropped by label filter, {len(report.issues)} malformed)"
    )
    for issue in report.issues:
        click.echo(f"  row {issue.row}: {issue.reason}", err=True)


@corpus_group.command("stats")
@click.option("--in", "source", required=True, type=click.Path(exists=True))
def corpus_stats(source):
    """Record count, per-label counts and mean text length of a JSONL corpus."""
    loaded = corpus_mod.load_jsonl(source)
    click.echo(json.dumps(corpus_mod.stats(loaded).to_dict(), indent=2))


# --- templates ----------------------------------------------------------------


@main.group("templates")
def templates_group():
    """Hypothesis template utilities."""


@templates_group.command("list")
def templates_list():
    for template in builtin_templates():
        click.echo(f"{template.template_id:14s} {template.pattern}")


@templates_group.command("validate")
@click.option("--pattern", required=True)
def templates_validate(pattern):
    diagnostic = validate_template(pattern)
    if diagnostic is None:
        click.echo("ok")
    else:
        click.echo(diagnostic)
        sys.exit(1)


# --- classify -----------------------------------------------------------------


@main.command("classify")
@click.option("--backend", "backend_id", default="stub", show_default=True)
@click.option("--template", "template_ref", required=True,
              help="Template id or raw {} pattern.")
@click.option("--labels", required=True, help="Comma-separated candidate labels.")
@click.option("--surface", multiple=True,
              help="label=display overrides, e.g. neither=neutral (repeatable).")
@click.option("--text", required=True)
@click.option("--normalization", default="softmax", show_default=True,
              type=click.Choice(["softmax", "independent"]))
@click.option("--cache-dir", default=None, type=click.Path())
def classify_command(backend_id, template_ref, labels, surface, text, normalization,
                     cache_dir):
    """Classify one text and print the distribution as JSON."""
    surfaces = {}
    for entry in surface:
        label, _, display = entry.partition("=")
        if not display:
            raise click.BadParameter(f"expected label=display, got {entry!r}")
        surfaces[label] = display
    label_set = CandidateLabelSet(
        labels=tuple(x.strip() for x in labels.split(",") if x.strip()),
        surface_forms=surfaces,
    )
    template = resolve_template(template_ref)
    backend = create_backend(backend_id, cache_dir=cache_dir)
    distribution = classify_fn(
        backend, text, template, label_set, normalization=normalization
    )
    click.echo(json.dumps(distribution.to_dict(), indent=2))


# --- masking ------------------------------------------------------------------


@main.group("mask")
def mask_group():
    """Token-masking previews."""


@mask_group.command("preview")
@click.option("--embeddings", "embeddings_path", required=True,
              type=click.Path(exists=True))
@click.option("--label", "label_phrase", required=True)
@click.option("--text", required=True)
@click.option("--tau", default=0.4, show_default=True)
@click.option("--mode", default="threshold", show_default=True,
              type=click.Choice(["threshold", "top_k"]))
@click.option("--k", default=0, show_default=True)
@click.option("--max-fraction", default=0.5, show_default=True)
def mask_preview(embeddings_path, label_phrase, text, tau, mode, k, max_fraction):
    """Show the masked text and per-token similarities for one label."""
    table = load_embeddings(embeddings_path)
    policy = MaskingPolicy(mode=mode, tau=tau, k=k, max_fraction=max_fraction)
    result = mask_text(text, label_phrase, table, policy)
    click.echo(result.masked_text)
    for i, (token, sim) in enumerate(zip(result.tokens, result.similarities)):
        shown = "oov" if sim is None else f"{sim:+.4f}"
        marker = " masked" if i in result.masked_positions else ""
        click.echo(f"  [{i:3d}] {shown}  {token}{marker}")


# --- experiments ----------------------------------------------------------------


@main.group("experiment")
def experiment_group():
    """Run and report experiments from declarative spec files."""


@experiment_group.command("run")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
def experiment_run(spec_path):
    spec = experiments_mod.load_spec(spec_path)
    runner = experiments_mod.ExperimentRunner(spec)
    table = runner.run()
    click.echo(table.to_markdown(), nl=False)
    click.echo(f"saved to {runner.out_dir}")
    if runner.failures:
        click.echo(f"{len(runner.failures)} cell(s) failed:", err=True)
        for failure in runner.failures:
            click.echo(
                f"  {failure['row']} / {failure['col']}: {failure['error']}", err=True
            )


@experiment_group.command("report")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="md", show_default=True,
              type=click.Choice(["md", "csv"]))
def experiment_report(spec_path, fmt):
    """Print the stored table for an already-run spec."""
    spec = experiments_mod.load_spec(spec_path)
    out_dir = Path(spec.output_dir) / spec.fingerprint()
    path = out_dir / ("table.md" if fmt == "md" else "table.csv")
    if not path.exists():
        raise click.ClickException(
            f"no stored results at {path}; run `sudkit experiment run` first"
        )
    click.echo(path.read_text(encoding="utf-8"), nl=False)


# --- service --------------------------------------------------------------------


@main.command("serve")
@click.option("--bind", default="127.0.0.1", show_default=True,
              help="Loopback by default: this service has no authentication.")
@click.option("--port", default=8100, show_default=True)
@click.option("--data-dir", default=None, type=click.Path(exists=True),
              help="Directory of canonical <dataset_id>.jsonl files to preload.")
@click.option("--embeddings", "embeddings_path", default=None,
              type=click.Path(exists=True))
@click.option("--static-dir", default=None, type=click.Path(exists=True),
              help="Optional workbench bundle to serve at /ui.")
def serve(bind, port, data_dir, embeddings_path, static_dir):
    """Run the workbench HTTP service."""
    import uvicorn

    from .service import ApiSession, create_app

    datasets = {}
    if data_dir:
        for path in sorted(Path(data_dir).glob("*.jsonl")):
            loaded = corpus_mod.load_jsonl(path)
            datasets[loaded.schema.dataset_id] = loaded
    embeddings = load_embeddings(embeddings_path) if embeddings_path else None
    app = create_app(ApiSession(datasets=datasets, embeddings=embeddings))
    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")
    uvicorn.run(app, host=bind, port=port)


if __name__ == "__main__":
    main()
