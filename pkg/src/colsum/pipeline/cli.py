"""Command line front end for the staged pipeline."""

from __future__ import annotations

import dataclasses
from pathlib import Path

import click

from .. import __version__
from ..errors import ColsumError
from .config import PipelineConfig, load_config
from .stages import run_pipeline, run_single_stage

_STAGE_HELP = {
    "ingest": "Load the corpus and persist it as corpus.json.",
    "query": "Rank documents against the configured query.",
    "cluster": "Project embeddings and cluster them by density.",
    "topics": "Fit topic models and extract topic term sets and sentences.",
    "chunk": "Split topic sentences into semantic chunks.",
    "summarize": "Produce chunk, topic and collection summaries.",
    "sentiment": "Score sentences, chunks and summaries with the lexicon.",
    "evaluate": "Score topic summaries against ground-truth references.",
    "export": "Write the dashboard export documents.",
}


def _common_options(fn):
    fn = click.option(
        "--resume/--no-resume",
        "resume",
        default=None,
        help="Reuse persisted artifacts up to the first missing one (run only).",
    )(fn)
    fn = click.option(
        "--out",
        "-o",
        "out_dir",
        type=click.Path(file_okay=False),
        default=None,
        help="Override the configured output directory.",
    )(fn)
    fn = click.option(
        "--config",
        "-c",
        "config_path",
        type=click.Path(exists=False, dir_okay=False),
        default=None,
        help="Pipeline config file (.toml or .json).",
    )(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="colsum")
@_common_options
@click.pass_context
def main(ctx, config_path, out_dir, resume):
    """Summarize a document collection: cluster, chunk, summarize, score."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["out_dir"] = out_dir
    ctx.obj["resume"] = resume


def _resolve(ctx, config_path, out_dir, resume) -> tuple[PipelineConfig, bool]:
    config_path = config_path or ctx.obj.get("config_path")
    out_dir = out_dir or ctx.obj.get("out_dir")
    if resume is None:
        resume = ctx.obj.get("resume")
    if config_path is None:
        raise click.UsageError("--config is required")
    try:
        config = load_config(config_path)
    except ColsumError as exc:
        raise click.ClickException(str(exc)) from exc
    if out_dir is not None:
        config = dataclasses.replace(config, output_dir=str(Path(out_dir).resolve()))
    return config, bool(resume)


@main.command("run")
@_common_options
@click.pass_context
def run_command(ctx, config_path, out_dir, resume):
    """Run every stage and write the manifest."""
    config, resume = _resolve(ctx, config_path, out_dir, resume)
    try:
        manifest = run_pipeline(config, resume=resume, echo=click.echo)
    except ColsumError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(
        f"run complete: {len(manifest.artifacts)} artifacts, "
        f"manifest at {Path(config.output_dir) / 'manifest.json'}"
    )


def _register_stage_command(stage: str) -> None:
    @main.command(stage, help=_STAGE_HELP[stage])
    @_common_options
    @click.pass_context
    def _command(ctx, config_path, out_dir, resume, _stage=stage):
        config, _ = _resolve(ctx, config_path, out_dir, resume)
        try:
            primary = run_single_stage(config, _stage, echo=click.echo)
        except ColsumError as exc:
            raise click.ClickException(str(exc)) from exc
        click.echo(f"{_stage} artifact: {Path(config.output_dir) / primary}")


for _stage in _STAGE_HELP:
    _register_stage_command(_stage)


if __name__ == "__main__":
    main()
