"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 missing upstream
artifact, 4 runtime failure.
"""

from __future__ import annotations

import functools
import json
import secrets
import sys
from pathlib import Path

import click

from . import __version__
from . import analyze as analyze_mod
from . import demo as demo_mod
from ._kernels import backend_name
from .annosvc.budget import PRESET_RATES, budget_plan, preset_plan
from .config import config_hash, parse_config
from .errors import ArgumentError, MissingArtifactError, PairmineError
from .pipeline import STAGE_ORDER, run_stage


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ArgumentError as exc:
            _fail(str(exc), 2)
        except MissingArtifactError as exc:
            _fail(str(exc), 3)
        except PairmineError as exc:
            _fail(str(exc), 4)

    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name="pairmine")
def cli():
    """Mine, tune, annotate, and analyze premise-hypothesis pair datasets."""


@cli.command()
def info():
    """Show version and which distance kernel backend is active."""
    click.echo(f"pairmine {__version__}")
    click.echo(f"kernel backend: {backend_name()}")


@cli.command()
@click.argument("stage", type=click.Choice(STAGE_ORDER + ("all",)))
@click.option("--config", "config_path", required=True, type=click.Path(), help="Pipeline config TOML.")
@click.option("--force", is_flag=True, help="Re-run even if the stage output is current.")
@_guarded
def run(stage: str, config_path: str, force: bool):
    """Run one pipeline stage, or `all` (stops before serve)."""
    cfg = parse_config(config_path)
    results = run_stage(cfg, stage, force=force)
    for res in results:
        status = "cached" if res.cached else "done"
        line = f"[{status}] {res.stage}"
        if res.detail:
            line += f": {res.detail}"
        click.echo(line)
        for artifact in res.artifacts:
            click.echo(f"  {artifact}")
    click.echo(f"config hash {config_hash(cfg)}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=0, type=int, help="Override the config's port.")
@click.option("--admin-token", default="", help="Admin bearer token (generated if omitted).")
@click.option("--log", "log_path", default="", help="Event log path (default: out dir).")
@click.option("--ui", "ui_dir", default="", help="Static directory for the labeling UI.")
@_guarded
def serve(config_path: str, host: str, port: int, admin_token: str, log_path: str, ui_dir: str):
    """Start the annotation service (runs until interrupted)."""
    import uvicorn

    from .annosvc.api import create_app
    from .annosvc.service import AnnotationService

    cfg = parse_config(config_path)
    resolved_port = port or cfg.service.port
    token = admin_token or cfg.service.admin_token or secrets.token_hex(16)
    log_file = log_path or str(Path(cfg.output_dir) / "annosvc-log.jsonl")
    Path(log_file).parent.mkdir(parents=True, exist_ok=True)
    static_dir = ui_dir or cfg.service.ui_dir or None
    service = AnnotationService(
        log_path=log_file, lease_seconds=cfg.service.lease_seconds
    )
    app = create_app(service, admin_token=token, static_dir=static_dir)
    click.echo(f"annotation service on http://{host}:{resolved_port}")
    click.echo(f"event log: {log_file}")
    click.echo(f"admin token: {token}")
    uvicorn.run(app, host=host, port=resolved_port, log_level="warning")


@cli.group()
def analyze():
    """Diagnostics over an exported labeled dataset."""


def _load_examples_cli(input_path: str, split: str):
    examples = analyze_mod.load_examples(input_path, split=split or None)
    if not examples:
        raise ArgumentError(f"no labeled examples in {input_path}" + (f" (split={split})" if split else ""))
    return examples


@analyze.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--split", default="", help="Restrict to one split (train/test).")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of text.")
@_guarded
def stats(input_path: str, split: str, as_json: bool):
    """Label balance, hypothesis length, and overlap statistics."""
    result = analyze_mod.dataset_stats(_load_examples_cli(input_path, split))
    if as_json:
        click.echo(json.dumps(result.as_dict(), indent=2, sort_keys=True))
    else:
        click.echo(analyze_mod.render_stats_text(result))


@analyze.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--split", default="")
@click.option("--smoothing-k", default=analyze_mod.DEFAULT_SMOOTHING_K, show_default=True)
@click.option("--top", default=3, show_default=True, help="Words per label.")
@click.option("--json", "as_json", is_flag=True)
@_guarded
def pmi(input_path: str, split: str, smoothing_k: float, top: int, as_json: bool):
    """Rank label-associated hypothesis words by PMI."""
    ranking = analyze_mod.pmi(_load_examples_cli(input_path, split), smoothing_k=smoothing_k)
    table = analyze_mod.top_k_report(ranking, k=top)
    if as_json:
        click.echo(json.dumps(table.as_json(), indent=2, sort_keys=True))
    else:
        click.echo(table.as_text())


@analyze.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--split", default="")
@click.option("--smoothing-k", default=analyze_mod.DEFAULT_SMOOTHING_K, show_default=True)
@click.option("--top", default=3, show_default=True)
@_guarded
def report(input_path: str, split: str, smoothing_k: float, top: int):
    """Combined statistics plus PMI report."""
    examples = _load_examples_cli(input_path, split)
    result = analyze_mod.dataset_stats(examples)
    ranking = analyze_mod.pmi(examples, smoothing_k=smoothing_k)
    table = analyze_mod.top_k_report(ranking, k=top)
    click.echo(analyze_mod.render_stats_text(result))
    click.echo("")
    click.echo(table.as_text())


@cli.command()
@click.option("--total", required=True, type=float, help="Total budget.")
@click.option("--preset", default="", help=f"Named rate: {', '.join(sorted(PRESET_RATES))}.")
@click.option("--unit-cost", default=0.0, type=float, help="Explicit per-unit cost.")
@click.option("--units", default=1, show_default=True, help="Units per example.")
@_guarded
def budget(total: float, preset: str, unit_cost: float, units: int):
    """How many examples a budget buys."""
    if bool(preset) == (unit_cost > 0):
        raise ArgumentError("give exactly one of --preset or --unit-cost")
    plan = (
        preset_plan(total, preset, units)
        if preset
        else budget_plan(total, unit_cost, units)
    )
    click.echo(
        f"{plan.max_examples} examples "
        f"(total {plan.total_budget}, {plan.unit_cost} x {plan.units_per_example} per example)"
    )


@cli.command()
@click.argument("out_dir", type=click.Path())
@click.option("--seed", default=7, show_default=True)
@click.option("--docs", default=556, show_default=True, help="Documents to generate.")
@_guarded
def demo(out_dir: str, seed: int, docs: int):
    """Generate the bundled demo fixture (corpus, vectors, configs)."""
    manifest = demo_mod.generate(out_dir, seed=seed, n_docs=docs)
    click.echo(json.dumps(manifest, indent=2, sort_keys=True))


def main():
    cli(prog_name="pairmine")


if __name__ == "__main__":
    main()
