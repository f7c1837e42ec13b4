"""Command-line entry point.

`run`, `replay`, and `metrics` operate locally through the core library so
results are deterministic and replayable offline; `serve` hosts the live
bridge and `command` is a thin client posting operator commands to it.
"""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

import click

from .errors import SwarmsaError
from . import harness


def _setup_logging():
    level = os.environ.get("SWARMSA_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


@click.group()
def main():
    _setup_logging()


def _load_config(path: str, seed: int | None, iterations: int | None):
    from dataclasses import replace
    config = harness.load_run_config(Path(path).read_text())
    if seed is not None:
        config = replace(config, seed_world=seed, seed_drift=seed + 1,
                         seed_pso=seed + 2)
    if iterations is not None:
        config = replace(config, iterations=iterations)
    return config


@main.command(name="run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--iterations", type=int, default=None)
def run_cmd(config_path, out_dir, seed, iterations):
    """Run the closed loop and export all artifacts to OUT."""
    config = _load_config(config_path, seed, iterations)
    log = harness.run(config, collect_images=True)
    harness.export(log, out_dir)
    m = harness.metrics(log)
    click.echo(f"iterations={len(log.records)} correct={m['correct']} "
               f"wrong={m['wrong']} none={m['none']} "
               f"precision={_fmt(m['precision'])} recall={_fmt(m['recall'])}")


@main.command(name="replay")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
def replay_cmd(log_path):
    """Re-run a log's config and verify bit-identical records."""
    log = harness.load_runlog(log_path)
    match, m = harness.replay(log)
    click.echo(f"replay {'OK' if match else 'MISMATCH'} "
               f"precision={_fmt(m['precision'])} recall={_fmt(m['recall'])}")
    if not match:
        sys.exit(5)


@main.command(name="metrics")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
def metrics_cmd(log_path):
    """Print the metric summary of a recorded run."""
    m = harness.metrics(harness.load_runlog(log_path))
    for key in ("correct", "wrong", "none", "precision", "recall",
                "mean_distance", "mean_confidence"):
        click.echo(f"{key}: {_fmt(m[key])}")


@main.command(name="serve")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--listen", default="127.0.0.1:8000", show_default=True)
@click.option("--period", type=float, default=0.25, show_default=True,
              help="seconds per iteration (pacing for live viewing)")
@click.option("--debug-gt", is_flag=True, help="include ground truth in updates")
def serve_cmd(config_path, listen, period, debug_gt):
    """Host the live bridge session for operator consoles."""
    import uvicorn

    from .service import create_app

    config = _load_config(config_path, None, None)
    host, _, port = listen.partition(":")
    app = create_app(config, include_ground_truth=debug_gt, iteration_period=period)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


@main.command(name="command")
@click.option("--addr", default="http://127.0.0.1:8000", show_default=True)
@click.option("--type", "kind", required=True,
              type=click.Choice(["guide", "release", "pause", "resume", "reset"]))
@click.option("--x", type=float, default=None)
@click.option("--y", type=float, default=None)
@click.option("--seed", type=int, default=None)
def command_cmd(addr, kind, x, y, seed):
    """Thin client: post an operator command to a running bridge."""
    import httpx

    body: dict = {"type": kind}
    if kind == "guide":
        if x is None or y is None:
            raise click.UsageError("guide requires --x and --y")
        body.update(x=x, y=y)
    if kind == "reset":
        if seed is None:
            raise click.UsageError("reset requires --seed")
        body["seed"] = seed
    reply = httpx.post(f"{addr}/command", json={"command": body}, timeout=10.0)
    click.echo(reply.text)
    if reply.status_code != 200:
        sys.exit(5)


def _fmt(v):
    if v is None:
        return "undefined"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def entry():
    try:
        main(standalone_mode=False)
    except SwarmsaError as e:
        click.echo(f"error ({type(e).__name__}): {e}", err=True)
        sys.exit(e.exit_code)
    except click.ClickException as e:
        e.show()
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(130)


if __name__ == "__main__":
    entry()
