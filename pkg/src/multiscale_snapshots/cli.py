"""`mss` command line: build artifacts, run the retrieval benchmark, serve."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .build import BuildError, cmd_build
from .config import load_config


@click.group()
def main():
    """Multiscale dynamic-graph snapshot engine."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file.")
@click.option("--input", "input_path", type=click.Path(), default=None)
@click.option("--out", "output_dir", type=click.Path(), default=None)
@click.option("--bucket-width", type=int, default=None)
@click.option("--method", default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--dims", type=int, default=None)
@click.option("--seed", type=int, default=None)
def build(config_path, input_path, output_dir, bucket_width, method, epochs,
          dims, seed):
    """Build an artifact directory from a timestamped edge list."""
    try:
        cfg = load_config(config_path, overrides={
            "input_path": input_path, "output_dir": output_dir,
            "bucket_width": bucket_width, "method": method,
            "epochs": epochs, "dims": dims, "seed": seed,
        })
        out = cmd_build(cfg)
    except (BuildError, ValueError, OSError) as e:
        click.echo(f"build failed: {e}", err=True)
        sys.exit(1)
    click.echo(f"artifact written to {out}")


@main.command("eval")
@click.option("--out", "out_path", type=click.Path(), default="accuracy.csv")
@click.option("--runs", type=int, default=5)
@click.option("--k", type=int, default=5)
@click.option("--epochs", type=int, default=250)
@click.option("--seed", type=int, default=0)
@click.option("--quiet", is_flag=True)
def eval_cmd(out_path, runs, k, epochs, seed, quiet):
    """Run the synthetic SBM retrieval benchmark and write a CSV table."""
    from .evalbench import (SbmConfig, default_methods, run_accuracy_experiment,
                            synth_dynamic_sbm)

    dg = synth_dynamic_sbm(SbmConfig(seed=seed))
    progress = None if quiet else lambda msg: click.echo(f"  {msg}", err=True)
    table = run_accuracy_experiment(
        dg, default_methods(epochs=epochs), runs=runs, k=k, seed=seed,
        progress=progress)
    Path(out_path).write_text(table.to_csv())
    click.echo(table.to_text())
    click.echo(f"csv written to {out_path}")


@main.command()
@click.option("--artifact", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8040)
def serve(artifact, host, port):
    """Serve a built artifact over HTTP."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(artifact), host=host, port=port)
