"""Command-line interface: a thin layer over the runner, scorer and service."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from actalarm.report import MetricsReport, aggregate
from actalarm.runner import DATA_ROOT_ENV, RunConfig
from actalarm.runner import run as run_pipeline
from actalarm.runner import score as score_bundle


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable info-level logging.")
def main(verbose):
    """Activation-based anomaly detection: experiments, scoring, serving."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command("run")
@click.option("-c", "--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON run configuration.")
@click.option("-o", "--out-dir", default=None, help="Override the output directory.")
@click.option("--seeds", default=None,
              help="Override seeds, comma-separated (e.g. 1,2,3,4).")
@click.option("--full-data", is_flag=True,
              help="Disable the desk-scale training subsample cap.")
def run_command(config_path, out_dir, seeds, full_data):
    """Execute configured scenarios end to end and write reports."""
    doc = json.loads(Path(config_path).read_text())
    if out_dir is not None:
        doc["out_dir"] = out_dir
    if seeds is not None:
        doc["seeds"] = [int(s) for s in seeds.split(",")]
    if full_data:
        doc["full_data"] = True
    config = RunConfig(**doc)
    result = run_pipeline(config)
    for (sid, method), report in sorted(result.aggregates.items()):
        summary = report.summary()
        click.echo(f"{sid} {method}: AP {summary['ap']}  AUC {summary['auc']}")
    for sid, error in result.failures.items():
        click.echo(f"scenario {sid} FAILED:\n{error}", err=True)
    sys.exit(0 if result.ok else 1)


@main.command("score")
@click.option("-b", "--bundle", "bundle_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Detector bundle.")
@click.option("-i", "--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="IDX image file or CSV matching the bundle's schema.")
@click.option("-o", "--output", "output_path", default=None,
              help="Write one score per line here (default: stdout).")
def score_command(bundle_path, input_path, output_path):
    """Score new raw data with a trained detector bundle."""
    try:
        scores, warnings = score_bundle(bundle_path, input_path, output_path)
    except (ValueError, KeyError) as exc:
        raise click.ClickException(str(exc))
    for message in warnings:
        click.echo(f"warning: {message}", err=True)
    if output_path is None:
        for s in scores:
            click.echo(f"{s:.12g}")
    else:
        click.echo(f"wrote {len(scores)} scores to {output_path}")


@main.command("aggregate")
@click.argument("reports", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", "output_path", default=None,
              help="Write the merged report here (default: stdout).")
def aggregate_command(reports, output_path):
    """Merge per-seed reports of one scenario/method into a multi-seed report."""
    try:
        merged = aggregate([MetricsReport.load(p) for p in reports])
    except ValueError as exc:
        raise click.ClickException(str(exc))
    if output_path is None:
        click.echo(merged.to_json(), nl=False)
    else:
        merged.save(output_path)
        summary = merged.summary()
        click.echo(f"{merged.scenario_id} {merged.method}: "
                   f"AP {summary['ap']}  AUC {summary['auc']} -> {output_path}")


@main.command("demo-data")
@click.option("-o", "--out-dir", required=True, help="Directory for the demo corpora.")
@click.option("--train-size", default=24000, show_default=True,
              help="Digit training images.")
@click.option("--test-size", default=4000, show_default=True, help="Digit test images.")
@click.option("--flows", default=25000, show_default=True,
              help="Training rows of the network-flow corpus.")
@click.option("--seed", default=0, show_default=True)
def demo_data_command(out_dir, train_size, test_size, flows, seed):
    """Generate the synthetic demo datasets (IDX digits/letters, flow CSVs).

    Written in the same file formats as the real corpora, under the
    conventional file names, so a run config only needs data_root (or
    $%s) pointed here.
    """ % DATA_ROOT_ENV
    from actalarm.data.synthetic import (
        write_creditcard_corpus,
        write_digit_corpus,
        write_letter_corpus,
        write_netflow_corpus,
    )
    out = Path(out_dir)
    write_digit_corpus(out, n_train=train_size, n_test=test_size, seed=seed)
    click.echo(f"digits: {train_size} train / {test_size} test IDX rows")
    write_letter_corpus(out, n_train=max(2000, train_size // 3),
                        n_test=max(500, test_size // 3), seed=seed)
    click.echo("letters: IDX files written")
    write_netflow_corpus(out, n_train=flows, n_test=max(1000, flows // 5), seed=seed)
    click.echo(f"flows: {flows} train rows (KDDTrain+.txt / KDDTest+.txt)")
    write_creditcard_corpus(out, n=max(5000, flows // 2), seed=seed)
    click.echo("transactions: creditcard.csv written")
    click.echo(f"demo data root: {out}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--bundle-dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Preload every *.bundle under this directory.")
def serve_command(host, port, bundle_dir):
    """Serve bundle scoring and run submission over HTTP."""
    import uvicorn

    from actalarm.service import create_app

    uvicorn.run(create_app(bundle_dir), host=host, port=port)


if __name__ == "__main__":
    main()
