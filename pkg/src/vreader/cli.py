"""Command-line entry points.

Subcommands mirror the stages of the experiment: generate a dataset,
extract features, train the complexity estimator, evaluate the observer,
emit the full report bundle, print the summary tables, and serve the
reader-study HTTP API.
"""

import json
import os
import pickle

import click
import numpy as np

from .decision import DecisionConfig, decide_dataset, lesion_feature_scales
from .hotelling import train_hotelling
from .hvs import HvsConfig
from .pipeline import (ExperimentConfig, build_records, run_all,
                       run_detection_table, run_power_table, _matrix)
from .stacks import GenConfig, generate_dataset


def _load_config(path, seed):
    if path:
        return ExperimentConfig.load(path, seed=seed)
    cfg = ExperimentConfig()
    if seed is not None:
        return ExperimentConfig.from_json(cfg.to_json(), seed=seed)
    return cfg


config_option = click.option("--config", "config_path", type=click.Path(exists=True),
                             default=None, help="experiment config JSON")
seed_option = click.option("--seed", type=int, default=None,
                           help="override the master seed")
out_option = click.option("--out", "out_dir", default=None,
                          help="override the output directory")


@click.group()
def main():
    """Virtual reader workbench for synthetic slice stacks."""


@main.command()
@config_option
@seed_option
@out_option
@click.option("--n-per-cell", type=int, default=None)
@click.option("--workers", type=int, default=1)
def generate(config_path, seed, out_dir, n_per_cell, workers):
    """Generate the synthetic stack dataset on disk."""
    cfg = _load_config(config_path, seed)
    if out_dir:
        cfg.out_dir = out_dir
    if n_per_cell:
        cfg.n_per_cell = n_per_cell
    dataset_dir = os.path.join(cfg.out_dir, "dataset")
    manifest = generate_dataset(cfg.gen, cfg.n_per_cell, cfg.levels,
                                dataset_dir, workers=workers)
    click.echo(f"wrote {len(manifest['stacks'])} stacks to {dataset_dir}")


def _records_path(cfg):
    return os.path.join(cfg.out_dir, "features.pkl")


def _get_records(cfg):
    path = _records_path(cfg)
    if os.path.exists(path):
        with open(path, "rb") as f:
            return pickle.load(f)
    return build_records(cfg)


@main.command()
@config_option
@seed_option
@out_option
@click.option("--workers", type=int, default=None)
def features(config_path, seed, out_dir, workers):
    """Extract lesion and complexity features (cached as features.pkl)."""
    cfg = _load_config(config_path, seed)
    if out_dir:
        cfg.out_dir = out_dir
    if workers:
        cfg.workers = workers
    records = build_records(cfg)
    with open(_records_path(cfg), "wb") as f:
        pickle.dump(records, f)
    click.echo(f"extracted features for {len(records)} stacks")


@main.command("train-complexity")
@config_option
@seed_option
@out_option
@click.option("--variant", type=click.Choice(["pre", "post"]), default="post")
@click.option("--model-out", default=None, help="model JSON path")
def train_complexity(config_path, seed, out_dir, variant, model_out):
    """Train the b3 Hotelling complexity estimator and save it as JSON."""
    cfg = _load_config(config_path, seed)
    if out_dir:
        cfg.out_dir = out_dir
    records = _get_records(cfg)
    lo, hi = min(cfg.levels), max(cfg.levels)
    m0 = _matrix([r for r in records if r.level == lo], "b3", variant)
    m1 = _matrix([r for r in records if r.level == hi], "b3", variant)
    model = train_hotelling(m0, m1)
    path = model_out or os.path.join(cfg.out_dir, f"complexity_{variant}.json")
    model.save(path)
    click.echo(f"saved {variant}-stage complexity model to {path}")


@main.command()
@config_option
@seed_option
@out_option
@click.option("--mode", type=click.Choice(["none", "ideal", "pre_hvs", "post_hvs"]),
              default=None, help="override the estimation mode")
def evaluate(config_path, seed, out_dir, mode):
    """Run the detection table (grouped-CI protocol) and print it."""
    cfg = _load_config(config_path, seed)
    if out_dir:
        cfg.out_dir = out_dir
    if mode:
        cfg.decision = DecisionConfig(kappa=cfg.decision.kappa, estimation_mode=mode,
                                      binary_complexity=cfg.decision.binary_complexity)
    records = _get_records(cfg)
    for cell in run_detection_table(records, cfg):
        ci = cell.get("ci_halfwidth")
        ci_txt = f" +/- {ci:.3f}" if ci is not None else ""
        if cell["level"] == "drop":
            click.echo(f"{cell['mode']:>9} drop: dAUC={cell['auc']:.3f} "
                       f"d'drop={cell.get('drop_pct', float('nan')):.1f}%")
        else:
            click.echo(f"{cell['mode']:>9} level {cell['level']}: "
                       f"AUC={cell['auc']:.3f}{ci_txt} d'={cell['dprime']:.2f}")


@main.command()
@config_option
@seed_option
@out_option
@click.option("--workers", type=int, default=None)
def report(config_path, seed, out_dir, workers):
    """Run the full experiment and write report.json plus CSVs."""
    cfg = _load_config(config_path, seed)
    if out_dir:
        cfg.out_dir = out_dir
    if workers:
        cfg.workers = workers
    run_all(cfg)
    click.echo(f"report written to {cfg.out_dir}")


@main.command()
@config_option
@seed_option
@out_option
def tables(config_path, seed, out_dir):
    """Print the feature-power table from cached features."""
    cfg = _load_config(config_path, seed)
    if out_dir:
        cfg.out_dir = out_dir
    records = _get_records(cfg)
    rows, _ = run_power_table(records, cfg.levels)
    for row in rows:
        swap = " (swapped)" if row.get("swapped") else ""
        click.echo(f"{row['feature_set']:>8} [{row['variant']}] {row['task']}: "
                   f"AUC={row['auc']:.3f} d'={row['dprime']:.2f}{swap}")


@main.command()
@config_option
@seed_option
@out_option
@click.option("--data", "data_dir", default=None,
              help="directory holding dataset/ and session logs")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8077)
def serve(config_path, seed, out_dir, data_dir, host, port):
    """Serve the reader-study HTTP API."""
    import uvicorn

    from .service import create_app

    cfg = _load_config(config_path, seed)
    if out_dir or data_dir:
        cfg.out_dir = out_dir or data_dir
    app = create_app(cfg)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
