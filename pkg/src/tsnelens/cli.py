"""Batch front door: every core operation reachable from the shell with JSON
in and JSON out, so full analyses can be scripted and replayed without the UI.

Exit codes: 0 success, 2 usage errors, 3 unreadable input files, 4 engine
errors (validation/computation), 1 anything unexpected.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .codec import (dataset_from_wire, dataset_to_wire, grid_to_wire,
                    record_to_wire, scores_to_wire, selection_from_wire)
from .dataset import Dataset, ingest_csv
from .errors import TsneLensError
from .interpret import (Polyline, adaptive_axes, default_rho,
                        dimension_correlation, project_to_polyline)
from .quality import (DEFAULT_K, compute_quality_scores,
                      neighborhood_preservation, selection_quality)
from .search import (DEFAULT_REPRESENTATIVES, GridSpec, default_grid,
                     run_grid_search, select_representatives)
from .service import ADDR_ENV, DATA_DIR_ENV
from .tsne import TsneParams, pairwise_distances, run_tsne

EXIT_FILE = 3
EXIT_ENGINE = 4


def handled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_FILE)
        except TsneLensError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_ENGINE)
    return wrapper


def emit(payload, out: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def load_dataset_arg(csv: str | None, dataset: str | None,
                     label_column: str | None = None) -> Dataset:
    if (csv is None) == (dataset is None):
        raise click.UsageError("provide exactly one of --csv or --dataset")
    if csv is not None:
        return ingest_csv(Path(csv).read_bytes(), label_column=label_column)
    return dataset_from_wire(json.loads(Path(dataset).read_text()))


def load_projection_arg(path: str):
    from .codec import record_from_wire
    obj = json.loads(Path(path).read_text())
    return record_from_wire(obj.get("record", obj))


def load_selection_arg(path: str | None):
    if path is None:
        return None
    return selection_from_wire(json.loads(Path(path).read_text()))


def load_polyline_arg(path: str, fallback_rho) -> Polyline:
    obj = json.loads(Path(path).read_text())
    vertices = np.asarray(obj["vertices"] if isinstance(obj, dict) else obj, dtype=float)
    rho = obj.get("rho") if isinstance(obj, dict) else None
    return Polyline(vertices=vertices, rho=float(rho) if rho is not None else fallback_rho())


def parse_float_list(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    return tuple(float(v) for v in text.split(","))


def parse_int_list(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    return tuple(int(v) for v in text.split(","))


@click.group()
def main():
    """Instrumented t-SNE assessment toolkit."""


@main.command()
@click.option("--csv", "csv_path", required=True, type=click.Path())
@click.option("--label-column", default=None)
@click.option("--out", default=None, type=click.Path())
@handled
def ingest(csv_path, label_column, out):
    """Parse a CSV into the dataset wire format."""
    ds = ingest_csv(Path(csv_path).read_bytes(), label_column=label_column)
    emit(dataset_to_wire(ds), out)


@main.command()
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--dataset", default=None, type=click.Path())
@click.option("--label-column", default=None)
@click.option("--perplexity", default=30.0)
@click.option("--learning-rate", default=200.0)
@click.option("--iterations", default=1000)
@click.option("--theta", default=0.0)
@click.option("--seed", default=0)
@click.option("-k", "--quality-k", default=DEFAULT_K)
@click.option("--out", default=None, type=click.Path())
@handled
def run(csv_path, dataset, label_column, perplexity, learning_rate, iterations,
        theta, seed, quality_k, out):
    """Run one instrumented projection and score it."""
    ds = load_dataset_arg(csv_path, dataset, label_column)
    params = TsneParams(perplexity=perplexity, learning_rate=learning_rate,
                        max_iterations=iterations, theta=theta, seed=seed)
    embedding, instr = run_tsne(ds, params)
    scores = compute_quality_scores(ds, embedding, k=quality_k)
    from .search import ProjectionRecord
    record = ProjectionRecord(id=0, params=params, embedding=embedding,
                              instrumentation=instr, scores=scores)
    emit({"record": record_to_wire(record)}, out)


@main.command()
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--dataset", default=None, type=click.Path())
@click.option("--label-column", default=None)
@click.option("--seed", default=0)
@click.option("--parallelism", default=1)
@click.option("--perplexities", default=None, help="comma-separated, e.g. 5,30,50")
@click.option("--learning-rates", default=None)
@click.option("--iterations", default=None)
@click.option("--representatives", default=DEFAULT_REPRESENTATIVES)
@click.option("-k", "--quality-k", default=DEFAULT_K)
@click.option("--out", default=None, type=click.Path())
@handled
def grid(csv_path, dataset, label_column, seed, parallelism, perplexities,
         learning_rates, iterations, representatives, quality_k, out):
    """Grid search, cluster the pool, emit the representatives."""
    ds = load_dataset_arg(csv_path, dataset, label_column)
    base = default_grid(ds.n, seed_base=seed)
    spec = GridSpec(
        perplexities=parse_float_list(perplexities) or base.perplexities,
        learning_rates=parse_float_list(learning_rates) or base.learning_rates,
        iteration_counts=parse_int_list(iterations) or base.iteration_counts,
        seed_base=seed,
    )
    pool = run_grid_search(ds, spec, parallelism=parallelism, k=quality_k)
    reps = select_representatives(pool, k=representatives)
    by_id = {r.id: r for r in pool}
    emit({
        "grid": grid_to_wire(spec),
        "pool_size": len(pool),
        "failed_runs": sum(r.failed for r in pool),
        "pool_scores": [
            {"id": r.id, "scores": scores_to_wire(r.scores) if r.scores else None,
             "error": r.error}
            for r in pool
        ],
        "representative_ids": list(reps.medoid_ids),
        "cluster_assignment": {str(k): v for k, v in sorted(reps.cluster_assignment.items())},
        "representatives": [record_to_wire(by_id[rid]) for rid in reps.medoid_ids],
    }, out)


@main.command()
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--dataset", default=None, type=click.Path())
@click.option("--label-column", default=None)
@click.option("--projection", required=True, type=click.Path())
@click.option("--selection", default=None, type=click.Path())
@click.option("--metric", default=None, help="restrict output to one metric id")
@click.option("-k", "--quality-k", default=DEFAULT_K)
@click.option("--out", default=None, type=click.Path())
@handled
def quality(csv_path, dataset, label_column, projection, selection, metric,
            quality_k, out):
    """Quality scores of a stored projection, optionally selection-scoped."""
    ds = load_dataset_arg(csv_path, dataset, label_column)
    record = load_projection_arg(projection)
    sel = load_selection_arg(selection)
    if sel is None:
        scores = compute_quality_scores(ds, record.embedding, k=quality_k)
        payload = scores_to_wire(scores)
        if metric:
            payload = {metric.lower(): scores.get(metric)}
    else:
        metrics = [metric.lower()] if metric else ["nh", "t", "c", "s", "sdc", "qma"]
        payload = {}
        for m in metrics:
            if m == "nh" and ds.labels is None:
                continue
            payload[m] = selection_quality(ds, record.embedding, sel, m, k=quality_k)
    emit(payload, out)


@main.command(name="np")
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--dataset", default=None, type=click.Path())
@click.option("--label-column", default=None)
@click.option("--projection", required=True, type=click.Path())
@click.option("--selection", default=None, type=click.Path())
@click.option("--k-max", default=None, type=int)
@click.option("--out", default=None, type=click.Path())
@handled
def np_curve(csv_path, dataset, label_column, projection, selection, k_max, out):
    """Neighborhood preservation curve (global, plus selection when given)."""
    from .quality import embedding_distances
    ds = load_dataset_arg(csv_path, dataset, label_column)
    record = load_projection_arg(projection)
    curve = neighborhood_preservation(
        pairwise_distances(ds), embedding_distances(record.embedding),
        selection=load_selection_arg(selection), k_max=k_max)
    emit({
        "k_values": curve.k_values.tolist(),
        "global": curve.global_np.tolist(),
        "selection": curve.selection_np.tolist() if curve.selection_np is not None else None,
    }, out)


@main.command()
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--dataset", default=None, type=click.Path())
@click.option("--label-column", default=None)
@click.option("--projection", required=True, type=click.Path())
@click.option("--polyline", "polyline_path", required=True, type=click.Path())
@click.option("--rho", default=None, type=float)
@click.option("--threshold", default=None, type=float)
@click.option("--out", default=None, type=click.Path())
@handled
def dimcorr(csv_path, dataset, label_column, projection, polyline_path, rho,
            threshold, out):
    """Dimension correlation along a polyline sidecar file."""
    ds = load_dataset_arg(csv_path, dataset, label_column)
    record = load_projection_arg(projection)
    poly = load_polyline_arg(polyline_path,
                             fallback_rho=lambda: rho or default_rho(record.embedding))
    if rho is not None:
        poly = Polyline(vertices=poly.vertices, rho=rho)
    proj = project_to_polyline(record.embedding, poly)
    corr = dimension_correlation(ds, proj, threshold=threshold)
    emit({
        "rho": poly.rho,
        "captured": [int(i) for i in proj.point_indices],
        "dimensions": [
            {"index": i, "name": nm, "rho": c}
            for i, nm, c in zip(corr.dim_indices, corr.dim_names, corr.coefficients)
        ],
    }, out)


@main.command()
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--dataset", default=None, type=click.Path())
@click.option("--label-column", default=None)
@click.option("--selection", required=True, type=click.Path())
@click.option("--out", default=None, type=click.Path())
@handled
def axes(csv_path, dataset, label_column, selection, out):
    """Adaptive parallel-coordinates axes for a selection."""
    ds = load_dataset_arg(csv_path, dataset, label_column)
    sel = load_selection_arg(selection)
    result = adaptive_axes(ds, sel)
    emit({"axes": [{"index": i, "name": nm, "weight": w}
                   for i, nm, w in zip(result.dim_indices, result.dim_names,
                                       result.weights)]}, out)


@main.command()
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--data-dir", default=None, type=click.Path())
@click.option("--static-dir", default=None, type=click.Path())
@handled
def serve(host, port, data_dir, static_dir):
    """Start the HTTP/JSON service."""
    from .service import main as serve_main
    addr = os.environ.get(ADDR_ENV, "127.0.0.1:8000")
    env_host, _, env_port = addr.partition(":")
    serve_main(host=host or env_host or "127.0.0.1",
               port=port if port is not None else int(env_port or 8000),
               data_dir=data_dir or os.environ.get(DATA_DIR_ENV),
               static_dir=static_dir)


if __name__ == "__main__":
    main()
