"""Command-line front door.

One binary with subcommands; every behavior is a thin shell over the
library, so identical flags and seeds give identical outputs.  Exit
codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import sys
from typing import Optional, Sequence

import click
import numpy as np

from . import evaluation, export, svg
from .engine import (
    ExplainError,
    classification_explain,
    global_explain,
    local_explain,
    what_if,
)
from .external import spawn_external_model
from .models import (
    CLASSIFICATION,
    ModelError,
    Predictor,
    REGRESSION,
    fit_model_for_dataset,
)
from .service import Session, ServiceError, create_app
from .shapley import ShapError, kernel_shap_explain
from .tabular import (
    Dataset,
    Kind,
    LoadError,
    TabularError,
    load_csv,
    quantile_grid,
    DEFAULT_GRID_SIZE,
)


class RuntimeFailure(click.ClickException):
    """Runtime (non-usage) failure; mapped to exit code 2."""


def _load_dataset(path: str, target: Optional[str]) -> Dataset:
    try:
        with open(path, "rb") as fh:
            return load_csv(fh, target_name=target)
    except OSError as exc:
        raise RuntimeFailure(f"cannot read {path}: {exc}") from exc
    except LoadError as exc:
        raise RuntimeFailure(f"malformed CSV {path}: {exc}") from exc


def _build_model(dataset: Dataset, model: str, k: int,
                 command: Optional[str], n_classes: Optional[int]) -> Predictor:
    if model == "external":
        if not command:
            raise click.UsageError("--model external requires --command")
        task = REGRESSION if n_classes is None else CLASSIFICATION
        return spawn_external_model(command, task=task, n_classes=n_classes)
    if model in ("linear", "knn"):
        return fit_model_for_dataset(dataset, model, k=k)
    raise click.UsageError(f"unknown model {model!r} (linear, knn, external)")


def _classes_for(dataset: Dataset, model: Predictor) -> Optional[tuple[str, ...]]:
    if model.task != CLASSIFICATION:
        return None
    if dataset.target is not None and dataset.target.kind is Kind.CATEGORICAL:
        return dataset.target.distinct_levels
    return tuple(str(c) for c in range(model.n_classes or 0))


data_opt = click.option("--data", required=True, help="CSV file with a header row.")
target_opt = click.option("--target", default=None, help="Target column name.")
model_opt = click.option("--model", default="linear", show_default=True,
                         help="linear, knn, or external.")
k_opt = click.option("--k", default=5, show_default=True,
                     help="Neighbour count for the knn model.")
command_opt = click.option("--command", default=None,
                           help="Child command for --model external.")
n_classes_opt = click.option("--n-classes", default=None, type=int,
                             help="Class count for an external classifier.")
q_opt = click.option("--Q", "Q", default=DEFAULT_GRID_SIZE, show_default=True,
                     help="Quantile grid size.")
robust_opt = click.option("--robust", is_flag=True,
                          help="Probe the [0.1, 0.9] quantile range only.")
seed_opt = click.option("--seed", default=0, show_default=True, help="Random seed.")


@click.group()
def main():
    """Fast quantile-perturbation model explanations."""


@main.command("explain-global")
@data_opt
@target_opt
@model_opt
@k_opt
@command_opt
@n_classes_opt
@q_opt
@robust_opt
@click.option("--out", default=None, help="Write the explanation document here.")
@click.option("--svg-out", default=None, help="Write the effect track plot here.")
@click.option("--bar-out", default=None, help="Write the importance bar chart here.")
def cmd_explain_global(data, target, model, k, command, n_classes, Q, robust,
                       out, svg_out, bar_out):
    """Global feature importance around the dataset mean/mode."""
    dataset = _load_dataset(data, target)
    predictor = _build_model(dataset, model, k, command, n_classes)
    grid = quantile_grid(Q, robust)
    if predictor.task == CLASSIFICATION:
        expl = classification_explain(predictor, dataset, grid, scope="global",
                                      class_names=_classes_for(dataset, predictor))
    else:
        expl = global_explain(predictor, dataset, grid)
    _write_outputs(expl, out, svg_out, bar_out)


@main.command("explain-local")
@data_opt
@target_opt
@model_opt
@k_opt
@command_opt
@n_classes_opt
@q_opt
@robust_opt
@click.option("--row", required=True, type=int, help="Observation row (0-based).")
@click.option("--out", default=None)
@click.option("--svg-out", default=None)
@click.option("--bar-out", default=None)
def cmd_explain_local(data, target, model, k, command, n_classes, Q, robust,
                      row, out, svg_out, bar_out):
    """Explain one observation; probes anchor at the observation."""
    dataset = _load_dataset(data, target)
    if not 0 <= row < dataset.n_rows:
        raise click.UsageError(
            f"--row {row} out of range [0, {dataset.n_rows})"
        )
    predictor = _build_model(dataset, model, k, command, n_classes)
    grid = quantile_grid(Q, robust)
    if predictor.task == CLASSIFICATION:
        expl = classification_explain(predictor, dataset, grid, scope="local",
                                      row=row,
                                      class_names=_classes_for(dataset, predictor))
    else:
        expl = local_explain(predictor, dataset, row, grid)
    _write_outputs(expl, out, svg_out, bar_out)


def _write_outputs(expl, out, svg_out, bar_out):
    doc = export.to_document(expl)
    if out:
        _write(out, export.dumps(doc) + "\n")
    else:
        click.echo(export.dumps(doc))
    if svg_out:
        from .engine import ClassificationExplanation

        if isinstance(expl, ClassificationExplanation):
            raise RuntimeFailure(
                "track plots of classification bundles are per class; "
                "use --bar-out for the stacked chart"
            )
        _write(svg_out, svg.effect_plot_svg(expl))
    if bar_out:
        _write(bar_out, svg.importance_bar_svg(expl))


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeFailure(f"cannot write {path}: {exc}") from exc


@main.command("what-if")
@data_opt
@target_opt
@model_opt
@k_opt
@command_opt
@n_classes_opt
@click.option("--row", required=True, type=int)
@click.option("--feature", required=True, help="Feature to change.")
@click.option("--value", required=True, help="Replacement value.")
def cmd_what_if(data, target, model, k, command, n_classes, row, feature, value):
    """Prediction for one observation with a single feature changed."""
    dataset = _load_dataset(data, target)
    if not 0 <= row < dataset.n_rows:
        raise click.UsageError(f"--row {row} out of range [0, {dataset.n_rows})")
    predictor = _build_model(dataset, model, k, command, n_classes)
    j = dataset.feature_index(feature)
    cell = value if dataset.columns[j].kind is Kind.CATEGORICAL else float(value)
    observation = dataset.row(row)
    original = what_if(predictor, observation, j, observation[j])
    modified = what_if(predictor, observation, j, cell)
    if predictor.task == CLASSIFICATION:
        doc = {
            "original": [float(v) for v in original],
            "modified": [float(v) for v in modified],
            "delta": [float(m - o) for o, m in zip(original, modified)],
        }
    else:
        doc = {"original": original, "modified": modified,
               "delta": modified - original}
    click.echo(export.dumps(doc))


@main.command("shap")
@data_opt
@target_opt
@model_opt
@k_opt
@command_opt
@n_classes_opt
@seed_opt
@click.option("--K", "K", default=None, type=int,
              help="Coalition budget (default 2048 + 2p).")
@click.option("--R", "R", default=10, show_default=True,
              help="Background draws per coalition.")
@click.option("--rows", default=None,
              help="Comma-separated row subset (default: all rows).")
@click.option("--out", default=None)
def cmd_shap(data, target, model, k, command, n_classes, seed, K, R, rows, out):
    """Shapley attributions via the weighted-regression estimator."""
    dataset = _load_dataset(data, target)
    predictor = _build_model(dataset, model, k, command, n_classes)
    if predictor.task != REGRESSION:
        raise RuntimeFailure("shap currently explains regression outputs")
    subset = None
    if rows:
        try:
            subset = [int(tok) for tok in rows.split(",")]
        except ValueError:
            raise click.UsageError(f"--rows must be comma-separated integers")
        if any(not 0 <= r < dataset.n_rows for r in subset):
            raise click.UsageError(f"--rows entries out of range [0, {dataset.n_rows})")
    result = kernel_shap_explain(predictor, dataset, rows=subset, K=K, R=R, seed=seed)
    doc = {
        "kind": "shap-global",
        "importance": list(result.importance),
        "ranking": list(result.ranking),
        "per_row": [
            {"row": a.row_index, "phi0": a.phi0, "phi": list(a.phi)}
            for a in result.per_row
        ],
    }
    if out:
        _write(out, export.dumps(doc) + "\n")
    else:
        click.echo(export.dumps(doc))


@main.command("synth")
@click.option("--preset", required=True,
              type=click.Choice(sorted(evaluation.PRESETS)))
@seed_opt
@click.option("--n", default=200, show_default=True, help="Sample count.")
@click.option("--out", required=True, help="CSV destination.")
def cmd_synth(preset, seed, n, out):
    """Generate a ground-truth synthetic dataset as CSV."""
    spec = evaluation.PRESETS[preset](seed=seed, n=n)
    dataset = evaluation.gen_linear_synthetic(spec)
    lines = [",".join([*dataset.feature_names, dataset.target.name])]
    for i in range(dataset.n_rows):
        cells = [repr(v) for v in dataset.row(i)]
        cells.append(repr(dataset.target.values[i]))
        lines.append(",".join(cells))
    _write(out, "\n".join(lines) + "\n")


@main.command("benchmark")
@click.option("--preset", default="experiment1", show_default=True,
              type=click.Choice(sorted(evaluation.PRESETS)))
@seed_opt
@q_opt
@click.option("--K", "K", default=None, type=int)
@click.option("--R", "R", default=10, show_default=True)
@click.option("--repetitions", default=3, show_default=True)
@click.option("--skip-shap", is_flag=True, help="Benchmark only the quantile explainer.")
@click.option("--out", default=None, help="JSONL destination (default stdout).")
def cmd_benchmark(preset, seed, Q, K, R, repetitions, skip_shap, out):
    """Time the quantile explainer against the Shapley estimator."""
    spec = evaluation.PRESETS[preset](seed=seed)
    dataset = evaluation.gen_linear_synthetic(spec)
    predictor = fit_model_for_dataset(dataset, "linear")
    grid = quantile_grid(Q)
    tasks = [
        evaluation.BenchmarkTask(
            explainer="acme", model="linear", dataset=preset,
            n=dataset.n_rows, p=dataset.n_features,
            params={"Q": Q, "seed": seed},
            run=lambda: global_explain(predictor, dataset, grid).ranking,
        )
    ]
    if not skip_shap:
        tasks.append(evaluation.BenchmarkTask(
            explainer="kernel-shap", model="linear", dataset=preset,
            n=dataset.n_rows, p=dataset.n_features,
            params={"K": K, "R": R, "seed": seed},
            run=lambda: kernel_shap_explain(
                predictor, dataset, K=K, R=R, seed=seed
            ).ranking,
        ))
    records = evaluation.benchmark_explainers(
        tasks, repetitions=repetitions, true_scores=spec.true_scores(),
    )
    text = "\n".join(r.to_json() for r in records) + "\n"
    if out:
        _write(out, text)
    else:
        click.echo(text, nl=False)


@main.command("serve")
@data_opt
@target_opt
@model_opt
@k_opt
@command_opt
@n_classes_opt
@q_opt
@robust_opt
@click.option("--name", default="default", show_default=True, help="Session name.")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def cmd_serve(data, target, model, k, command, n_classes, Q, robust, name,
              port, host):
    """Serve explanations and what-if queries over HTTP."""
    dataset = _load_dataset(data, target)
    predictor = _build_model(dataset, model, k, command, n_classes)
    session = Session(
        id=name, name=name, dataset=dataset, model=predictor,
        grid=quantile_grid(Q, robust),
        class_names=_classes_for(dataset, predictor),
    )
    import uvicorn

    app = create_app([session])
    uvicorn.run(app, host=host, port=port, log_level="warning")


def run_cli(argv: Sequence[str]) -> int:
    """Run the CLI programmatically; returns the exit status."""
    try:
        main.main(args=list(argv), standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except RuntimeFailure as exc:
        click.echo(f"error: {exc.message}", err=True)
        return 2
    except (TabularError, ModelError, ExplainError, ShapError, ServiceError,
            evaluation.EvalError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.exceptions.Exit as exc:  # --help
        return int(exc.exit_code)
    except click.Abort:
        return 2
    return 0


def entrypoint() -> None:
    sys.exit(run_cli(sys.argv[1:]))
