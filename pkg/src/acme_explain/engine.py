"""Quantile-perturbation explanations: global, local, classification, what-if.

For each feature j a probe sweep is built: the baseline vector repeated
with column j replaced by the feature's empirical quantiles (or, for
categorical features, its observed levels).  Model predictions over the
sweep are turned into standardized effects

    delta = (prediction - baseline_prediction) / sd(sweep) * range(sweep)

with sd the population standard deviation over the sweep, and a
feature's importance is the mean absolute effect.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .models import CLASSIFICATION, Predictor, REGRESSION, predict_batch
from .tabular import (
    BaselineVector,
    Cell,
    Dataset,
    FeatureColumn,
    Kind,
    QuantileGrid,
    TabularError,
    baseline_vector,
)


class ExplainError(ValueError):
    """Raised on task mismatches and invalid explanation requests."""


@dataclass(frozen=True)
class VariableQuantileMatrix:
    """Probe rows for one feature: baseline everywhere except column j."""

    feature_index: int
    probe_values: tuple
    probe_levels: tuple  # quantile levels for numeric, level labels for categorical
    rows: tuple[tuple[Cell, ...], ...]


@dataclass(frozen=True)
class FeatureEffect:
    feature_index: int
    name: str
    quantile_levels: tuple
    probe_values: tuple
    predictions: tuple[float, ...]
    effects: tuple[float, ...]
    importance: float


@dataclass(frozen=True)
class GlobalExplanation:
    baseline: BaselineVector
    baseline_prediction: float
    effects: tuple[FeatureEffect, ...]
    ranking: tuple[int, ...]


@dataclass(frozen=True)
class LocalExplanation:
    row: int
    observation: tuple[Cell, ...]
    actual_prediction: float
    effects: tuple[FeatureEffect, ...]  # predictions raw, effects vs the observation
    observation_quantile: tuple[Optional[float], ...]
    ranking: tuple[int, ...]


@dataclass(frozen=True)
class ClassificationExplanation:
    classes: tuple[str, ...]
    per_class: tuple[Union[GlobalExplanation, LocalExplanation], ...]
    stacked_importance: tuple[float, ...]
    ranking: tuple[int, ...]
    scope: str  # "global" or "local"
    row: Optional[int] = None


def build_variable_quantile_matrix(baseline: BaselineVector, j: int,
                                   grid: QuantileGrid,
                                   column: FeatureColumn) -> VariableQuantileMatrix:
    """Rows equal to the baseline except column j, which sweeps probes."""
    if not 0 <= j < len(baseline.entries):
        raise ExplainError(f"feature index {j} out of range")
    if column.kind is Kind.NUMERIC:
        probes = tuple(
            float(v) for v in np.quantile(column.as_array(), grid.levels, method="linear")
        )
        levels: tuple = grid.levels
    else:
        probes = column.distinct_levels
        levels = column.distinct_levels
    base = list(baseline.entries)
    rows = []
    for v in probes:
        r = list(base)
        r[j] = v
        rows.append(tuple(r))
    return VariableQuantileMatrix(
        feature_index=j, probe_values=probes, probe_levels=levels, rows=tuple(rows)
    )


def standardized_effects(predictions: Sequence[float],
                         baseline_prediction: float) -> np.ndarray:
    """Baseline-relative effects scaled by sweep dispersion and range.

    A zero-variance sweep (the model is flat along the feature) maps to
    all-zero effects.
    """
    y = np.asarray(predictions, dtype=float)
    if y.size < 2:
        raise ExplainError("need at least 2 sweep predictions")
    var = float(y.var())  # population variance over the sweep
    if var == 0.0:
        return np.zeros_like(y)
    return (y - baseline_prediction) / np.sqrt(var) * (y.max() - y.min())


def _rank_by_importance(importances: Sequence[float]) -> tuple[int, ...]:
    # descending importance, ties by ascending feature index
    return tuple(sorted(range(len(importances)), key=lambda j: (-importances[j], j)))


def _sweep_feature(model: Predictor, baseline: BaselineVector, j: int,
                   grid: QuantileGrid, column: FeatureColumn,
                   baseline_prediction: float) -> FeatureEffect:
    vqm = build_variable_quantile_matrix(baseline, j, grid, column)
    preds = predict_batch(model, vqm.rows)
    effects = standardized_effects(preds, baseline_prediction)
    return FeatureEffect(
        feature_index=j,
        name=column.name,
        quantile_levels=vqm.probe_levels,
        probe_values=vqm.probe_values,
        predictions=tuple(float(v) for v in preds),
        effects=tuple(float(v) for v in effects),
        importance=float(np.abs(effects).mean()),
    )


def global_explain(model: Predictor, dataset: Dataset,
                   grid: QuantileGrid) -> GlobalExplanation:
    """Explain a regression model around the dataset mean/mode baseline.

    Exactly one baseline prediction plus one batch per feature are
    issued, so the model-call cost is independent of the dataset size.
    """
    if model.task != REGRESSION:
        raise ExplainError("global_explain expects a regression model")
    base = baseline_vector(dataset, "global_mean_mode")
    base_pred = float(predict_batch(model, [base.entries])[0])
    effects = tuple(
        _sweep_feature(model, base, j, grid, col, base_pred)
        for j, col in enumerate(dataset.columns)
    )
    return GlobalExplanation(
        baseline=base,
        baseline_prediction=base_pred,
        effects=effects,
        ranking=_rank_by_importance([e.importance for e in effects]),
    )


def observation_quantile(column: FeatureColumn, value: Cell) -> Optional[float]:
    """Empirical CDF position with the midpoint convention for ties.

    Undefined (None) for categorical columns.
    """
    if column.kind is not Kind.NUMERIC:
        return None
    arr = column.as_array()
    v = float(value)
    less = int((arr < v).sum())
    leq = int((arr <= v).sum())
    return (less + leq) / (2 * arr.size)


def local_explain(model: Predictor, dataset: Dataset, row: int,
                  grid: QuantileGrid) -> LocalExplanation:
    """Explain one observation; the baseline is the observation itself."""
    if model.task != REGRESSION:
        raise ExplainError("local_explain expects a regression model")
    base = baseline_vector(dataset, "observation", row=row)
    actual = float(predict_batch(model, [base.entries])[0])
    effects = tuple(
        _sweep_feature(model, base, j, grid, col, actual)
        for j, col in enumerate(dataset.columns)
    )
    obs_q = tuple(
        observation_quantile(col, base.entries[j])
        for j, col in enumerate(dataset.columns)
    )
    return LocalExplanation(
        row=row,
        observation=base.entries,
        actual_prediction=actual,
        effects=effects,
        observation_quantile=obs_q,
        ranking=_rank_by_importance([e.importance for e in effects]),
    )


class _ClassSlice(Predictor):
    """Scalar view of one class probability of a classifier."""

    task = REGRESSION

    def __init__(self, model: Predictor, class_index: int):
        self._model = model
        self._class_index = class_index
        self.n_features = model.n_features

    def _predict(self, rows):
        return predict_batch(self._model, rows)[:, self._class_index]


def classification_explain(model: Predictor, dataset: Dataset, grid: QuantileGrid,
                           scope: str = "global", row: Optional[int] = None,
                           class_names: Optional[Sequence[str]] = None
                           ) -> ClassificationExplanation:
    """Run the regression machinery per class probability and stack scores.

    The stacked importance of feature j is the sum over classes of its
    per-class importance; the overall ranking sorts by that sum.
    """
    if model.task != CLASSIFICATION:
        raise ExplainError("classification_explain expects a classification model")
    n_classes = model.n_classes
    if n_classes is None:
        raise ExplainError("classification model does not declare its class count")
    names = tuple(class_names) if class_names is not None else tuple(
        str(c) for c in range(n_classes)
    )
    if len(names) != n_classes:
        raise ExplainError("class_names length does not match the class count")
    per_class = []
    for c in range(n_classes):
        slice_model = _ClassSlice(model, c)
        if scope == "global":
            per_class.append(global_explain(slice_model, dataset, grid))
        elif scope == "local":
            if row is None:
                raise ExplainError("local scope needs a row index")
            per_class.append(local_explain(slice_model, dataset, row, grid))
        else:
            raise ExplainError(f"unknown scope {scope!r}")
    p = dataset.n_features
    stacked = tuple(
        float(sum(expl.effects[j].importance for expl in per_class)) for j in range(p)
    )
    return ClassificationExplanation(
        classes=names,
        per_class=tuple(per_class),
        stacked_importance=stacked,
        ranking=_rank_by_importance(stacked),
        scope=scope,
        row=row,
    )


def what_if(model: Predictor, observation: Sequence[Cell], j: int,
            new_value: Cell) -> Union[float, np.ndarray]:
    """Prediction for the observation with feature j replaced."""
    obs = list(observation)
    if not 0 <= j < len(obs):
        raise ExplainError(f"feature index {j} out of range")
    current = obs[j]
    if isinstance(current, str) != isinstance(new_value, str):
        raise ExplainError(
            f"value {new_value!r} is not kind-compatible with feature {j}"
        )
    obs[j] = new_value if isinstance(new_value, str) else float(new_value)
    out = predict_batch(model, [obs])
    return float(out[0]) if model.task == REGRESSION else out[0]
