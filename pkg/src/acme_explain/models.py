"""Black-box prediction contract and the built-in reference models.

A :class:`Predictor` maps a batch of feature rows to either one score
per row (regression) or one probability row per input (classification).
Built-in models consume numeric matrices; datasets with categorical
features are bridged through :class:`TabularEncoder` one-hot encoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .tabular import Cell, Dataset, FeatureColumn, Kind, TabularError

REGRESSION = "regression"
CLASSIFICATION = "classification"

PROB_SUM_TOL = 1e-9


class ModelError(ValueError):
    """Base class for prediction and fitting errors."""


class ShapeError(ModelError):
    """Input batch width does not match the model."""


class SingularityError(ModelError):
    """The least-squares system is rank deficient."""


class Predictor:
    """Deterministic batch-prediction contract.

    Subclasses set ``task`` (and ``n_classes`` for classification) and
    implement ``_predict`` over a validated batch.
    """

    task: str = REGRESSION
    n_classes: Optional[int] = None
    n_features: Optional[int] = None

    def predict(self, rows: Sequence[Sequence[Cell]]) -> np.ndarray:
        if isinstance(rows, np.ndarray) and rows.ndim == 2:
            width: Optional[int] = rows.shape[1]
            empty = rows.shape[0] == 0
        else:
            rows = list(rows)
            empty = not rows
            width = len(rows[0]) if rows else None
            if rows and any(len(r) != width for r in rows):
                raise ShapeError("ragged batch: rows have differing widths")
        if empty:
            if self.task == CLASSIFICATION:
                return np.zeros((0, self.n_classes or 0))
            return np.zeros(0)
        if self.n_features is not None and width != self.n_features:
            raise ShapeError(f"batch width {width} != model width {self.n_features}")
        return self._predict(rows)

    def _predict(self, rows: list[Sequence[Cell]]) -> np.ndarray:
        raise NotImplementedError


def predict_batch(model: Predictor, rows: Sequence[Sequence[Cell]]) -> np.ndarray:
    """Validate and run a batch; enforces the classification contract."""
    out = model.predict(rows)
    if model.task == CLASSIFICATION and out.size:
        sums = out.sum(axis=1)
        if np.any(out < -PROB_SUM_TOL) or np.any(np.abs(sums - 1.0) > PROB_SUM_TOL):
            raise ModelError("classification outputs must be probability rows summing to 1")
    return out


@dataclass(frozen=True)
class LinearModel(Predictor):
    """Exact affine map: intercept + coefficients . x."""

    coefficients: tuple[float, ...] = ()
    intercept: float = 0.0

    task = REGRESSION

    @property
    def n_features(self) -> int:  # type: ignore[override]
        return len(self.coefficients)

    def _predict(self, rows):
        X = np.asarray(rows, dtype=float)
        return X @ np.asarray(self.coefficients) + self.intercept


def fit_linear_regression(X: np.ndarray, y: np.ndarray) -> LinearModel:
    """Least-squares fit via normal equations with an intercept column.

    Rank deficiency (Cholesky pivot below 1e-10 times the largest
    Gram diagonal) raises :class:`SingularityError`.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ShapeError("X must be a 2-D matrix")
    n, p = X.shape
    if y.shape != (n,):
        raise ShapeError(f"y has shape {y.shape}, expected ({n},)")
    if n <= p:
        raise ModelError(f"need more rows ({n}) than features ({p}) to fit")
    A = np.hstack([X, np.ones((n, 1))])
    G = A.T @ A
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise SingularityError("design matrix is rank deficient") from None
    if np.min(np.diag(L)) ** 2 <= 1e-10 * np.max(np.diag(G)):
        raise SingularityError("design matrix is numerically rank deficient")
    coef = np.linalg.solve(G, A.T @ y)
    return LinearModel(coefficients=tuple(coef[:p].tolist()), intercept=float(coef[p]))


@dataclass(frozen=True)
class KNNModel(Predictor):
    """k-nearest-neighbour mean / class-frequency predictor.

    Distance ties break by lower training-row index.
    """

    X: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    k: int = 1
    task: str = REGRESSION
    class_labels: tuple = ()

    @property
    def n_features(self) -> int:  # type: ignore[override]
        return self.X.shape[1]

    @property
    def n_classes(self) -> Optional[int]:  # type: ignore[override]
        return len(self.class_labels) if self.task == CLASSIFICATION else None

    def _predict(self, rows):
        Q = np.asarray(rows, dtype=float)
        d2 = ((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        # stable argsort keeps the lower row index first on exact ties
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        if self.task == REGRESSION:
            return self.y[nearest].mean(axis=1)
        out = np.zeros((len(rows), len(self.class_labels)))
        for c, label in enumerate(self.class_labels):
            out[:, c] = (self.y[nearest] == label).mean(axis=1)
        return out


def fit_knn(X: np.ndarray, y: Sequence, k: int, task: str = REGRESSION) -> KNNModel:
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ModelError(f"k={k} outside [1, {n}]")
    if task == REGRESSION:
        return KNNModel(X=X, y=np.asarray(y, dtype=float), k=k, task=task)
    if task == CLASSIFICATION:
        labels = tuple(dict.fromkeys(y))
        return KNNModel(X=X, y=np.asarray(y, dtype=object), k=k, task=task,
                        class_labels=labels)
    raise ModelError(f"unknown task {task!r}")


@dataclass(frozen=True)
class TabularEncoder:
    """One-hot encoding of a dataset's feature schema.

    Numeric features pass through; categorical features expand to one
    indicator column per level, in first-appearance level order.
    """

    kinds: tuple[Kind, ...]
    levels: tuple[tuple[str, ...], ...]

    @staticmethod
    def for_dataset(dataset: Dataset) -> "TabularEncoder":
        return TabularEncoder(
            kinds=tuple(c.kind for c in dataset.columns),
            levels=tuple(c.distinct_levels for c in dataset.columns),
        )

    @property
    def width(self) -> int:
        return sum(1 if k is Kind.NUMERIC else len(lv)
                   for k, lv in zip(self.kinds, self.levels))

    def encode(self, rows: Sequence[Sequence[Cell]]) -> np.ndarray:
        if all(k is Kind.NUMERIC for k in self.kinds):
            arr = np.asarray(rows, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != len(self.kinds):
                raise ShapeError("batch width does not match the feature schema")
            return arr
        out = np.zeros((len(rows), self.width))
        for i, row in enumerate(rows):
            if len(row) != len(self.kinds):
                raise ShapeError(f"row width {len(row)} != schema width {len(self.kinds)}")
            pos = 0
            for cell, kind, lv in zip(row, self.kinds, self.levels):
                if kind is Kind.NUMERIC:
                    out[i, pos] = float(cell)
                    pos += 1
                else:
                    try:
                        out[i, pos + lv.index(cell)] = 1.0
                    except ValueError:
                        raise ModelError(f"unknown level {cell!r}") from None
                    pos += len(lv)
        return out

    def encode_dataset(self, dataset: Dataset) -> np.ndarray:
        return self.encode(dataset.rows())


@dataclass(frozen=True)
class EncodedPredictor(Predictor):
    """Presents raw tabular rows to a numeric inner model via one-hot."""

    encoder: TabularEncoder = None  # type: ignore[assignment]
    inner: Predictor = None  # type: ignore[assignment]

    @property
    def task(self) -> str:  # type: ignore[override]
        return self.inner.task

    @property
    def n_classes(self) -> Optional[int]:  # type: ignore[override]
        return self.inner.n_classes

    @property
    def n_features(self) -> int:  # type: ignore[override]
        return len(self.encoder.kinds)

    def _predict(self, rows):
        return self.inner.predict(self.encoder.encode(rows))


@dataclass(frozen=True)
class FunctionModel(Predictor):
    """Wrap an arbitrary row->output function (testing convenience)."""

    fn: Callable[[np.ndarray], np.ndarray] = None  # type: ignore[assignment]
    task: str = REGRESSION
    n_classes: Optional[int] = None

    def _predict(self, rows):
        return np.asarray(self.fn(np.asarray(rows, dtype=float)))


def fit_model_for_dataset(dataset: Dataset, name: str, *, k: int = 5) -> Predictor:
    """Fit a built-in model on a dataset's features against its target."""
    if dataset.target is None:
        raise ModelError("dataset has no designated target column")
    encoder = TabularEncoder.for_dataset(dataset)
    X = encoder.encode_dataset(dataset)
    task = REGRESSION if dataset.target.kind is Kind.NUMERIC else CLASSIFICATION
    if name == "linear":
        if task != REGRESSION:
            raise ModelError("the linear model requires a numeric target")
        inner: Predictor = fit_linear_regression(X, dataset.target.as_array())
    elif name == "knn":
        y = dataset.target.as_array() if task == REGRESSION else dataset.target.values
        inner = fit_knn(X, y, k=k, task=task)
    else:
        raise ModelError(f"unknown built-in model {name!r}")
    return EncodedPredictor(encoder=encoder, inner=inner)
