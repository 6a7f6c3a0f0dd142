"""Ground-truth synthetic data, ranking metrics, and explainer benchmarks.

The synthetic generator draws Gaussian feature rows and a linear
response y = X beta + noise, so the relative importance of every
feature is known in advance and produced rankings can be scored with
NDCG and Kendall's tau.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .models import LinearModel, Predictor, fit_linear_regression
from .tabular import Dataset, FeatureColumn


class EvalError(ValueError):
    """Raised on inconsistent metric or generator inputs."""


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the linear ground-truth generator.

    ``sigma`` and ``noise_cov`` may be full covariance matrices or
    diagonal vectors.  The response noise is scalar i.i.d. Gaussian
    whose variance is the mean marginal variance of ``noise_cov``.
    """

    beta: tuple[float, ...]
    mu: tuple[float, ...]
    sigma: tuple  # diagonal vector or full matrix
    n: int
    noise_cov: tuple  # diagonal vector or full matrix; () disables noise
    seed: int = 0

    def __post_init__(self):
        p = len(self.beta)
        if len(self.mu) != p:
            raise EvalError("mu and beta dimensions disagree")
        diag = _cov_diagonal(self.sigma, p)
        if np.any(diag < 0):
            raise EvalError("covariance diagonal must be non-negative")
        if self.noise_cov:
            nd = _cov_diagonal(self.noise_cov, p)
            if np.any(nd < 0):
                raise EvalError("noise covariance diagonal must be non-negative")

    @property
    def p(self) -> int:
        return len(self.beta)

    def true_scores(self) -> tuple[float, ...]:
        """Ground-truth relevance per feature: |beta_j| * sd(x_j)."""
        sd = np.sqrt(_cov_diagonal(self.sigma, self.p))
        return tuple((np.abs(self.beta) * sd).tolist())


def _cov_diagonal(cov, p: int) -> np.ndarray:
    arr = np.asarray(cov, dtype=float)
    if arr.ndim == 1:
        if arr.shape != (p,):
            raise EvalError(f"diagonal covariance has length {arr.shape[0]}, expected {p}")
        return arr
    if arr.shape != (p, p):
        raise EvalError(f"covariance has shape {arr.shape}, expected ({p}, {p})")
    return np.diag(arr).copy()


def _draw_gaussian(rng: np.random.Generator, mu: np.ndarray, cov, n: int) -> np.ndarray:
    arr = np.asarray(cov, dtype=float)
    z = rng.standard_normal((n, mu.size))
    if arr.ndim == 1:
        return mu[None, :] + z * np.sqrt(arr)[None, :]
    L = np.linalg.cholesky(arr)
    return mu[None, :] + z @ L.T

def gen_linear_synthetic(spec: SyntheticSpec) -> Dataset:
    """Generate features x1..xp and target y from a SyntheticSpec."""
    rng = np.random.default_rng(spec.seed)
    mu = np.asarray(spec.mu, dtype=float)
    X = _draw_gaussian(rng, mu, spec.sigma, spec.n)
    y = X @ np.asarray(spec.beta, dtype=float)
    if spec.noise_cov:
        noise_var = float(_cov_diagonal(spec.noise_cov, spec.p).mean())
        y = y + rng.standard_normal(spec.n) * math.sqrt(noise_var)
    columns = tuple(
        FeatureColumn.numeric(f"x{j + 1}", X[:, j]) for j in range(spec.p)
    )
    return Dataset(columns=columns, target=FeatureColumn.numeric("y", y))


EXPERIMENT_BETA = (10.0, 20.0, -10.0, 0.3, 1.0, 0.0, 0.0, -0.5)


def experiment1_spec(seed: int = 3, n: int = 200) -> SyntheticSpec:
    """Equal-scale preset: mu = 10, covariance 10*I, 8 features."""
    return SyntheticSpec(
        beta=EXPERIMENT_BETA,
        mu=(10.0,) * 8,
        sigma=(10.0,) * 8,
        n=n,
        noise_cov=(10.0,) * 8,
        seed=seed,
    )


def experiment2_spec(seed: int = 0, n: int = 200) -> SyntheticSpec:
    """Mixed-scale preset: features 1, 5 and 8 have 10x the variance."""
    scales = (100.0, 10.0, 10.0, 10.0, 100.0, 10.0, 10.0, 100.0)
    return SyntheticSpec(
        beta=EXPERIMENT_BETA,
        mu=scales,
        sigma=scales,
        n=n,
        noise_cov=scales,
        seed=seed,
    )


PRESETS: dict[str, Callable[..., SyntheticSpec]] = {
    "experiment1": experiment1_spec,
    "experiment2": experiment2_spec,
}


def ndcg(true_scores: Sequence[float], ranking: Sequence[int]) -> float:
    """Normalized discounted cumulative gain with linear gain.

    DCG sums rel(ranking[i]) / log2(i + 1) over 1-based positions; the
    ideal ordering sorts by descending relevance with ties broken by
    index.  Defined as 1 when the ideal DCG is zero.
    """
    n = len(true_scores)
    if sorted(ranking) != list(range(n)):
        raise EvalError("ranking must be a permutation of the feature indices")
    if any(r < 0 for r in true_scores):
        raise EvalError("relevance scores must be non-negative")
    discounts = 1.0 / np.log2(np.arange(2, n + 2))
    rel = np.asarray(true_scores, dtype=float)
    dcg = float((rel[np.asarray(ranking)] * discounts).sum())
    ideal = sorted(range(n), key=lambda j: (-true_scores[j], j))
    idcg = float((rel[np.asarray(ideal)] * discounts).sum())
    return 1.0 if idcg == 0.0 else dcg / idcg


def kendall_tau(ranking_a: Sequence[int], ranking_b: Sequence[int]) -> float:
    """Tau-a rank correlation: (concordant - discordant) / C(n, 2)."""
    if sorted(ranking_a) != sorted(ranking_b):
        raise EvalError("rankings must be permutations of the same index set")
    n = len(ranking_a)
    if n < 2:
        raise EvalError("need at least 2 items to correlate")
    pos_a = {item: i for i, item in enumerate(ranking_a)}
    pos_b = {item: i for i, item in enumerate(ranking_b)}
    if len(pos_a) != n:
        raise EvalError("rankings must not repeat items")
    items = list(ranking_a)
    concordant = discordant = 0
    for i in range(n):
        for k in range(i + 1, n):
            da = pos_a[items[i]] - pos_a[items[k]]
            db = pos_b[items[i]] - pos_b[items[k]]
            if da * db > 0:
                concordant += 1
            else:
                discordant += 1
    return (concordant - discordant) / math.comb(n, 2)


def _subset_mse(trainer, X: np.ndarray, y: np.ndarray,
                features: Sequence[int]) -> float:
    sub = X[:, list(features)]
    model = trainer(sub, y)
    fitted = np.asarray(model.predict(sub), dtype=float)
    return float(((y - fitted) ** 2).mean())


def topk_feature_eval(trainer: Callable[[np.ndarray, np.ndarray], Predictor],
                      dataset: Dataset, ranking: Sequence[int], k: int
                      ) -> tuple[float, float, float]:
    """Training-set MSE of models on all features, the top-k of the
    ranking, and the complement."""
    p = dataset.n_features
    if not 1 <= k < p:
        raise EvalError(f"k={k} outside [1, {p})")
    if sorted(ranking) != list(range(p)):
        raise EvalError("ranking must be a permutation of the feature indices")
    if dataset.target is None:
        raise EvalError("dataset has no target column")
    X = np.column_stack([c.as_array() for c in dataset.columns])
    y = dataset.target.as_array()
    topk = list(ranking[:k])
    rest = [j for j in range(p) if j not in topk]
    return (
        _subset_mse(trainer, X, y, list(range(p))),
        _subset_mse(trainer, X, y, topk),
        _subset_mse(trainer, X, y, rest),
    )


@dataclass(frozen=True)
class BenchmarkTask:
    """One benchmark cell: a named explainer run returning a ranking."""

    explainer: str
    model: str
    dataset: str
    n: int
    p: int
    params: dict
    run: Callable[[], Sequence[int]]


@dataclass(frozen=True)
class BenchmarkRecord:
    explainer: str
    model: str
    dataset: str
    n: int
    p: int
    params: dict
    median_seconds: Optional[float]
    ndcg: Optional[float]
    kendall_full: Optional[float]
    error: Optional[str] = None

    def to_json(self) -> str:
        payload = {
            "explainer": self.explainer,
            "model": self.model,
            "dataset": self.dataset,
            "n": self.n,
            "p": self.p,
            "params": self.params,
            "median_seconds": self.median_seconds,
            "ndcg": self.ndcg,
            "kendall_full": self.kendall_full,
        }
        if self.error is not None:
            payload["error"] = self.error
        return json.dumps(payload, sort_keys=False)


def benchmark_explainers(tasks: Sequence[BenchmarkTask], repetitions: int = 3,
                         true_scores: Optional[Sequence[float]] = None,
                         reference_ranking: Optional[Sequence[int]] = None
                         ) -> list[BenchmarkRecord]:
    """Time each task (median of repetitions) and score its ranking.

    A failing cell is recorded with its error message; the run
    continues with the remaining cells.
    """
    records = []
    for task in tasks:
        timings = []
        ranking: Optional[Sequence[int]] = None
        error = None
        try:
            for _ in range(repetitions):
                start = time.perf_counter()
                ranking = list(task.run())
                timings.append(time.perf_counter() - start)
        except Exception as exc:  # noqa: BLE001 - per-cell isolation
            error = f"{type(exc).__name__}: {exc}"
        if error is not None:
            records.append(BenchmarkRecord(
                task.explainer, task.model, task.dataset, task.n, task.p,
                task.params, None, None, None, error,
            ))
            continue
        score_ndcg = None
        score_tau = None
        if true_scores is not None and ranking is not None:
            score_ndcg = ndcg(true_scores, ranking)
        if reference_ranking is not None and ranking is not None:
            score_tau = kendall_tau(list(reference_ranking), ranking)
        records.append(BenchmarkRecord(
            task.explainer, task.model, task.dataset, task.n, task.p,
            task.params, float(np.median(timings)), score_ndcg, score_tau,
        ))
    return records


def fit_linear_trainer(X: np.ndarray, y: np.ndarray) -> LinearModel:
    """Default trainer for the top-k protocol."""
    return fit_linear_regression(X, y)
