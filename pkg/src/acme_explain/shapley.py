"""KernelSHAP feature attribution and a brute-force Shapley oracle.

Attributions come from a weighted linear fit over sampled coalitions;
absent features are imputed from background rows.  The degenerate
all-absent / all-present coalitions enter the fit as hard constraints
(the kernel weight is undefined there): the explanation intercept is
the mean background prediction and the attributions sum to the
explained prediction minus that intercept.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .models import Predictor, predict_batch
from .tabular import Cell, Dataset, Kind


class ShapError(ValueError):
    """Raised on invalid coalition parameters or singular fits."""


INFINITE_WEIGHT = math.inf


@dataclass(frozen=True)
class Coalition:
    mask: tuple[int, ...]
    size: int
    weight: float


@dataclass(frozen=True)
class ShapleyAttribution:
    phi: tuple[float, ...]
    phi0: float
    row_index: int


@dataclass(frozen=True)
class GlobalShap:
    per_row: tuple[ShapleyAttribution, ...]
    importance: tuple[float, ...]

    @property
    def ranking(self) -> tuple[int, ...]:
        return tuple(sorted(range(len(self.importance)),
                            key=lambda j: (-self.importance[j], j)))


def shap_kernel_weight(p: int, size: int) -> float:
    """Kernel weight (p-1) / (C(p,size) * size * (p-size)).

    The degenerate sizes 0 and p return an infinite-weight marker; the
    fitter treats those coalitions as equality constraints.
    """
    if p < 2:
        raise ShapError(f"need p >= 2 features, got {p}")
    if not 0 <= size <= p:
        raise ShapError(f"coalition size {size} outside [0, {p}]")
    if size == 0 or size == p:
        return INFINITE_WEIGHT
    return (p - 1) / (math.comb(p, size) * size * (p - size))


def _layer_masks(p: int, size: int) -> list[tuple[int, ...]]:
    masks = []
    for combo in itertools.combinations(range(p), size):
        m = [0] * p
        for j in combo:
            m[j] = 1
        masks.append(tuple(m))
    return masks


def _sample_layer(p: int, size: int, need: int, rng: np.random.Generator
                  ) -> list[tuple[int, ...]]:
    total = math.comb(p, size)
    if total <= 200_000:
        masks = _layer_masks(p, size)
        picked = rng.choice(total, size=need, replace=False)
        return [masks[i] for i in np.sort(picked)]
    chosen: dict[tuple[int, ...], None] = {}
    while len(chosen) < need:
        combo = tuple(sorted(rng.choice(p, size=size, replace=False).tolist()))
        chosen.setdefault(combo, None)
    out = []
    for combo in chosen:
        m = [0] * p
        for j in combo:
            m[j] = 1
        out.append(tuple(m))
    return out


def default_budget(p: int) -> int:
    return 2048 + 2 * p


def sample_coalitions(p: int, K: int, seed=0) -> list[Coalition]:
    """Deterministic coalition selection under a budget of K masks.

    The two degenerate masks always come first.  Remaining budget is
    spent on complete size-layers in order of descending kernel weight;
    the first layer that does not fit is sampled uniformly without
    replacement with the seeded generator.
    """
    if p < 2:
        raise ShapError(f"need p >= 2 features, got {p}")
    if K < 2:
        raise ShapError(f"budget K={K} below the 2 degenerate coalitions")
    rng = np.random.default_rng(seed)
    out = [
        Coalition(tuple([0] * p), 0, INFINITE_WEIGHT),
        Coalition(tuple([1] * p), p, INFINITE_WEIGHT),
    ]
    remaining = K - 2
    sizes = sorted(range(1, p), key=lambda s: (-shap_kernel_weight(p, s), s))
    for s in sizes:
        if remaining <= 0:
            break
        layer = math.comb(p, s)
        w = shap_kernel_weight(p, s)
        if layer <= remaining:
            masks = _layer_masks(p, s)
            remaining -= layer
        else:
            masks = _sample_layer(p, s, remaining, rng)
            remaining = 0
        out.extend(Coalition(m, s, w) for m in masks)
    return out


def _cell_matrix(rows: Sequence[Sequence[Cell]], numeric: bool) -> np.ndarray:
    if numeric:
        return np.asarray(rows, dtype=float)
    return np.asarray([list(r) for r in rows], dtype=object)


def dataset_cell_matrix(dataset: Dataset) -> np.ndarray:
    """Dataset rows as a matrix; float when every feature is numeric."""
    numeric = all(c.kind is Kind.NUMERIC for c in dataset.columns)
    return _cell_matrix(dataset.rows(), numeric)


def map_coalition(x: Sequence[Cell], z: Sequence[int],
                  background: Sequence[Sequence[Cell]], seed=0) -> tuple[Cell, ...]:
    """Impute one coalition: present features from x, absent ones from a
    single background row drawn with the seeded generator."""
    if len(background) == 0:
        raise ShapError("background must be non-empty")
    rng = np.random.default_rng(seed)
    bg = background[int(rng.integers(0, len(background)))]
    return tuple(x[j] if z[j] else bg[j] for j in range(len(z)))


def _solve_attribution(masks: np.ndarray, weights: np.ndarray, values: np.ndarray,
                       v0: float, fx: float) -> np.ndarray:
    """Weighted least squares with the two degenerate constraints
    eliminated by substitution; returns all p attributions."""
    p = masks.shape[1]
    Z = masks.astype(float)
    B = Z[:, : p - 1] - Z[:, [p - 1]]
    t = values - v0 - Z[:, p - 1] * (fx - v0)
    sw = np.sqrt(weights)[:, None]
    Bw = B * sw
    tw = t * np.sqrt(weights)
    G = Bw.T @ Bw
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        sizes = sorted(set(int(s) for s in masks.sum(axis=1)))
        raise ShapError(
            f"singular weighted system for coalition sizes {sizes}"
        ) from None
    if np.min(np.diag(L)) ** 2 <= 1e-10 * max(np.max(np.diag(G)), 1e-300):
        sizes = sorted(set(int(s) for s in masks.sum(axis=1)))
        raise ShapError(f"near-singular weighted system for coalition sizes {sizes}")
    head = np.linalg.solve(G, Bw.T @ tw)
    phi = np.empty(p)
    phi[: p - 1] = head
    phi[p - 1] = (fx - v0) - head.sum()
    return phi


def kernel_shap_explain(model: Predictor, dataset: Dataset,
                        rows: Optional[Sequence[int]] = None,
                        K: Optional[int] = None, R: int = 10, seed=0,
                        exhaustive_background: bool = False) -> GlobalShap:
    """Shapley attributions for the given rows (default: all rows).

    Each coalition's value is the model output averaged over R seeded
    background imputations, or over every background row when
    ``exhaustive_background`` is set.  Global importance is the sum of
    absolute attributions across the explained rows.
    """
    p = dataset.n_features
    if K is None:
        K = default_budget(p)
    if K < 2:
        raise ShapError(f"budget K={K} below the 2 degenerate coalitions")
    if R < 1:
        raise ShapError(f"background draws per coalition must be >= 1, got {R}")
    numeric = all(c.kind is Kind.NUMERIC for c in dataset.columns)
    bg = dataset_cell_matrix(dataset)
    n_bg = bg.shape[0]
    bg_pred = predict_batch(model, bg)
    v0 = float(np.asarray(bg_pred, dtype=float).mean())
    explained = list(rows) if rows is not None else list(range(dataset.n_rows))

    per_row = []
    for i in explained:
        x = dataset.row(i)
        fx = float(predict_batch(model, [x])[0])
        coalitions = sample_coalitions(p, K, seed=np.random.SeedSequence([17, seed, i]))
        active = [c for c in coalitions if 0 < c.size < p]
        if not active:
            raise ShapError("budget leaves no non-degenerate coalitions to fit")
        masks = np.asarray([c.mask for c in active], dtype=np.uint8)
        weights = np.asarray([c.weight for c in active])
        rng = np.random.default_rng(np.random.SeedSequence([29, seed, i]))
        reps = n_bg if exhaustive_background else R
        if exhaustive_background:
            idx = np.tile(np.arange(n_bg), len(active))
        else:
            idx = rng.integers(0, n_bg, size=len(active) * reps)
        sampled = bg[idx]
        mask_rep = np.repeat(masks.astype(bool), reps, axis=0)
        x_arr = _cell_matrix([x], numeric)[0]
        imputed = np.where(mask_rep, x_arr[None, :], sampled)
        preds = np.asarray(predict_batch(model, imputed), dtype=float)
        values = preds.reshape(len(active), reps).mean(axis=1)
        phi = _solve_attribution(masks, weights, values, v0, fx)
        per_row.append(ShapleyAttribution(
            phi=tuple(phi.tolist()), phi0=v0, row_index=i,
        ))
    importance = tuple(
        float(sum(abs(a.phi[j]) for a in per_row)) for j in range(p)
    )
    return GlobalShap(per_row=tuple(per_row), importance=importance)


def exact_shapley(model: Predictor, x: Sequence[Cell], background: Dataset,
                  p_limit: int = 12) -> tuple[float, ...]:
    """Classic Shapley values by full coalition enumeration.

    Coalition values marginalize the absent features over every
    background row (exhaustive, not sampled).
    """
    p = background.n_features
    if p > p_limit:
        raise ShapError(f"refusing exact enumeration for p={p} > limit {p_limit}")
    numeric = all(c.kind is Kind.NUMERIC for c in background.columns)
    bg = dataset_cell_matrix(background)
    x_arr = _cell_matrix([x], numeric)[0]

    values = np.empty(1 << p)
    for S in range(1 << p):
        mask = np.array([(S >> j) & 1 for j in range(p)], dtype=bool)
        rows = np.where(mask[None, :], x_arr[None, :], bg)
        values[S] = float(np.asarray(predict_batch(model, rows), dtype=float).mean())

    fact = [math.factorial(k) for k in range(p + 1)]
    phi = np.zeros(p)
    for S in range(1 << p):
        s = bin(S).count("1")
        if s == p:
            continue
        w = fact[s] * fact[p - s - 1] / fact[p]
        for j in range(p):
            if not (S >> j) & 1:
                phi[j] += w * (values[S | (1 << j)] - values[S])
    return tuple(phi.tolist())
