import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acme_explain.models import LinearModel, fit_knn, predict_batch
from acme_explain.shapley import (
    INFINITE_WEIGHT,
    ShapError,
    default_budget,
    exact_shapley,
    kernel_shap_explain,
    map_coalition,
    sample_coalitions,
    shap_kernel_weight,
)

from conftest import numeric_dataset


class TestKernelWeight:
    def test_frozen_values_p4(self):
        # (p-1) / (C(p,s) * s * (p-s)) at p=4: s=1 -> 3/(4*1*3)=1/4,
        # s=2 -> 3/(6*2*2)=1/8, s=3 symmetric with s=1
        assert shap_kernel_weight(4, 1) == pytest.approx(1 / 4)
        assert shap_kernel_weight(4, 2) == pytest.approx(1 / 8)
        assert shap_kernel_weight(4, 3) == pytest.approx(1 / 4)

    def test_degenerate_sizes(self):
        assert shap_kernel_weight(5, 0) == INFINITE_WEIGHT
        assert shap_kernel_weight(5, 5) == INFINITE_WEIGHT

    def test_domain(self):
        with pytest.raises(ShapError):
            shap_kernel_weight(1, 0)
        with pytest.raises(ShapError):
            shap_kernel_weight(4, 5)

    @given(st.integers(2, 30), st.integers(1, 29))
    def test_symmetry_and_positivity(self, p, s):
        if s >= p:
            s = p - 1
        w = shap_kernel_weight(p, s)
        assert w > 0
        assert w == pytest.approx(shap_kernel_weight(p, p - s))


class TestSampleCoalitions:
    def test_degenerates_first(self):
        cs = sample_coalitions(5, 10)
        assert cs[0].mask == (0,) * 5 and cs[0].weight == INFINITE_WEIGHT
        assert cs[1].mask == (1,) * 5 and cs[1].weight == INFINITE_WEIGHT

    def test_complete_layers_by_weight(self):
        # p=10, K=22: degenerates + full size-1 and size-9 layers (10 each)
        cs = sample_coalitions(10, 22)
        assert len(cs) == 22
        sizes = [c.size for c in cs[2:]]
        assert sorted(set(sizes)) == [1, 9]
        assert sizes.count(1) == 10 and sizes.count(9) == 10

    def test_partial_layer_without_replacement(self):
        cs = sample_coalitions(8, 2 + 8 + 8 + 5, seed=3)
        partial = [c for c in cs if c.size == 2]
        assert len(partial) == 5
        assert len(set(c.mask for c in partial)) == 5

    def test_small_budget_exact(self):
        cs = sample_coalitions(3, 8)  # full enumeration fits: 2 + 3 + 3
        assert len(cs) == 8
        assert len(set(c.mask for c in cs)) == 8

    def test_determinism(self):
        a = sample_coalitions(12, 300, seed=7)
        b = sample_coalitions(12, 300, seed=7)
        assert a == b

    def test_budget_too_small(self):
        with pytest.raises(ShapError):
            sample_coalitions(4, 1)

    def test_default_budget(self):
        assert default_budget(8) == 2048 + 16


class TestMapCoalition:
    def test_present_from_x_absent_from_background(self):
        x = (1.0, 2.0, 3.0)
        bg = [(-1.0, -2.0, -3.0)]
        out = map_coalition(x, (1, 0, 1), bg)
        assert out == (1.0, -2.0, 3.0)

    def test_empty_background(self):
        with pytest.raises(ShapError):
            map_coalition((1.0,), (1,), [])


def linear_shapley_oracle(coefs, x, background_mean):
    """For an additive model the Shapley value is coef_j * (x_j - mean_j)."""
    return [c * (xi - m) for c, xi, m in zip(coefs, x, background_mean)]


class TestExactShapley:
    def test_linear_closed_form(self, rng):
        X = rng.normal(size=(30, 3))
        ds = numeric_dataset(X)
        coefs = (2.0, -1.0, 0.5)
        model = LinearModel(coefficients=coefs, intercept=3.0)
        phi = exact_shapley(model, ds.row(0), ds)
        expect = linear_shapley_oracle(coefs, X[0], X.mean(axis=0))
        assert phi == pytest.approx(expect, abs=1e-10)

    def test_refuses_large_p(self, rng):
        ds = numeric_dataset(rng.normal(size=(4, 13)))
        model = LinearModel(coefficients=(0.0,) * 13, intercept=0.0)
        with pytest.raises(ShapError):
            exact_shapley(model, ds.row(0), ds)

    def test_axioms_knn(self, rng):
        X = rng.normal(size=(12, 3))
        X[:, 2] = X[:, 0]  # symmetric pair for the model below
        ds = numeric_dataset(X)
        y = rng.normal(size=12)
        model = fit_knn(X, y, k=3)
        phi = exact_shapley(model, ds.row(1), ds)
        fx = float(predict_batch(model, [ds.row(1)])[0])
        v0 = float(predict_batch(model, X).mean())
        assert sum(phi) == pytest.approx(fx - v0, abs=1e-10)


class TestKernelShap:
    def test_full_enumeration_equals_oracle(self, rng):
        # complete coalition coverage + exhaustive background is exact
        for p in (2, 3, 4):
            X = rng.normal(size=(10, p))
            ds = numeric_dataset(X)
            coefs = tuple(rng.normal(size=p).tolist())
            model = LinearModel(coefficients=coefs, intercept=1.0)
            res = kernel_shap_explain(model, ds, rows=[0, 3], K=2 ** p,
                                      exhaustive_background=True)
            for attr in res.per_row:
                oracle = exact_shapley(model, ds.row(attr.row_index), ds)
                assert attr.phi == pytest.approx(oracle, abs=1e-6)

    def test_additivity(self, rng):
        X = rng.normal(size=(15, 4))
        ds = numeric_dataset(X)
        y = rng.normal(size=15)
        model = fit_knn(X, y, k=4)
        res = kernel_shap_explain(model, ds, rows=[2], K=16,
                                  exhaustive_background=True)
        attr = res.per_row[0]
        fx = float(predict_batch(model, [ds.row(2)])[0])
        assert attr.phi0 + sum(attr.phi) == pytest.approx(fx, abs=1e-8)
        assert attr.phi0 == pytest.approx(float(predict_batch(model, X).mean()))

    def test_importance_is_sum_of_abs(self, rng):
        X = rng.normal(size=(10, 3))
        ds = numeric_dataset(X)
        model = LinearModel(coefficients=(1.0, -2.0, 0.0), intercept=0.0)
        res = kernel_shap_explain(model, ds, K=8, exhaustive_background=True)
        for j in range(3):
            assert res.importance[j] == pytest.approx(
                sum(abs(a.phi[j]) for a in res.per_row)
            )
        assert res.ranking == (1, 0, 2)

    def test_dummy_feature_zero(self, rng):
        X = rng.normal(size=(12, 3))
        ds = numeric_dataset(X)
        model = LinearModel(coefficients=(3.0, 0.0, 1.0), intercept=0.0)
        res = kernel_shap_explain(model, ds, rows=[0], K=8,
                                  exhaustive_background=True)
        assert res.per_row[0].phi[1] == pytest.approx(0.0, abs=1e-9)

    def test_determinism_under_sampling(self, rng):
        X = rng.normal(size=(20, 6))
        ds = numeric_dataset(X)
        model = LinearModel(coefficients=tuple(range(1, 7)), intercept=0.0)
        a = kernel_shap_explain(model, ds, rows=[0], K=20, R=3, seed=5)
        b = kernel_shap_explain(model, ds, rows=[0], K=20, R=3, seed=5)
        assert a == b
        c = kernel_shap_explain(model, ds, rows=[0], K=20, R=3, seed=6)
        assert a != c

    def test_bad_parameters(self, rng):
        ds = numeric_dataset(rng.normal(size=(5, 2)))
        model = LinearModel(coefficients=(1.0, 1.0), intercept=0.0)
        with pytest.raises(ShapError):
            kernel_shap_explain(model, ds, K=1)
        with pytest.raises(ShapError):
            kernel_shap_explain(model, ds, R=0)
