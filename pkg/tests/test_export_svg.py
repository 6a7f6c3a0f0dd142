import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, strategies as st

from acme_explain.engine import (
    classification_explain,
    global_explain,
    local_explain,
)
from acme_explain.export import (
    dumps,
    export_explanation_json,
    to_document,
)
from acme_explain.models import CLASSIFICATION, LinearModel, fit_knn
from acme_explain.svg import (
    effect_plot_svg,
    emit_effect_plot_svg,
    importance_bar_svg,
    quantile_color,
)
from acme_explain.tabular import quantile_grid

from conftest import numeric_dataset


@pytest.fixture
def regression_pair(rng):
    X = rng.normal(size=(40, 3))
    ds = numeric_dataset(X, names=["alpha", "beta", "gamma"])
    model = LinearModel(coefficients=(2.0, -1.0, 0.0), intercept=0.5)
    return model, ds


@pytest.fixture
def classification_pair(rng):
    X = rng.normal(size=(40, 2))
    y = (X[:, 0] > 0).astype(int)
    return fit_knn(X, y, k=5, task=CLASSIFICATION), numeric_dataset(X)


class TestDumps:
    def test_scalar_formatting(self):
        assert dumps(3) == "3"
        assert dumps(3.0) == "3.0"
        assert dumps(True) == "true"
        assert dumps(None) == "null"
        assert dumps(0.1) == "0.10000000000000001"

    def test_float_round_trip(self):
        for v in (1 / 3, 1e-17, -2.5e300, 123456.789):
            assert json.loads(dumps(v)) == v

    def test_key_order_is_insertion_order(self):
        assert dumps({"b": 1, "a": 2}) == '{"b": 1, "a": 2}'

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            dumps(float("nan"))

    def test_rejects_unknown_type(self):
        with pytest.raises(TypeError):
            dumps(object())

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_every_finite_float_round_trips(self, v):
        assert json.loads(dumps(v)) == v


class TestDocuments:
    def test_global_schema(self, regression_pair):
        model, ds = regression_pair
        doc = to_document(global_explain(model, ds, quantile_grid(7)))
        assert list(doc) == ["kind", "baseline", "baseline_prediction",
                             "ranking", "features"]
        assert doc["kind"] == "global"
        assert len(doc["features"]) == 3
        f = doc["features"][0]
        assert list(f) == ["name", "index", "quantile_levels", "probe_values",
                           "predictions", "effects", "importance"]
        assert f["name"] == "alpha"
        assert len(f["effects"]) == 7

    def test_local_schema(self, regression_pair):
        model, ds = regression_pair
        doc = to_document(local_explain(model, ds, 4, quantile_grid(7)))
        assert doc["kind"] == "local"
        assert doc["row"] == 4
        assert "actual_prediction" in doc
        assert len(doc["observation_quantile"]) == 3

    def test_classification_schema(self, classification_pair):
        model, ds = classification_pair
        doc = to_document(classification_explain(model, ds, quantile_grid(7)))
        assert doc["kind"] == "classification-global"
        assert doc["classes"] == ["0", "1"]
        assert len(doc["per_class"]) == 2
        assert len(doc["stacked_importance"]) == 2

    def test_export_determinism(self, regression_pair, tmp_path):
        model, ds = regression_pair
        expl = global_explain(model, ds, quantile_grid(7))
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        export_explanation_json(expl, str(a))
        export_explanation_json(expl, str(b))
        assert a.read_bytes() == b.read_bytes()
        json.loads(a.read_text())  # stays valid JSON

    def test_document_round_trip_values(self, regression_pair):
        model, ds = regression_pair
        expl = global_explain(model, ds, quantile_grid(5))
        doc = json.loads(dumps(to_document(expl)))
        for j, e in enumerate(expl.effects):
            assert doc["features"][j]["importance"] == e.importance
            assert doc["features"][j]["effects"] == list(e.effects)


class TestQuantileColor:
    def test_endpoints_and_midpoint(self):
        assert quantile_color(0.0) == "#0000FF"
        assert quantile_color(1.0) == "#FF0000"
        assert quantile_color(0.5) == "#800080"

    def test_clamps(self):
        assert quantile_color(-1.0) == "#0000FF"
        assert quantile_color(2.0) == "#FF0000"


class TestSvg:
    def test_effect_plot_structure(self, regression_pair):
        model, ds = regression_pair
        expl = global_explain(model, ds, quantile_grid(5))
        svg = effect_plot_svg(expl)
        root = ET.fromstring(svg)  # well-formed XML
        ns = "{http://www.w3.org/2000/svg}"
        circles = root.findall(f"{ns}circle")
        assert len(circles) == 3 * 5
        labels = [t.text for t in root.findall(f"{ns}text")
                  if t.get("class") == "feature-label"]
        # tracks appear in ranking order: alpha (|2|) before beta (|-1|)
        assert labels == [expl.effects[j].name for j in expl.ranking]
        dashed = [l for l in root.findall(f"{ns}line")
                  if l.get("stroke-dasharray")]
        assert len(dashed) == 1

    def test_local_plot_reference_at_actual_prediction(self, regression_pair):
        model, ds = regression_pair
        expl = local_explain(model, ds, 0, quantile_grid(5))
        svg = effect_plot_svg(expl)
        assert "Local probe predictions" in svg

    def test_colors_sweep_blue_to_red(self, regression_pair):
        model, ds = regression_pair
        expl = global_explain(model, ds, quantile_grid(3))
        svg = effect_plot_svg(expl)
        assert 'fill="#0000FF"' in svg
        assert 'fill="#FF0000"' in svg

    def test_importance_bar_regression(self, regression_pair):
        model, ds = regression_pair
        expl = global_explain(model, ds, quantile_grid(5))
        root = ET.fromstring(importance_bar_svg(expl))
        ns = "{http://www.w3.org/2000/svg}"
        bars = root.findall(f"{ns}rect")
        assert len(bars) == 3
        widths = [float(b.get("width")) for b in bars]
        assert widths == sorted(widths, reverse=True)
        # the dummy feature gets a zero-width bar
        assert widths[-1] == 0.0

    def test_importance_bar_stacked(self, classification_pair):
        model, ds = classification_pair
        expl = classification_explain(model, ds, quantile_grid(5))
        root = ET.fromstring(importance_bar_svg(expl))
        ns = "{http://www.w3.org/2000/svg}"
        # 2 features x 2 class segments + 2 legend swatches
        assert len(root.findall(f"{ns}rect")) == 6

    def test_byte_determinism(self, regression_pair, tmp_path):
        model, ds = regression_pair
        expl = global_explain(model, ds, quantile_grid(9))
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_effect_plot_svg(expl, str(a))
        emit_effect_plot_svg(expl, str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_name_escaping(self, rng):
        ds = numeric_dataset(rng.normal(size=(10, 2)), names=["a<b", "c&d"])
        model = LinearModel(coefficients=(1.0, 1.0), intercept=0.0)
        svg = effect_plot_svg(global_explain(model, ds, quantile_grid(3)))
        assert "a&lt;b" in svg and "c&amp;d" in svg
        ET.fromstring(svg)
