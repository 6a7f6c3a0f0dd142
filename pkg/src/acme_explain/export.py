"""Stable JSON serialization of explanation documents.

The same documents are written by the CLI and served over HTTP, so the
encoder is deterministic: insertion-ordered keys and floats rendered
with 17 significant digits (which round-trip exactly).
"""

from __future__ import annotations

import json
import math
from typing import Union

from .engine import (
    ClassificationExplanation,
    FeatureEffect,
    GlobalExplanation,
    LocalExplanation,
)

Explanation = Union[GlobalExplanation, LocalExplanation, ClassificationExplanation]


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite number {x}")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return f"{x:.17g}"


def dumps(obj) -> str:
    """JSON text with deterministic float formatting and key order."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _feature_entry(effect: FeatureEffect) -> dict:
    return {
        "name": effect.name,
        "index": effect.feature_index,
        "quantile_levels": list(effect.quantile_levels),
        "probe_values": list(effect.probe_values),
        "predictions": list(effect.predictions),
        "effects": list(effect.effects),
        "importance": effect.importance,
    }


def global_document(expl: GlobalExplanation) -> dict:
    return {
        "kind": "global",
        "baseline": list(expl.baseline.entries),
        "baseline_prediction": expl.baseline_prediction,
        "ranking": list(expl.ranking),
        "features": [_feature_entry(e) for e in expl.effects],
    }


def local_document(expl: LocalExplanation) -> dict:
    return {
        "kind": "local",
        "row": expl.row,
        "baseline": list(expl.observation),
        "actual_prediction": expl.actual_prediction,
        "observation_quantile": list(expl.observation_quantile),
        "ranking": list(expl.ranking),
        "features": [_feature_entry(e) for e in expl.effects],
    }


def classification_document(expl: ClassificationExplanation) -> dict:
    bodies = []
    for body in expl.per_class:
        if isinstance(body, GlobalExplanation):
            bodies.append(global_document(body))
        else:
            bodies.append(local_document(body))
    doc = {
        "kind": f"classification-{expl.scope}",
        "classes": list(expl.classes),
        "per_class": bodies,
        "stacked_importance": list(expl.stacked_importance),
        "ranking": list(expl.ranking),
    }
    if expl.scope == "local":
        doc["row"] = expl.row
    return doc


def to_document(expl: Explanation) -> dict:
    if isinstance(expl, GlobalExplanation):
        return global_document(expl)
    if isinstance(expl, LocalExplanation):
        return local_document(expl)
    if isinstance(expl, ClassificationExplanation):
        return classification_document(expl)
    raise TypeError(f"not an explanation: {type(expl).__name__}")


def export_explanation_json(expl: Explanation, path: str) -> None:
    text = dumps(to_document(expl)) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
