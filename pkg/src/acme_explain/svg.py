"""Deterministic SVG renderings of explanations.

Two layouts: a per-feature effect track plot (one horizontal line per
feature, one dot per probe colored blue -> red by quantile level, with
a dashed reference line), and an importance bar chart that stacks
per-class segments for classification explanations.
"""

from __future__ import annotations

import html
from typing import Optional, Sequence, Union

from .engine import (
    ClassificationExplanation,
    FeatureEffect,
    GlobalExplanation,
    LocalExplanation,
)

WIDTH = 720
MARGIN_LEFT = 140
MARGIN_RIGHT = 30
TRACK_HEIGHT = 28
MARGIN_TOP = 40
MARGIN_BOTTOM = 30

CLASS_COLORS = ("#4C78A8", "#F58518", "#54A24B", "#E45756", "#72B7B2",
                "#B279A2", "#FF9DA6", "#9D755D")


def _num(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def quantile_color(level: float) -> str:
    """Linear blue (#0000FF at 0) to red (#FF0000 at 1) interpolation."""
    t = min(max(level, 0.0), 1.0)
    r = round(255 * t)
    b = round(255 * (1 - t))
    return f"#{r:02X}00{b:02X}"


def _svg(width: float, height: float, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" '
        f'height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _x_scale(lo: float, hi: float):
    span = hi - lo
    if span == 0.0:
        lo, hi, span = lo - 1.0, hi + 1.0, 2.0
    inner = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    pad = 0.05 * span

    def to_x(v: float) -> float:
        return MARGIN_LEFT + (v - (lo - pad)) / (span + 2 * pad) * inner

    return to_x


def _effect_values(effects: Sequence[FeatureEffect], raw: bool) -> list[float]:
    vals: list[float] = []
    for e in effects:
        vals.extend(e.predictions if raw else e.effects)
    return vals


def effect_plot_svg(expl: Union[GlobalExplanation, LocalExplanation]) -> str:
    """One track per feature, sorted by descending importance.

    Global plots show standardized effects with the dashed line at 0;
    local plots show raw probe predictions with the dashed line at the
    observation's actual prediction.
    """
    raw = isinstance(expl, LocalExplanation)
    reference = expl.actual_prediction if raw else 0.0
    values = _effect_values(expl.effects, raw) + [reference]
    to_x = _x_scale(min(values), max(values))
    height = MARGIN_TOP + TRACK_HEIGHT * len(expl.effects) + MARGIN_BOTTOM
    body = []
    title = "Local probe predictions" if raw else "Global standardized effects"
    body.append(
        f'<text x="{_num(MARGIN_LEFT)}" y="20" font-size="14" '
        f'font-family="sans-serif">{html.escape(title)}</text>'
    )
    ref_x = to_x(reference)
    body.append(
        f'<line class="reference" x1="{_num(ref_x)}" y1="{_num(MARGIN_TOP - 8)}" '
        f'x2="{_num(ref_x)}" y2="{_num(height - MARGIN_BOTTOM + 8)}" '
        f'stroke="black" stroke-dasharray="4 3"/>'
    )
    for row_idx, j in enumerate(expl.ranking):
        e = expl.effects[j]
        cy = MARGIN_TOP + TRACK_HEIGHT * row_idx + TRACK_HEIGHT / 2
        body.append(
            f'<text class="feature-label" x="{_num(MARGIN_LEFT - 8)}" '
            f'y="{_num(cy + 4)}" text-anchor="end" font-size="12" '
            f'font-family="sans-serif">{html.escape(e.name)}</text>'
        )
        body.append(
            f'<line x1="{_num(MARGIN_LEFT)}" y1="{_num(cy)}" '
            f'x2="{_num(WIDTH - MARGIN_RIGHT)}" y2="{_num(cy)}" '
            f'stroke="#DDDDDD"/>'
        )
        n_probe = len(e.predictions)
        for k in range(n_probe):
            level = e.quantile_levels[k]
            t = level if isinstance(level, float) else (
                k / (n_probe - 1) if n_probe > 1 else 0.5
            )
            v = e.predictions[k] if raw else e.effects[k]
            body.append(
                f'<circle cx="{_num(to_x(v))}" cy="{_num(cy)}" r="3.5" '
                f'fill="{quantile_color(t)}"/>'
            )
    return _svg(WIDTH, height, body)


def importance_bar_svg(expl: Union[GlobalExplanation, LocalExplanation,
                                   ClassificationExplanation]) -> str:
    """Importance bars in decreasing order; stacked per class when the
    explanation is a classification bundle."""
    if isinstance(expl, ClassificationExplanation):
        names = [expl.per_class[0].effects[j].name for j in expl.ranking]
        segments = [
            [expl.per_class[c].effects[j].importance
             for c in range(len(expl.classes))]
            for j in expl.ranking
        ]
        legend: Optional[Sequence[str]] = expl.classes
    else:
        names = [expl.effects[j].name for j in expl.ranking]
        segments = [[expl.effects[j].importance] for j in expl.ranking]
        legend = None
    totals = [sum(s) for s in segments]
    max_total = max(totals) if totals else 1.0
    if max_total == 0.0:
        max_total = 1.0
    inner = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    height = MARGIN_TOP + TRACK_HEIGHT * len(names) + MARGIN_BOTTOM
    body = [
        f'<text x="{_num(MARGIN_LEFT)}" y="20" font-size="14" '
        f'font-family="sans-serif">Feature importance</text>'
    ]
    if legend is not None:
        x = MARGIN_LEFT + 180
        for c, cls in enumerate(legend):
            color = CLASS_COLORS[c % len(CLASS_COLORS)]
            body.append(f'<rect x="{_num(x)}" y="10" width="10" height="10" '
                        f'fill="{color}"/>')
            body.append(
                f'<text x="{_num(x + 14)}" y="20" font-size="11" '
                f'font-family="sans-serif">{html.escape(str(cls))}</text>'
            )
            x += 24 + 7 * len(str(cls))
    for row_idx, (name, segs) in enumerate(zip(names, segments)):
        y = MARGIN_TOP + TRACK_HEIGHT * row_idx + 4
        body.append(
            f'<text class="feature-label" x="{_num(MARGIN_LEFT - 8)}" '
            f'y="{_num(y + 12)}" text-anchor="end" font-size="12" '
            f'font-family="sans-serif">{html.escape(name)}</text>'
        )
        x = float(MARGIN_LEFT)
        for c, seg in enumerate(segs):
            w = seg / max_total * inner
            color = CLASS_COLORS[c % len(CLASS_COLORS)] if legend is not None \
                else "#4C78A8"
            body.append(
                f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(w)}" '
                f'height="{_num(TRACK_HEIGHT - 8)}" fill="{color}"/>'
            )
            x += w
    return _svg(WIDTH, height, body)


def emit_effect_plot_svg(expl: Union[GlobalExplanation, LocalExplanation],
                         path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(effect_plot_svg(expl))


def emit_importance_bar_svg(expl, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(importance_bar_svg(expl))
