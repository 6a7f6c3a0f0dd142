/**
 * Deterministic SVG rendering of a local explanation document.
 *
 * One horizontal track per feature in the served ranking order, one dot
 * per probe at its raw prediction colored blue -> red by quantile
 * level, an enlarged bubble at the observation's own quantile position,
 * and a dashed vertical line at the actual prediction. Classification
 * documents render one tab per class; the chart body shows the
 * selected class slice.
 */

import { FeatureEntry, LocalDocument, LocalExplanation } from "./api.js";

export const WIDTH = 720;
export const MARGIN_LEFT = 140;
export const MARGIN_RIGHT = 30;
export const TRACK_HEIGHT = 28;
export const MARGIN_TOP = 40;
export const MARGIN_BOTTOM = 30;

export class ChartError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ChartError";
  }
}

export function quantileColor(level: number): string {
  const t = Math.min(Math.max(level, 0), 1);
  const hex = (v: number) =>
    Math.round(v).toString(16).toUpperCase().padStart(2, "0");
  return `#${hex(255 * t)}00${hex(255 * (1 - t))}`;
}

function fmt(x: number): string {
  return Number(x.toFixed(3)).toString();
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

function validateBody(doc: LocalDocument): void {
  if (doc.kind !== "local") throw new ChartError("not a local document");
  if (!Array.isArray(doc.features) || doc.features.length === 0) {
    throw new ChartError("document has no features");
  }
  if (
    !Array.isArray(doc.ranking) ||
    doc.ranking.length !== doc.features.length ||
    doc.ranking.some((j) => !doc.features[j])
  ) {
    throw new ChartError("ranking does not index the feature list");
  }
  if (typeof doc.actual_prediction !== "number") {
    throw new ChartError("missing actual prediction");
  }
  for (const f of doc.features) {
    if (!Array.isArray(f.predictions) || f.predictions.length === 0) {
      throw new ChartError(`feature ${JSON.stringify(f.name)} has no probes`);
    }
    if (f.predictions.some((v) => typeof v !== "number" || !Number.isFinite(v))) {
      throw new ChartError(
        `feature ${JSON.stringify(f.name)} has non-numeric predictions`,
      );
    }
  }
}

function xScale(lo: number, hi: number): (v: number) => number {
  let span = hi - lo;
  if (span === 0) {
    lo -= 1;
    span = 2;
  }
  const pad = 0.05 * span;
  const inner = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
  return (v) => MARGIN_LEFT + ((v - (lo - pad)) / (span + 2 * pad)) * inner;
}

function probeLevel(feature: FeatureEntry, k: number): number {
  const level = feature.quantile_levels[k];
  if (typeof level === "number") return level;
  // categorical probes have no quantile level; spread them evenly
  const n = feature.predictions.length;
  return n > 1 ? k / (n - 1) : 0.5;
}

export interface RenderOptions {
  /** Class tab to render for classification documents (default 0). */
  classIndex?: number;
}

interface TrackDot {
  x: number;
  y: number;
  r: number;
  color: string;
}

function renderBody(doc: LocalDocument): string[] {
  const values = doc.features.flatMap((f) => f.predictions);
  values.push(doc.actual_prediction);
  const toX = xScale(Math.min(...values), Math.max(...values));
  const height =
    MARGIN_TOP + TRACK_HEIGHT * doc.features.length + MARGIN_BOTTOM;
  const parts: string[] = [];
  const refX = toX(doc.actual_prediction);
  parts.push(
    `<line class="reference" x1="${fmt(refX)}" y1="${fmt(MARGIN_TOP - 8)}" ` +
      `x2="${fmt(refX)}" y2="${fmt(height - MARGIN_BOTTOM + 8)}" ` +
      `stroke="black" stroke-dasharray="4 3"/>`,
  );
  doc.ranking.forEach((j, rowIdx) => {
    const feature = doc.features[j];
    if (!feature) throw new ChartError("ranking out of range");
    const cy = MARGIN_TOP + TRACK_HEIGHT * rowIdx + TRACK_HEIGHT / 2;
    parts.push(
      `<text class="feature-label" x="${fmt(MARGIN_LEFT - 8)}" ` +
        `y="${fmt(cy + 4)}" text-anchor="end" font-size="12" ` +
        `font-family="sans-serif">${escapeXml(feature.name)}</text>`,
    );
    parts.push(
      `<line x1="${fmt(MARGIN_LEFT)}" y1="${fmt(cy)}" ` +
        `x2="${fmt(WIDTH - MARGIN_RIGHT)}" y2="${fmt(cy)}" stroke="#DDDDDD"/>`,
    );
    const obsLevel = doc.observation_quantile[j] ?? null;
    const dots: TrackDot[] = feature.predictions.map((pred, k) => {
      const level = probeLevel(feature, k);
      // the probe closest to the observation's own quantile gets the
      // enlarged bubble marking "you are here"
      return { x: toX(pred), y: cy, r: 3.5, color: quantileColor(level) };
    });
    if (obsLevel !== null && dots.length > 0) {
      let best = 0;
      let bestDist = Infinity;
      feature.predictions.forEach((_, k) => {
        const d = Math.abs(probeLevel(feature, k) - obsLevel);
        if (d < bestDist) {
          bestDist = d;
          best = k;
        }
      });
      const dot = dots[best];
      if (dot) dot.r = 6;
    }
    for (const dot of dots) {
      const cls = dot.r > 3.5 ? ' class="observation"' : "";
      parts.push(
        `<circle${cls} cx="${fmt(dot.x)}" cy="${fmt(dot.y)}" ` +
          `r="${fmt(dot.r)}" fill="${dot.color}"/>`,
      );
    }
  });
  return parts;
}

function renderTabs(classes: string[], selected: number): string[] {
  return classes.map((name, c) => {
    const x = MARGIN_LEFT + c * 90;
    const weight = c === selected ? ' font-weight="bold"' : "";
    return (
      `<text class="class-tab" data-class="${c}" x="${fmt(x)}" y="20" ` +
      `font-size="13" font-family="sans-serif"${weight}>` +
      `${escapeXml(name)}</text>`
    );
  });
}

/** Render the document to standalone SVG markup. Throws ChartError on a
 * malformed document before emitting anything. */
export function renderLocalPlot(
  doc: LocalExplanation,
  options: RenderOptions = {},
): string {
  let body: LocalDocument;
  let tabs: string[] = [];
  if (doc.kind === "classification-local") {
    const classIndex = options.classIndex ?? 0;
    const slice = doc.per_class[classIndex];
    if (!slice) {
      throw new ChartError(`class index ${classIndex} out of range`);
    }
    validateBody(slice);
    tabs = renderTabs(doc.classes, classIndex);
    body = slice;
  } else {
    validateBody(doc);
    body = doc;
  }
  const height = MARGIN_TOP + TRACK_HEIGHT * body.features.length + MARGIN_BOTTOM;
  const head =
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
    `height="${height}" viewBox="0 0 ${WIDTH} ${height}">`;
  return [head, ...tabs, ...renderBody(body), "</svg>"].join("\n") + "\n";
}
