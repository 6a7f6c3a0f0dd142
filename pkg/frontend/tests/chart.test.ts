import { describe, expect, it } from "vitest";

import {
  ChartError,
  MARGIN_LEFT,
  MARGIN_RIGHT,
  WIDTH,
  quantileColor,
  renderLocalPlot,
} from "../src/chart.js";
import { makeClassificationDocument, makeLocalDocument } from "./fixtures.js";

function featureLabels(svg: string): string[] {
  return [...svg.matchAll(/class="feature-label"[^>]*>([^<]*)<\/text>/g)].map(
    (m) => m[1]!,
  );
}

describe("quantileColor", () => {
  it("interpolates blue to red", () => {
    expect(quantileColor(0)).toBe("#0000FF");
    expect(quantileColor(1)).toBe("#FF0000");
    expect(quantileColor(0.5)).toBe("#800080");
  });

  it("clamps out-of-range levels", () => {
    expect(quantileColor(-2)).toBe("#0000FF");
    expect(quantileColor(3)).toBe("#FF0000");
  });
});

describe("renderLocalPlot", () => {
  it("renders one track per feature in served ranking order", () => {
    const doc = makeLocalDocument();
    const svg = renderLocalPlot(doc);
    expect(featureLabels(svg)).toEqual(["gamma", "alpha", "beta"]);
  });

  it("places the dashed reference line at the actual prediction", () => {
    const doc = makeLocalDocument();
    const svg = renderLocalPlot(doc);
    const match = svg.match(/class="reference" x1="([\d.]+)"/);
    expect(match).not.toBeNull();
    // predictions span [1, 9] plus the actual prediction 5; with 5%
    // padding per side, 5 sits exactly mid-scale
    const inner = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    expect(Number(match![1])).toBeCloseTo(MARGIN_LEFT + inner / 2, 3);
  });

  it("marks the observation's own quantile with an enlarged bubble", () => {
    const svg = renderLocalPlot(makeLocalDocument());
    const enlarged = [...svg.matchAll(/class="observation"[^>]*r="6"/g)];
    // two numeric features carry an observation quantile; the third is
    // categorical (null) and gets no enlarged marker
    expect(enlarged).toHaveLength(2);
  });

  it("colors probes blue to red", () => {
    const svg = renderLocalPlot(makeLocalDocument());
    expect(svg).toContain('fill="#0000FF"');
    expect(svg).toContain('fill="#FF0000"');
  });

  it("is deterministic", () => {
    const doc = makeLocalDocument();
    expect(renderLocalPlot(doc)).toBe(renderLocalPlot(doc));
  });

  it("escapes markup in feature names", () => {
    const doc = makeLocalDocument();
    doc.features[0]!.name = "a<b&c";
    const svg = renderLocalPlot(doc);
    expect(svg).toContain("a&lt;b&amp;c");
    expect(svg).not.toContain("a<b&c");
  });

  it("renders one tab per class and the selected slice", () => {
    const doc = makeClassificationDocument();
    const svg = renderLocalPlot(doc, { classIndex: 1 });
    const tabs = [...svg.matchAll(/class="class-tab"/g)];
    expect(tabs).toHaveLength(2);
    expect(svg).toMatch(/font-weight="bold">yes</);
  });

  it("rejects malformed documents without partial output", () => {
    const noFeatures = { ...makeLocalDocument(), features: [], ranking: [] };
    expect(() => renderLocalPlot(noFeatures)).toThrow(ChartError);

    const badRanking = { ...makeLocalDocument(), ranking: [0, 1, 9] };
    expect(() => renderLocalPlot(badRanking)).toThrow(ChartError);

    const doc = makeLocalDocument();
    doc.features[1]!.predictions = [NaN, 1, 2];
    expect(() => renderLocalPlot(doc)).toThrow(/non-numeric/);

    const classDoc = makeClassificationDocument();
    expect(() => renderLocalPlot(classDoc, { classIndex: 5 })).toThrow(
      /out of range/,
    );
  });
});
