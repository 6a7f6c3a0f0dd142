import {
  ClassificationLocalDocument,
  FeatureEntry,
  LocalDocument,
} from "../src/api.js";

export function makeFeature(
  name: string,
  index: number,
  predictions: number[],
): FeatureEntry {
  const n = predictions.length;
  const levels = predictions.map((_, k) => (n > 1 ? k / (n - 1) : 0.5));
  return {
    name,
    index,
    quantile_levels: levels,
    probe_values: levels.map((l) => l * 10),
    predictions,
    effects: predictions.map((p) => p - predictions[0]!),
    importance: Math.max(...predictions) - Math.min(...predictions),
  };
}

export function makeLocalDocument(): LocalDocument {
  return {
    kind: "local",
    row: 0,
    baseline: [1.0, 2.0, 3.0],
    actual_prediction: 5.0,
    observation_quantile: [0.5, 0.25, null],
    ranking: [2, 0, 1],
    features: [
      makeFeature("alpha", 0, [4.0, 5.0, 6.0]),
      makeFeature("beta", 1, [5.0, 5.0, 5.0]),
      makeFeature("gamma", 2, [1.0, 5.0, 9.0]),
    ],
  };
}

export function makeClassificationDocument(): ClassificationLocalDocument {
  const slice = makeLocalDocument();
  return {
    kind: "classification-local",
    classes: ["no", "yes"],
    per_class: [slice, { ...slice, actual_prediction: 1 - slice.actual_prediction }],
    stacked_importance: [1, 2, 3],
    ranking: [2, 1, 0],
    row: 0,
  };
}
