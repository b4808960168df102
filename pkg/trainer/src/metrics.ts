/** Binary classification metrics for the positive class. */

export interface Metrics {
  accuracy: number;
  precision: number;
  recall: number;
  f1: number;
  n: number;
}

export function computeMetrics(predicted: number[], actual: number[]): Metrics {
  if (predicted.length !== actual.length) throw new Error("length mismatch");
  let tp = 0,
    fp = 0,
    fn = 0,
    tn = 0;
  for (let i = 0; i < predicted.length; i++) {
    if (predicted[i] === 1 && actual[i] === 1) tp++;
    else if (predicted[i] === 1) fp++;
    else if (actual[i] === 1) fn++;
    else tn++;
  }
  const n = predicted.length;
  const precision = tp + fp ? tp / (tp + fp) : 0;
  const recall = tp + fn ? tp / (tp + fn) : 0;
  const f1 = precision + recall ? (2 * precision * recall) / (precision + recall) : 0;
  return { accuracy: n ? (tp + tn) / n : 0, precision, recall, f1, n };
}
