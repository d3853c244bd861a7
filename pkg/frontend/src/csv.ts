import type { CurvePoint } from "./types.js";

/** Parse /stats/curve.csv (length_threshold,correctness_rate,n_samples). */
export function parseCurveCsv(text: string): CurvePoint[] {
  const lines = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (lines.length === 0) return [];
  const points: CurvePoint[] = [];
  for (const line of lines.slice(1)) {
    const [threshold, rate, count] = line.split(",");
    const point = {
      length_threshold: Number(threshold),
      correctness_rate: Number(rate),
      n_samples: Number(count),
    };
    if ([point.length_threshold, point.correctness_rate, point.n_samples].some(Number.isNaN)) {
      throw new Error(`malformed curve CSV line: ${line}`);
    }
    points.push(point);
  }
  return points;
}

/** SVG polyline points for the curve, scaled into a width×height viewbox
 * (x: log-ish by point order keeps the ladder readable; y: 0..1 rate). */
export function curvePolylinePoints(
  points: CurvePoint[],
  width: number,
  height: number,
  pad = 4,
): string {
  if (points.length === 0) return "";
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const step = points.length > 1 ? innerW / (points.length - 1) : 0;
  return points
    .map((p, i) => {
      const x = pad + (points.length > 1 ? i * step : innerW / 2);
      const y = pad + (1 - p.correctness_rate) * innerH;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}

export function formatRate(rate: number | null): string {
  return rate === null ? "n/a" : `${(rate * 100).toFixed(1)}%`;
}
