import { averagedRows, MetricsRow, SchemaError } from "./schema.js";
import { FigureModel, Series } from "./svg.js";

export type FigureKind = "discrepancy" | "risk";

function groupBy<K>(rows: MetricsRow[], key: (row: MetricsRow) => K): Map<K, MetricsRow[]> {
  const out = new Map<K, MetricsRow[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = out.get(k);
    if (bucket) bucket.push(row);
    else out.set(k, [row]);
  }
  return out;
}

/** Invariance discrepancy against the swept hyperparameter, one series per
 * method (split by n when several training sizes are present). */
export function discrepancyFigure(rows: MetricsRow[]): FigureModel {
  const averaged = averagedRows(rows).filter((r) => r.invarianceDiscrepancy !== null);
  if (averaged.length === 0) throw new SchemaError("no discrepancy values to plot");
  const sizes = new Set(averaged.map((r) => r.n));
  const grouped = groupBy(averaged, (r) =>
    sizes.size > 1 ? `${r.method} (n=${r.n})` : r.method);
  const series: Series[] = [...grouped.entries()]
    .map(([label, group]) => ({
      label,
      points: group.map((r) => ({ x: r.hyperparam, y: r.invarianceDiscrepancy as number })),
    }))
    .sort((a, b) => (a.label < b.label ? -1 : 1));
  const positiveX = series.every((s) => s.points.every((p) => p.x > 0));
  return {
    title: "Invariance discrepancy vs. hyperparameter",
    xLabel: "hyperparameter (ridge for KRR, cutoff for the spectral estimator)",
    yLabel: "invariance discrepancy",
    xLog: positiveX,
    yLog: false,
    series,
  };
}

/** Test error against training-set size on log-log axes, one series per
 * (method, hyperparameter). */
export function riskFigure(rows: MetricsRow[]): FigureModel {
  const averaged = averagedRows(rows).filter((r) => r.excessRiskEmpirical !== null);
  if (averaged.length === 0) throw new SchemaError("no risk values to plot");
  const hyperCounts = groupBy(averaged, (r) => r.method);
  const grouped = groupBy(averaged, (r) => {
    const sweep = new Set(hyperCounts.get(r.method)!.map((g) => g.hyperparam));
    return sweep.size > 1 ? `${r.method} (${r.hyperparam})` : r.method;
  });
  const series: Series[] = [...grouped.entries()]
    .map(([label, group]) => ({
      label,
      points: group.map((r) => ({ x: r.n, y: r.excessRiskEmpirical as number })),
    }))
    .sort((a, b) => (a.label < b.label ? -1 : 1));
  for (const s of series) {
    if (s.points.some((p) => p.y <= 0)) {
      throw new SchemaError(`series ${s.label} has non-positive risk; cannot log-scale`);
    }
  }
  return {
    title: "Test error vs. training-set size",
    xLabel: "training samples n",
    yLabel: "excess risk",
    xLog: true,
    yLog: true,
    series,
  };
}

export function buildFigure(kind: FigureKind, rows: MetricsRow[]): FigureModel {
  if (kind === "discrepancy") return discrepancyFigure(rows);
  if (kind === "risk") return riskFigure(rows);
  throw new SchemaError(`unknown figure kind ${JSON.stringify(kind)}`);
}
