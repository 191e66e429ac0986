/**
 * specavg-plot --csv metrics.csv --kind discrepancy|risk --out figure.svg
 *
 * Reads an experiment CSV, keeps the seed-averaged rows, and writes one
 * deterministic SVG figure. Exits nonzero on schema mismatch.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { buildFigure, FigureKind } from "./figures.js";
import { parseMetrics, SchemaError } from "./schema.js";
import { renderFigure } from "./svg.js";

function parseArgs(argv: string[]): { csv: string; kind: FigureKind; out: string } {
  const options = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag?.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near ${JSON.stringify(flag)}`);
    }
    options.set(flag.slice(2), value);
  }
  const csv = options.get("csv");
  const kind = options.get("kind");
  const out = options.get("out");
  if (!csv || !kind || !out) {
    throw new Error("usage: specavg-plot --csv PATH --kind discrepancy|risk --out PATH.svg");
  }
  if (kind !== "discrepancy" && kind !== "risk") {
    throw new Error(`--kind must be 'discrepancy' or 'risk', got ${JSON.stringify(kind)}`);
  }
  return { csv, kind, out };
}

export function run(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const text = readFileSync(args.csv, "utf-8");
    const figure = buildFigure(args.kind, parseMetrics(text));
    writeFileSync(args.out, renderFigure(figure), "utf-8");
    console.log(`wrote ${args.kind} figure with ${figure.series.length} series to ${args.out}`);
    return 0;
  } catch (err) {
    const prefix = err instanceof SchemaError ? "schema error" : "error";
    console.error(`${prefix}: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}
