/**
 * Parsing and validation for the experiment-metrics CSV.
 *
 * The expected header is fixed; anything missing is a hard error so that a
 * schema drift upstream cannot silently produce empty figures.
 */

export const REQUIRED_COLUMNS = [
  "method",
  "hyperparam",
  "n",
  "seed",
  "invariance_discrepancy",
  "id_sampled",
  "excess_risk_empirical",
  "excess_risk_exact",
  "wall_time_ms",
  "oracle_calls",
  "error",
] as const;

export interface MetricsRow {
  method: string;
  hyperparam: number;
  n: number;
  seed: string;
  invarianceDiscrepancy: number | null;
  idSampled: boolean;
  excessRiskEmpirical: number | null;
  excessRiskExact: number | null;
  error: string;
}

export class SchemaError extends Error {}

/** Minimal RFC-4180 parser: quoted fields, escaped quotes, LF/CRLF rows. */
export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let row: string[] = [];
  let field = "";
  let inQuotes = false;
  for (let i = 0; i < text.length; i++) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        field += ch;
      }
    } else if (ch === '"') {
      inQuotes = true;
    } else if (ch === ",") {
      row.push(field);
      field = "";
    } else if (ch === "\n" || ch === "\r") {
      if (ch === "\r" && text[i + 1] === "\n") i++;
      row.push(field);
      field = "";
      rows.push(row);
      row = [];
    } else {
      field += ch;
    }
  }
  if (field.length > 0 || row.length > 0) {
    row.push(field);
    rows.push(row);
  }
  return rows;
}

function parseOptionalNumber(cell: string, column: string): number | null {
  if (cell === "") return null;
  const value = Number(cell);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`column ${column} holds non-numeric value ${JSON.stringify(cell)}`);
  }
  return value;
}

export function parseMetrics(text: string): MetricsRow[] {
  const table = parseCsv(text).filter((row) => row.length > 1 || row[0] !== "");
  if (table.length === 0) {
    throw new SchemaError("CSV is empty");
  }
  const header = table[0];
  const index = new Map(header.map((name, i) => [name, i]));
  for (const column of REQUIRED_COLUMNS) {
    if (!index.has(column)) {
      throw new SchemaError(`missing required column ${JSON.stringify(column)}`);
    }
  }
  const cell = (row: string[], column: string): string => row[index.get(column)!] ?? "";
  const rows: MetricsRow[] = [];
  for (const raw of table.slice(1)) {
    rows.push({
      method: cell(raw, "method"),
      hyperparam: Number(cell(raw, "hyperparam")),
      n: Number(cell(raw, "n")),
      seed: cell(raw, "seed"),
      invarianceDiscrepancy: parseOptionalNumber(
        cell(raw, "invariance_discrepancy"), "invariance_discrepancy"),
      idSampled: cell(raw, "id_sampled") === "true",
      excessRiskEmpirical: parseOptionalNumber(
        cell(raw, "excess_risk_empirical"), "excess_risk_empirical"),
      excessRiskExact: parseOptionalNumber(
        cell(raw, "excess_risk_exact"), "excess_risk_exact"),
      error: cell(raw, "error"),
    });
  }
  return rows;
}

/** Figures consume only the seed-averaged rows, mirroring the per-point
 * averaging of the experiment protocol. */
export function averagedRows(rows: MetricsRow[]): MetricsRow[] {
  const averaged = rows.filter((row) => row.seed === "avg" && row.error === "");
  if (averaged.length === 0) {
    throw new SchemaError("CSV holds no seed-averaged rows (seed == 'avg')");
  }
  return averaged;
}
