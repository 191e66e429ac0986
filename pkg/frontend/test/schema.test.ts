import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { averagedRows, parseCsv, parseMetrics, SchemaError } from "../src/schema.js";

const SAMPLES = join(__dirname, "..", "..", "sample_data");

const TINY = [
  "method,hyperparam,n,seed,invariance_discrepancy,id_sampled,excess_risk_empirical,excess_risk_exact,wall_time_ms,oracle_calls,error",
  "spec_avg,2,64,1,0,false,0.01,0.009,1.5,100,",
  "spec_avg,2,64,avg,0,false,0.01,0.009,1.5,100,",
].join("\n") + "\n";

describe("parseCsv", () => {
  it("handles quoted fields with commas and escaped quotes", () => {
    const rows = parseCsv('a,"b,c",d\n1,"say ""hi""",2\n');
    expect(rows).toEqual([["a", "b,c", "d"], ["1", 'say "hi"', "2"]]);
  });

  it("handles CRLF", () => {
    expect(parseCsv("a,b\r\n1,2\r\n")).toEqual([["a", "b"], ["1", "2"]]);
  });
});

describe("parseMetrics", () => {
  it("parses the tiny fixture", () => {
    const rows = parseMetrics(TINY);
    expect(rows).toHaveLength(2);
    expect(rows[0].method).toBe("spec_avg");
    expect(rows[0].excessRiskExact).toBeCloseTo(0.009);
    expect(rows[1].seed).toBe("avg");
  });

  it("parses every shipped sample CSV", () => {
    for (const name of ["invariance_d4.csv", "risk_scaling_d2.csv", "replication_d10.csv"]) {
      const rows = parseMetrics(readFileSync(join(SAMPLES, name), "utf-8"));
      expect(rows.length).toBeGreaterThan(0);
      expect(averagedRows(rows).length).toBeGreaterThan(0);
    }
  });

  it("treats empty risk cells as null", () => {
    const text = TINY.replace("0.01,0.009", "0.01,");
    const rows = parseMetrics(text);
    expect(rows[0].excessRiskExact).toBeNull();
  });

  it("rejects a missing column", () => {
    const broken = TINY.replace("invariance_discrepancy,", "");
    expect(() => parseMetrics(broken)).toThrow(SchemaError);
  });

  it("rejects an empty file", () => {
    expect(() => parseMetrics("")).toThrow(SchemaError);
  });

  it("rejects rows without averages", () => {
    const noAvg = TINY.split("\n").slice(0, 2).join("\n") + "\n";
    expect(() => averagedRows(parseMetrics(noAvg))).toThrow(SchemaError);
  });
});
