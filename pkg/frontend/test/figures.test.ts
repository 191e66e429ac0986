import { createHash } from "node:crypto";
import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { buildFigure } from "../src/figures.js";
import { parseMetrics, SchemaError } from "../src/schema.js";
import { renderFigure } from "../src/svg.js";

const ROOT = join(__dirname, "..");
const SAMPLES = join(ROOT, "..", "sample_data");
const CLI = join(ROOT, "dist", "cli.js");

function sample(name: string): string {
  return readFileSync(join(SAMPLES, name), "utf-8");
}

describe("figure models", () => {
  it("risk figure from a two-method CSV has labelled series per sweep point", () => {
    const rows = parseMetrics(sample("invariance_d4.csv"));
    const figure = buildFigure("risk", rows);
    expect(figure.series.map((s) => s.label)).toEqual(["krr", "spec_avg"]);
    expect(figure.xLog && figure.yLog).toBe(true);
  });

  it("discrepancy figure carries the KRR sweep from the replication CSV", () => {
    const rows = parseMetrics(sample("replication_d10.csv"));
    const figure = buildFigure("discrepancy", rows);
    const krr = figure.series.find((s) => s.label === "krr");
    expect(krr).toBeDefined();
    expect(krr!.points.length).toBe(5);
    expect(krr!.points.every((p) => p.y > 0)).toBe(true);
    const spec = figure.series.find((s) => s.label === "spec_avg");
    expect(spec!.points.every((p) => p.y === 0)).toBe(true);
  });

  it("single averaged row still renders", () => {
    const text = [
      "method,hyperparam,n,seed,invariance_discrepancy,id_sampled,excess_risk_empirical,excess_risk_exact,wall_time_ms,oracle_calls,error",
      "spec_avg,2,64,avg,0,false,0.01,0.009,1.5,100,",
    ].join("\n") + "\n";
    const svg = renderFigure(buildFigure("risk", parseMetrics(text)));
    expect(svg).toContain("<svg");
    expect(svg).toContain("spec_avg");
  });

  it("rejects an unknown kind", () => {
    const rows = parseMetrics(sample("invariance_d4.csv"));
    expect(() => buildFigure("volume" as never, rows)).toThrow(SchemaError);
  });
});

describe("rendering", () => {
  it("is deterministic across repeated renders", () => {
    const rows = parseMetrics(sample("risk_scaling_d2.csv"));
    const first = renderFigure(buildFigure("risk", rows));
    const second = renderFigure(buildFigure("risk", rows));
    expect(second).toBe(first);
  });

  it("produces valid-looking SVG for both kinds from the shipped CSVs", () => {
    for (const [name, kind] of [
      ["replication_d10.csv", "discrepancy"],
      ["risk_scaling_d2.csv", "risk"],
    ] as const) {
      const svg = renderFigure(buildFigure(kind, parseMetrics(sample(name))));
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
      expect(svg).toContain("polyline");
    }
  });
});

describe("command line", () => {
  it("writes byte-identical figures across two runs and leaves the CSV untouched", () => {
    const dir = mkdtempSync(join(tmpdir(), "specavg-plot-"));
    const csvPath = join(SAMPLES, "replication_d10.csv");
    const before = createHash("sha256").update(readFileSync(csvPath)).digest("hex");
    const outA = join(dir, "a.svg");
    const outB = join(dir, "b.svg");
    execFileSync("node", [CLI, "--csv", csvPath, "--kind", "discrepancy", "--out", outA]);
    execFileSync("node", [CLI, "--csv", csvPath, "--kind", "discrepancy", "--out", outB]);
    expect(readFileSync(outA)).toEqual(readFileSync(outB));
    const after = createHash("sha256").update(readFileSync(csvPath)).digest("hex");
    expect(after).toBe(before);
  });

  it("exits nonzero on schema mismatch", () => {
    const dir = mkdtempSync(join(tmpdir(), "specavg-plot-"));
    const bad = join(dir, "bad.csv");
    execFileSync("node", ["-e",
      `require('fs').writeFileSync(${JSON.stringify(bad)}, 'method,n\\nx,1\\n')`]);
    expect(() =>
      execFileSync("node", [CLI, "--csv", bad, "--kind", "risk",
                            "--out", join(dir, "out.svg")], { stdio: "pipe" }),
    ).toThrow();
  });

  it("exits nonzero on a bad kind", () => {
    const dir = mkdtempSync(join(tmpdir(), "specavg-plot-"));
    expect(() =>
      execFileSync("node", [CLI, "--csv", join(SAMPLES, "invariance_d4.csv"),
                            "--kind", "pie", "--out", join(dir, "out.svg")],
                   { stdio: "pipe" }),
    ).toThrow();
  });
});
