import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { extractPanels } from "../src/extract.js";
import { renderFig1 } from "../src/render.js";
import { renderPanelSvg } from "../src/svg.js";

const HEADER =
  "experiment,z,regime,kappa,seed,T,err_spectral,scaled_err," +
  "lambda_min_V,lambda_max_V,y_radius,covmin_bound,covmax_bound,truncated";

function syntheticCsv(nSeeds: number, nCheckpoints: number): string {
  const groups: Array<[string, string, string]> = [
    ["5", "1", "stable"],
    ["10", "2", "marginally-stable"],
    ["15", "5", "unstable"],
  ];
  const lines = [HEADER];
  for (const [z, kappa, regime] of groups) {
    for (let seed = 0; seed < nSeeds; seed++) {
      for (let t = 1; t <= nCheckpoints; t++) {
        const err = 1.0 / Math.sqrt(t) + 0.01 * seed;
        const scaled = Math.sqrt(t) * err;
        lines.push(
          `fig1,${z},${regime},${kappa},${seed},${t},${err},${scaled},1,2,3,4,5,0`,
        );
      }
    }
  }
  return lines.join("\n") + "\n";
}

function countPolylines(svg: string): number {
  return (svg.match(/<polyline /g) ?? []).length;
}

describe("renderFig1", () => {
  it("writes one panel per group with every seed overplotted", () => {
    const dir = mkdtempSync(join(tmpdir(), "fig1-"));
    const csvPath = join(dir, "results.csv");
    writeFileSync(csvPath, syntheticCsv(20, 50));
    const files = renderFig1(csvPath, join(dir, "figs"));
    expect(files.map((f) => f.split("/").pop())).toEqual([
      "fig1a.svg",
      "fig1b.svg",
      "fig1c.svg",
    ]);
    for (const file of files) {
      expect(countPolylines(readFileSync(file, "utf8"))).toBe(20);
    }
  });

  it("is deterministic", () => {
    const dir = mkdtempSync(join(tmpdir(), "fig1-"));
    const csvPath = join(dir, "results.csv");
    writeFileSync(csvPath, syntheticCsv(3, 5));
    const [first] = renderFig1(csvPath, join(dir, "a"));
    const [second] = renderFig1(csvPath, join(dir, "b"));
    expect(readFileSync(first, "utf8")).toBe(readFileSync(second, "utf8"));
  });

  it("errors on a CSV with no plottable rows", () => {
    const dir = mkdtempSync(join(tmpdir(), "fig1-"));
    const csvPath = join(dir, "results.csv");
    writeFileSync(csvPath, HEADER + "\n");
    expect(() => renderFig1(csvPath, join(dir, "figs"))).toThrow(/no plottable groups/);
  });

  it("log scale changes the vertical mapping", () => {
    const dir = mkdtempSync(join(tmpdir(), "fig1-"));
    const csvPath = join(dir, "results.csv");
    writeFileSync(csvPath, syntheticCsv(2, 10));
    const [linear] = renderFig1(csvPath, join(dir, "lin"));
    const [log] = renderFig1(csvPath, join(dir, "log"), { logY: true });
    expect(readFileSync(linear, "utf8")).not.toBe(readFileSync(log, "utf8"));
  });
});

describe("renderPanelSvg", () => {
  it("puts the group key and regime in the title", () => {
    const [panel] = extractPanels(syntheticCsv(2, 3));
    const svg = renderPanelSvg(panel);
    expect(svg).toContain("z=5, kappa=1 (stable)");
    expect(svg).toContain("sqrt(T) * spectral error");
  });

  it("rejects an all-nonpositive panel under log scale", () => {
    const csv = [HEADER, "fig1,5,stable,1,0,1,0,0,1,2,3,4,5,0"].join("\n");
    const [panel] = extractPanels(csv);
    expect(() => renderPanelSvg(panel, { logY: true })).toThrow(/log scale/);
  });
});
