import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { extractPanel, extractPanels } from "../src/extract.js";

const GOLDEN_DIR = join(import.meta.dirname, "golden");

function panelsAsPlain(csvText: string) {
  return extractPanels(csvText).map((p) => ({
    z: p.z,
    kappa: p.kappa,
    regime: p.regime,
    series: Object.fromEntries(
      [...p.series.entries()].map(([seed, pts]) => [
        seed,
        pts.map((pt) => [pt.t, pt.value]),
      ]),
    ),
  }));
}

describe("golden extraction", () => {
  it("matches the harness-generated extraction exactly", () => {
    const csvText = readFileSync(join(GOLDEN_DIR, "mini.csv"), "utf8");
    const golden = JSON.parse(
      readFileSync(join(GOLDEN_DIR, "mini_extracted.json"), "utf8"),
    );
    expect(panelsAsPlain(csvText)).toEqual(golden);
  });
});

describe("extractPanels", () => {
  const header =
    "experiment,z,regime,kappa,seed,T,err_spectral,scaled_err," +
    "lambda_min_V,lambda_max_V,y_radius,covmin_bound,covmax_bound,truncated";

  it("reads plotted values verbatim, never recomputing them", () => {
    // scaled_err deliberately inconsistent with sqrt(T) * err_spectral:
    // the extractor must return the column value untouched
    const csv = [
      header,
      "fig1,5,stable,1,0,4.0,1.0,123.456,0,0,0,0,0,0",
    ].join("\n");
    const [panel] = extractPanels(csv);
    expect(panel.series.get("0")).toEqual([{ t: 4.0, value: 123.456 }]);
  });

  it("groups by z and kappa and sorts numerically", () => {
    const csv = [
      header,
      "fig1,15,unstable,5,0,1.0,0.1,0.1,0,0,0,0,0,0",
      "fig1,5,stable,1,0,1.0,0.1,0.1,0,0,0,0,0,0",
      "fig1,10,marginally-stable,2,0,1.0,0.1,0.1,0,0,0,0,0,0",
    ].join("\n");
    expect(extractPanels(csv).map((p) => p.z)).toEqual(["5", "10", "15"]);
  });

  it("names the missing column in schema errors", () => {
    const csv = ["experiment,z,regime,kappa,seed,T", "fig1,5,stable,1,0,1.0"].join("\n");
    expect(() => extractPanels(csv)).toThrow(/missing required column "scaled_err"/);
  });

  it("skips rows without a plottable value", () => {
    const csv = [
      header,
      "lil-mc,bm,marginally-stable,1,0,1.0,,,0,0,0,,,0",
      "fig1,5,stable,1,0,1.0,0.1,0.1,0,0,0,0,0,0",
    ].join("\n");
    const panels = extractPanels(csv);
    expect(panels).toHaveLength(1);
    expect(panels[0].z).toBe("5");
  });
});

describe("extractPanel", () => {
  it("errors on an absent group instead of returning an empty plot", () => {
    const csvText = readFileSync(join(GOLDEN_DIR, "mini.csv"), "utf8");
    expect(() => extractPanel(csvText, { z: "15", kappa: "5" })).toThrow(
      /no rows for group z=15, kappa=5/,
    );
    const panel = extractPanel(csvText, { z: "5", kappa: "1" });
    expect(panel.series.size).toBe(2);
  });
});
