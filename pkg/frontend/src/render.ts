/** Render every (z, kappa) group of a results CSV into SVG panels named
 * fig1a.svg, fig1b.svg, ... in group order (z ascending). */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { extractPanels } from "./extract.js";
import { DEFAULT_OPTIONS, renderPanelSvg } from "./svg.js";

export interface RenderOptions {
  logY?: boolean;
}

const SUFFIXES = "abcdefghijklmnopqrstuvwxyz";

export function renderFig1(
  csvPath: string,
  outDir: string,
  options: RenderOptions = {},
): string[] {
  const text = readFileSync(csvPath, "utf8");
  const panels = extractPanels(text);
  if (panels.length === 0) {
    throw new Error(`no plottable groups in ${csvPath}`);
  }
  if (panels.length > SUFFIXES.length) {
    throw new Error(`too many groups (${panels.length}) for panel naming`);
  }
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  panels.forEach((panel, i) => {
    const svg = renderPanelSvg(panel, {
      ...DEFAULT_OPTIONS,
      logY: options.logY ?? false,
    });
    const file = join(outDir, `fig1${SUFFIXES[i]}.svg`);
    writeFileSync(file, svg);
    written.push(file);
  });
  return written;
}
