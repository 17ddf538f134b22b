#!/usr/bin/env node
/** render_fig1 --in results.csv --out figs/ [--logy] */

import { renderFig1 } from "./render.js";

function usage(): string {
  return "usage: render_fig1 --in <results.csv> --out <dir> [--logy]";
}

export function main(argv: string[]): number {
  let input: string | undefined;
  let outDir: string | undefined;
  let logY = false;

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--in") {
      input = argv[++i];
    } else if (arg === "--out") {
      outDir = argv[++i];
    } else if (arg === "--logy") {
      logY = true;
    } else if (arg === "--help" || arg === "-h") {
      console.log(usage());
      return 0;
    } else {
      console.error(`render_fig1: unknown argument ${arg}\n${usage()}`);
      return 2;
    }
  }
  if (!input || !outDir) {
    console.error(`render_fig1: --in and --out are required\n${usage()}`);
    return 2;
  }
  try {
    const files = renderFig1(input, outDir, { logY });
    for (const file of files) {
      console.log(file);
    }
    return 0;
  } catch (err) {
    console.error(`render_fig1: error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
