/** Self-contained SVG line charts: no DOM, no chart library, deterministic
 * output for byte-stable golden runs. */

import type { Panel } from "./extract.js";

export interface PanelOptions {
  width: number;
  height: number;
  xLabel: string;
  yLabel: string;
  logY: boolean;
}

export const DEFAULT_OPTIONS: PanelOptions = {
  width: 640,
  height: 420,
  xLabel: "T",
  yLabel: "sqrt(T) * spectral error",
  logY: false,
};

const MARGIN = { top: 42, right: 18, bottom: 46, left: 64 };

// 20-color cycle (category palette repeated in hue order)
const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
  "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5",
  "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
];

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const rawStep = span / Math.max(count - 1, 1);
  const magnitude = 10 ** Math.floor(Math.log10(rawStep));
  const residual = rawStep / magnitude;
  const step = magnitude * (residual >= 5 ? 5 : residual >= 2 ? 2 : 1);
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-9 * span; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); 10 ** e <= hi * (1 + 1e-9); e++) {
    ticks.push(10 ** e);
  }
  return ticks.length > 0 ? ticks : [lo];
}

function fmt(x: number): string {
  if (x === 0) return "0";
  const magnitude = Math.abs(x);
  if (magnitude >= 1e4 || magnitude < 1e-3) return x.toExponential(0);
  return Number(x.toPrecision(6)).toString();
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export function renderPanelSvg(
  panel: Panel,
  options: Partial<PanelOptions> = {},
): string {
  const opt = { ...DEFAULT_OPTIONS, ...options };
  const plotW = opt.width - MARGIN.left - MARGIN.right;
  const plotH = opt.height - MARGIN.top - MARGIN.bottom;

  const seeds = [...panel.series.keys()];
  const points = seeds.flatMap((s) => panel.series.get(s)!);
  const usable = opt.logY ? points.filter((p) => p.value > 0) : points;
  if (usable.length === 0) {
    throw new Error(
      `nothing to plot for group z=${panel.z}, kappa=${panel.kappa}` +
        (opt.logY ? " (log scale drops non-positive values)" : ""),
    );
  }

  const xs = usable.map((p) => p.t);
  const ys = usable.map((p) => p.value);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (yLo === yHi) {
    yLo -= 0.5;
    yHi += 0.5;
  }

  const xScale = (x: number) =>
    MARGIN.left + ((x - xLo) / (xHi - xLo || 1)) * plotW;
  const yScale = opt.logY
    ? (y: number) =>
        MARGIN.top +
        plotH -
        ((Math.log10(y) - Math.log10(yLo)) /
          (Math.log10(yHi) - Math.log10(yLo) || 1)) *
          plotH
    : (y: number) => MARGIN.top + plotH - ((y - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${opt.width}" height="${opt.height}" viewBox="0 0 ${opt.width} ${opt.height}">`,
  );
  parts.push(`<rect width="${opt.width}" height="${opt.height}" fill="white"/>`);
  const title = `z=${panel.z}, kappa=${panel.kappa} (${panel.regime})`;
  parts.push(
    `<text x="${opt.width / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">${escapeXml(title)}</text>`,
  );

  // frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333" stroke-width="1"/>`,
  );

  for (const tick of niceTicks(xLo, xHi, 8)) {
    const x = xScale(tick);
    parts.push(
      `<line x1="${x.toFixed(2)}" y1="${MARGIN.top + plotH}" x2="${x.toFixed(2)}" y2="${MARGIN.top + plotH + 5}" stroke="#333"/>`,
      `<text x="${x.toFixed(2)}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(tick)}</text>`,
    );
  }
  const yTicks = opt.logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi, 7);
  for (const tick of yTicks) {
    const y = yScale(tick);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${y.toFixed(2)}" x2="${MARGIN.left}" y2="${y.toFixed(2)}" stroke="#333"/>`,
      `<text x="${MARGIN.left - 9}" y="${(y + 4).toFixed(2)}" text-anchor="end" font-family="sans-serif" font-size="11">${fmt(tick)}</text>`,
    );
  }

  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${opt.height - 10}" text-anchor="middle" font-family="sans-serif" font-size="13">${escapeXml(opt.xLabel)}</text>`,
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${escapeXml(opt.yLabel)}</text>`,
  );

  seeds.forEach((seed, i) => {
    const pts = panel.series.get(seed)!;
    const kept = opt.logY ? pts.filter((p) => p.value > 0) : pts;
    if (kept.length === 0) return;
    const path = kept
      .map((p) => `${xScale(p.t).toFixed(2)},${yScale(p.value).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline fill="none" stroke="${PALETTE[i % PALETTE.length]}" stroke-width="1.2" opacity="0.85" points="${path}"><title>seed ${escapeXml(seed)}</title></polyline>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
