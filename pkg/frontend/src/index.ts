export { parseCsv } from "./csv.js";
export { extractPanel, extractPanels } from "./extract.js";
export type { GroupKey, Panel, SeriesPoint } from "./extract.js";
export { renderFig1 } from "./render.js";
export type { RenderOptions } from "./render.js";
export { DEFAULT_OPTIONS, renderPanelSvg } from "./svg.js";
export type { PanelOptions } from "./svg.js";
