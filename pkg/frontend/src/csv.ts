/** Minimal CSV reader for the results files the harness emits: comma
 * separated, no quoting, first line is the header. */

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("CSV is empty");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(
        `row ${i + 1} has ${cells.length} cells, header has ${header.length}`,
      );
    }
    return cells;
  });
  return { header, rows };
}
