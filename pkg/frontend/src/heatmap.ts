/** (c, c_d) gain-sweep heatmaps from the `c,c_d,e_s_mean,n_diverged` schema. */
import { column, expectColumns, parseCsv, SchemaError } from "./csv.js";
import { colormap, fmt, svgDocument, text, tickLabel } from "./svg.js";

const SWEEP_SCHEMA = ["c", "c_d", "e_s_mean", "n_diverged"];

export interface HeatmapOptions {
  logZ?: boolean;
}

interface Grid {
  cs: number[];
  cds: number[];
  values: number[][]; // [ci][cdi], NaN where every run diverged
  diverged: number[][];
}

function toGrid(csvText: string): Grid {
  const table = parseCsv(csvText);
  expectColumns(table.header, SWEEP_SCHEMA);
  const c = column(table, "c");
  const cd = column(table, "c_d");
  const es = column(table, "e_s_mean");
  const nd = column(table, "n_diverged");
  const cs = [...new Set(c)].sort((a, b) => a - b);
  const cds = [...new Set(cd)].sort((a, b) => a - b);
  if (cs.length * cds.length !== table.rows.length) {
    throw new SchemaError(
      `expected a full ${cs.length}x${cds.length} grid, got ${table.rows.length} rows`,
    );
  }
  const values = cs.map(() => cds.map(() => NaN));
  const diverged = cs.map(() => cds.map(() => 0));
  for (let r = 0; r < table.rows.length; r++) {
    const ci = cs.indexOf(c[r]);
    const cdi = cds.indexOf(cd[r]);
    values[ci][cdi] = es[r];
    diverged[ci][cdi] = nd[r];
  }
  return { cs, cds, values, diverged };
}

/**
 * Render a sweep CSV as a heatmap: c along x, c_d along y (origin bottom
 * left), cell color = mean steady-state sync error. Cells where every run
 * diverged (e_s = nan) are crosshatched instead of colored.
 */
export function renderHeatmap(csvText: string, opts: HeatmapOptions = {}): string {
  const grid = toGrid(csvText);
  const margin = { left: 70, right: 90, top: 30, bottom: 50 };
  const cell = 36;
  const plotW = grid.cs.length * cell;
  const plotH = grid.cds.length * cell;
  const width = margin.left + plotW + margin.right;
  const height = margin.top + plotH + margin.bottom;

  const finite = grid.values.flat().filter((v) => Number.isFinite(v));
  const transform = (v: number) => (opts.logZ ? Math.log10(Math.max(v, 1e-300)) : v);
  let lo = 0;
  let hi = 1;
  if (finite.length > 0) {
    const tv = finite.map(transform);
    lo = Math.min(...tv);
    hi = Math.max(...tv);
    if (hi === lo) hi = lo + 1;
  }
  const scale = (v: number) => (transform(v) - lo) / (hi - lo);

  const parts: string[] = [];
  parts.push(
    `<defs><pattern id="divergent" width="6" height="6" patternUnits="userSpaceOnUse">` +
      `<rect width="6" height="6" fill="#f2f2f2"/>` +
      `<path d="M0,6 L6,0 M-1,1 L1,-1 M5,7 L7,5" stroke="#c00000" stroke-width="1.2"/>` +
      `</pattern></defs>`,
  );

  for (let ci = 0; ci < grid.cs.length; ci++) {
    for (let cdi = 0; cdi < grid.cds.length; cdi++) {
      const x = margin.left + ci * cell;
      const y = margin.top + (grid.cds.length - 1 - cdi) * cell;
      const v = grid.values[ci][cdi];
      const isDivergent = !Number.isFinite(v);
      const fill = isDivergent ? "url(#divergent)" : colormap(scale(v));
      const cls = isDivergent ? "cell divergent" : "cell";
      const title = isDivergent
        ? `c=${grid.cs[ci]}, c_d=${grid.cds[cdi]}: diverged`
        : `c=${grid.cs[ci]}, c_d=${grid.cds[cdi]}: e_s=${v}`;
      parts.push(
        `<rect class="${cls}" x="${fmt(x)}" y="${fmt(y)}" width="${cell}" height="${cell}" ` +
          `fill="${fill}" stroke="white" stroke-width="0.5"><title>${title}</title></rect>`,
      );
    }
  }

  // axis tick labels at every grid line (the grids are small)
  for (let ci = 0; ci < grid.cs.length; ci++) {
    const x = margin.left + (ci + 0.5) * cell;
    parts.push(text(x, margin.top + plotH + 16, tickLabel(grid.cs[ci]), { anchor: "middle", size: 10 }));
  }
  for (let cdi = 0; cdi < grid.cds.length; cdi++) {
    const y = margin.top + (grid.cds.length - 1 - cdi + 0.5) * cell + 4;
    parts.push(text(margin.left - 8, y, tickLabel(grid.cds[cdi]), { anchor: "end", size: 10 }));
  }
  parts.push(text(margin.left + plotW / 2, margin.top + plotH + 36, "c", { anchor: "middle" }));
  parts.push(text(margin.left - 45, margin.top + plotH / 2, "c_d", { anchor: "middle", rotate: true }));
  const zLabel = opts.logZ ? "log10 e_s (trailing mean)" : "e_s (trailing mean)";
  parts.push(text(margin.left + plotW / 2, 18, zLabel, { anchor: "middle" }));

  // colorbar
  const barX = margin.left + plotW + 20;
  const barW = 14;
  const nSeg = 32;
  for (let i = 0; i < nSeg; i++) {
    const y = margin.top + plotH - ((i + 1) * plotH) / nSeg;
    parts.push(
      `<rect x="${barX}" y="${fmt(y)}" width="${barW}" height="${fmt(plotH / nSeg + 0.5)}" ` +
        `fill="${colormap((i + 0.5) / nSeg)}"/>`,
    );
  }
  parts.push(text(barX + barW + 4, margin.top + 10, tickLabel(hi), { size: 9 }));
  parts.push(text(barX + barW + 4, margin.top + plotH, tickLabel(lo), { size: 9 }));
  if (grid.diverged.flat().some((n) => n > 0)) {
    const y = margin.top + plotH + 36;
    parts.push(
      `<rect x="${barX}" y="${fmt(y - 10)}" width="12" height="12" fill="url(#divergent)" stroke="#999"/>`,
    );
    parts.push(text(barX + 16, y, "diverged", { size: 9 }));
  }

  return svgDocument(width, height, parts.join("\n"));
}
