/** Trajectory figures from the `t,e_s[,x_1_1,...,x_N_n]` schema. */
import { column, expectColumns, parseCsv, SchemaError, Table } from "./csv.js";
import { fmt, niceTicks, polyline, SERIES_COLORS, svgDocument, text, tickLabel } from "./svg.js";

const WIDTH = 640;
const PANEL_H = 200;
const MARGIN = { left: 70, right: 20, top: 24, bottom: 42 };

interface Panel {
  title: string;
  yLabel: string;
  series: Array<{ name: string; ys: number[] }>;
  logY: boolean;
}

function panelSvg(panel: Panel, ts: number[], yOffset: number): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = PANEL_H - MARGIN.top - MARGIN.bottom;
  const x0 = MARGIN.left;
  const y0 = yOffset + MARGIN.top;

  const tLo = Math.min(...ts);
  const tHi = Math.max(...ts);
  const transform = (v: number) => (panel.logY ? Math.log10(Math.max(v, 1e-300)) : v);
  const allY = panel.series.flatMap((s) => s.ys).filter((v) => Number.isFinite(v));
  let yLo = Math.min(...allY.map(transform));
  let yHi = Math.max(...allY.map(transform));
  if (!(yHi > yLo)) {
    yLo -= 1;
    yHi += 1;
  }
  const sx = (t: number) => x0 + ((t - tLo) / (tHi - tLo || 1)) * plotW;
  const sy = (v: number) => y0 + plotH - ((transform(v) - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(`<g class="panel">`);
  parts.push(
    `<rect x="${x0}" y="${y0}" width="${plotW}" height="${plotH}" fill="none" stroke="#444"/>`,
  );
  for (const tv of niceTicks(tLo, tHi)) {
    const x = sx(tv);
    parts.push(`<line x1="${fmt(x)}" y1="${fmt(y0 + plotH)}" x2="${fmt(x)}" y2="${fmt(y0 + plotH + 4)}" stroke="#444"/>`);
    parts.push(text(x, y0 + plotH + 16, tickLabel(tv), { anchor: "middle", size: 9 }));
  }
  const yTicks = panel.logY
    ? niceTicks(Math.floor(yLo), Math.ceil(yHi), 5).map((e) => e)
    : niceTicks(yLo, yHi);
  for (const tv of yTicks) {
    if (tv < yLo - 1e-9 || tv > yHi + 1e-9) continue;
    const y = y0 + plotH - ((tv - yLo) / (yHi - yLo)) * plotH;
    parts.push(`<line x1="${fmt(x0 - 4)}" y1="${fmt(y)}" x2="${fmt(x0)}" y2="${fmt(y)}" stroke="#444"/>`);
    const label = panel.logY ? `1e${tickLabel(tv)}` : tickLabel(tv);
    parts.push(text(x0 - 6, y + 3, label, { anchor: "end", size: 9 }));
  }
  panel.series.forEach((s, i) => {
    const pts: Array<[number, number]> = [];
    for (let k = 0; k < ts.length; k++) {
      if (Number.isFinite(s.ys[k])) pts.push([sx(ts[k]), sy(s.ys[k])]);
    }
    parts.push(polyline(pts, SERIES_COLORS[i % SERIES_COLORS.length]));
  });
  parts.push(text(x0, y0 - 8, panel.title, { size: 11 }));
  parts.push(text(x0 - 48, y0 + plotH / 2, panel.yLabel, { anchor: "middle", rotate: true }));
  parts.push(text(x0 + plotW / 2, y0 + plotH + 32, "t", { anchor: "middle" }));
  parts.push(`</g>`);
  return parts.join("\n");
}

function stateColumns(table: Table): string[] {
  return table.header.filter((c) => /^x_\d+_\d+$/.test(c));
}

/**
 * Two-panel figure: per-node state components on top, synchronization
 * error (log scale) below.
 */
export function renderTimeseries(csvText: string): string {
  const table = parseCsv(csvText);
  expectColumns(table.header, ["t", "e_s", "x_*"]);
  const states = stateColumns(table);
  if (states.length === 0) {
    throw new SchemaError("trajectory CSV has no x_i_h state columns; use the error_curve kind");
  }
  const ts = column(table, "t");
  const top: Panel = {
    title: "node states",
    yLabel: "x",
    series: states.map((name) => ({ name, ys: column(table, name) })),
    logY: false,
  };
  const bottom: Panel = {
    title: "synchronization error",
    yLabel: "e_s",
    series: [{ name: "e_s", ys: column(table, "e_s") }],
    logY: true,
  };
  const body = panelSvg(top, ts, 0) + "\n" + panelSvg(bottom, ts, PANEL_H);
  return svgDocument(WIDTH, 2 * PANEL_H, body);
}

/** Single-panel synchronization-error curve (log scale). */
export function renderErrorCurve(csvText: string): string {
  const table = parseCsv(csvText);
  expectColumns(table.header, ["t", "e_s", "x_*"]);
  const ts = column(table, "t");
  const panel: Panel = {
    title: "synchronization error",
    yLabel: "e_s",
    series: [{ name: "e_s", ys: column(table, "e_s") }],
    logY: true,
  };
  return svgDocument(WIDTH, PANEL_H, panelSvg(panel, ts, 0));
}
