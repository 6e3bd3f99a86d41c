import { execFileSync } from "child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { expectColumns, parseCsv, SchemaError } from "../src/csv.js";
import { renderHeatmap } from "../src/heatmap.js";
import { renderErrorCurve, renderTimeseries } from "../src/timeseries.js";

const FIXTURES = join(__dirname, "..", "fixtures");
const sweepBistable = readFileSync(join(FIXTURES, "sweep_bistable.csv"), "utf8");
const sweepDivergent = readFileSync(join(FIXTURES, "sweep_divergent.csv"), "utf8");
const trajectory = readFileSync(join(FIXTURES, "trajectory_two_node.csv"), "utf8");

function count(haystack: string, needle: RegExp): number {
  return (haystack.match(needle) ?? []).length;
}

describe("csv", () => {
  it("parses numbers including nan", () => {
    const t = parseCsv("a,b\n1,2\n3,nan\n");
    expect(t.header).toEqual(["a", "b"]);
    expect(t.rows[0]).toEqual([1, 2]);
    expect(Number.isNaN(t.rows[1][1])).toBe(true);
  });

  it("reports the exact column diff on schema mismatch", () => {
    expect(() => expectColumns(["c", "e_s_mean", "extra"], ["c", "c_d", "e_s_mean", "n_diverged"]))
      .toThrowError(/missing: c_d, n_diverged; unexpected: extra/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(SchemaError);
  });
});

describe("heatmap", () => {
  it("renders one cell per grid point from a real sweep", () => {
    const svg = renderHeatmap(sweepBistable, { logZ: true });
    // 5 x 4 grid in the fixture
    expect(count(svg, /class="cell/g)).toBe(20);
    expect(svg).toContain("</svg>");
  });

  it("marks divergent cells distinctly", () => {
    const svg = renderHeatmap(sweepDivergent, { logZ: true });
    const divergent = count(svg, /class="cell divergent"/g);
    const normal = count(svg, /class="cell"/g);
    expect(divergent).toBe(2); // two fully-diverged cells in the fixture
    expect(normal).toBe(2);
    expect(svg).toContain('fill="url(#divergent)"');
    // no colored cell uses the divergent fill
    expect(count(svg, /url\(#divergent\)/g)).toBeGreaterThanOrEqual(divergent);
  });

  it("renders a minimal 2x2 sweep", () => {
    const csv = "c,c_d,e_s_mean,n_diverged\n0,0,1.0,0\n0,1,0.5,0\n1,0,0.2,0\n1,1,0.001,0\n";
    const svg = renderHeatmap(csv);
    expect(svg.length).toBeGreaterThan(0);
    expect(count(svg, /class="cell"/g)).toBe(4);
  });

  it("rejects a wrong header with a column diff", () => {
    expect(() => renderHeatmap("c,cd,e_s\n0,0,1\n")).toThrowError(/missing: c_d/);
  });

  it("rejects an incomplete grid", () => {
    const csv = "c,c_d,e_s_mean,n_diverged\n0,0,1.0,0\n0,1,0.5,0\n1,0,0.2,0\n";
    expect(() => renderHeatmap(csv)).toThrowError(/full 2x2 grid/);
  });

  it("is byte-idempotent", () => {
    const a = renderHeatmap(sweepBistable, { logZ: true });
    const b = renderHeatmap(sweepBistable, { logZ: true });
    expect(a).toBe(b);
  });
});

describe("timeseries", () => {
  it("renders a two-panel figure from a trajectory CSV", () => {
    const svg = renderTimeseries(trajectory);
    expect(count(svg, /class="panel"/g)).toBe(2);
    expect(svg).toContain("node states");
    expect(svg).toContain("synchronization error");
    // one polyline per state column (6) plus one for e_s
    expect(count(svg, /<polyline /g)).toBe(7);
  });

  it("renders a single-panel error curve", () => {
    const svg = renderErrorCurve(trajectory);
    expect(count(svg, /class="panel"/g)).toBe(1);
    expect(count(svg, /<polyline /g)).toBe(1);
  });

  it("requires state columns for the two-panel kind", () => {
    expect(() => renderTimeseries("t,e_s\n0,1\n1,0.5\n")).toThrowError(/no x_i_h state columns/);
  });

  it("is byte-idempotent", () => {
    expect(renderTimeseries(trajectory)).toBe(renderTimeseries(trajectory));
  });
});

describe("cli", () => {
  const node = process.execPath;
  const cliJs = join(__dirname, "..", "dist", "cli.js");

  it("renders and re-renders byte-identically through the executable", () => {
    const dir = mkdtempSync(join(tmpdir(), "figviz-"));
    const out1 = join(dir, "a.svg");
    const out2 = join(dir, "b.svg");
    execFileSync(node, [cliJs, "render", "heatmap", join(FIXTURES, "sweep_bistable.csv"), out1, "--log-z"]);
    execFileSync(node, [cliJs, "render", "heatmap", join(FIXTURES, "sweep_bistable.csv"), out2, "--log-z"]);
    expect(readFileSync(out1)).toEqual(readFileSync(out2));
    const traj = join(dir, "traj.svg");
    execFileSync(node, [cliJs, "render", "timeseries", join(FIXTURES, "trajectory_two_node.csv"), traj]);
    expect(readFileSync(traj, "utf8")).toContain("</svg>");
  });

  it("exits 1 with a column diff on schema mismatch", () => {
    const dir = mkdtempSync(join(tmpdir(), "figviz-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "c,cd,e_s\n0,0,1\n");
    let code = 0;
    let stderr = "";
    try {
      execFileSync(node, [cliJs, "render", "heatmap", bad, join(dir, "out.svg")], { stdio: "pipe" });
    } catch (err: any) {
      code = err.status;
      stderr = String(err.stderr);
    }
    expect(code).toBe(1);
    expect(stderr).toMatch(/missing: c_d/);
  });

  it("exits 2 on usage errors", () => {
    let code = 0;
    try {
      execFileSync(node, [cliJs, "render", "piechart", "x.csv", "y.svg"], { stdio: "pipe" });
    } catch (err: any) {
      code = err.status;
    }
    expect(code).toBe(2);
  });
});
