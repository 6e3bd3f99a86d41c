#!/usr/bin/env node
/** figviz command line: render <kind> <in.csv> <out.svg> [--log-z]. */
import { readFileSync, writeFileSync } from "fs";
import { SchemaError } from "./csv.js";
import { renderHeatmap } from "./heatmap.js";
import { renderErrorCurve, renderTimeseries } from "./timeseries.js";

const KINDS = ["timeseries", "error_curve", "heatmap"] as const;
type Kind = (typeof KINDS)[number];

export function render(kind: Kind, csvText: string, logZ: boolean): string {
  switch (kind) {
    case "timeseries":
      return renderTimeseries(csvText);
    case "error_curve":
      return renderErrorCurve(csvText);
    case "heatmap":
      return renderHeatmap(csvText, { logZ });
  }
}

export function main(argv: string[]): number {
  const flags = argv.filter((a) => a.startsWith("--"));
  const positional = argv.filter((a) => !a.startsWith("--"));
  const logZ = flags.includes("--log-z");
  const unknown = flags.filter((f) => f !== "--log-z");
  if (positional[0] !== "render" || positional.length !== 4 || unknown.length > 0) {
    process.stderr.write(
      `usage: figviz render <${KINDS.join("|")}> <in.csv> <out.svg> [--log-z]\n`,
    );
    return 2;
  }
  const [, kind, inPath, outPath] = positional;
  if (!(KINDS as readonly string[]).includes(kind)) {
    process.stderr.write(`unknown figure kind '${kind}'; expected one of ${KINDS.join(", ")}\n`);
    return 2;
  }
  let csvText: string;
  try {
    csvText = readFileSync(inPath, "utf8");
  } catch (err) {
    process.stderr.write(`cannot read ${inPath}: ${(err as Error).message}\n`);
    return 2;
  }
  try {
    writeFileSync(outPath, render(kind as Kind, csvText, logZ));
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
