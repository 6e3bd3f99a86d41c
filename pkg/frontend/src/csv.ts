/** Minimal strict CSV handling for the pwsnet output schemas. */

export class SchemaError extends Error {}

export interface Table {
  header: string[];
  /** Numeric rows; non-finite values (`nan`, `inf`) come through as NaN/Infinity. */
  rows: number[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((ln, i) => {
    const parts = ln.split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(
        `row ${i + 1} has ${parts.length} fields, header has ${header.length}`,
      );
    }
    return parts.map(Number);
  });
  return { header, rows };
}

/**
 * Check the header against an expected schema, reporting the exact column
 * diff. `expected` entries ending in `*` are prefixes matching any number of
 * trailing columns (used for the per-node state columns).
 */
export function expectColumns(header: string[], expected: string[]): void {
  const fixed = expected.filter((c) => !c.endsWith("*"));
  const prefixes = expected.filter((c) => c.endsWith("*")).map((c) => c.slice(0, -1));
  const missing = fixed.filter((c) => !header.includes(c));
  const unexpected = header.filter(
    (c) => !fixed.includes(c) && !prefixes.some((p) => c.startsWith(p)),
  );
  if (missing.length > 0 || unexpected.length > 0) {
    const parts: string[] = [];
    if (missing.length > 0) parts.push(`missing: ${missing.join(", ")}`);
    if (unexpected.length > 0) parts.push(`unexpected: ${unexpected.join(", ")}`);
    throw new SchemaError(
      `CSV columns do not match schema [${expected.join(", ")}] — ${parts.join("; ")}`,
    );
  }
}

export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`no column named ${name}`);
  }
  return table.rows.map((r) => r[idx]);
}
