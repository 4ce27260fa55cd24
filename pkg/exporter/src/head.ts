/**
 * Plain-text classifier head files: magic line, "C d" sizes, C class
 * names, C weight rows, one bias row.  Values are shortest round-trip
 * decimals, which any strtod-style reader parses back to the same double.
 */

import { BadSpecError, NonFiniteError, ShapeMismatchError } from "./errors.js";

const HEAD_MAGIC = "HEAD1";

export function formatHeadFile(
  weights: readonly (readonly number[])[],
  bias: readonly number[],
  classNames: readonly string[],
): string {
  const rows = weights.length;
  const cols = rows > 0 ? weights[0].length : 0;
  for (const row of weights) {
    if (row.length !== cols) {
      throw new ShapeMismatchError(`head W rows have uneven lengths (${row.length} vs ${cols})`);
    }
  }
  if (bias.length !== rows) {
    throw new ShapeMismatchError(`head W (${rows}, ${cols}) vs b (${bias.length},)`);
  }
  if (classNames.length !== rows) {
    throw new ShapeMismatchError(`${classNames.length} names for ${rows} rows`);
  }
  for (const name of classNames) {
    if (name === "" || name.includes("\n")) {
      throw new BadSpecError(`bad class name ${JSON.stringify(name)}`);
    }
  }
  const scalar = (v: number, what: string): string => {
    if (!Number.isFinite(v)) {
      throw new NonFiniteError(`${what} contains non-finite value ${v}`);
    }
    return String(v);
  };

  const lines = [HEAD_MAGIC, `${rows} ${cols}`];
  lines.push(...classNames);
  for (const row of weights) {
    lines.push(row.map((v) => scalar(v, "head W")).join(" "));
  }
  lines.push(bias.map((v) => scalar(v, "head b")).join(" "));
  return lines.join("\n") + "\n";
}
