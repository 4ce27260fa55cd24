/**
 * FMX binary feature files.
 *
 * Layout (all multi-byte integers little-endian):
 *   "FMX1" | u32 n | u32 d | u32 c | f32 features row-major
 *   | u16 labels (present iff c > 0)
 *   | u32 meta_len + "name\n" per class (present iff names given)
 *
 * The analysis toolkit is the format owner; this encoder reproduces its
 * bytes exactly so downstream diffs stay empty.
 */

import {
  BadSpecError,
  LabelOutOfRangeError,
  NonFiniteError,
  ShapeMismatchError,
} from "./errors.js";

const FMX_MAGIC = "FMX1";
const MAX_CLASSES = 0xffff + 1;

export interface FmxArrays {
  features: readonly (readonly number[])[];
  labels?: readonly number[] | null;
  classNames?: readonly string[] | null;
  numClasses?: number | null;
  /** Column count for matrices with zero rows, where it cannot be measured. */
  width?: number | null;
}

/** Row length of a rectangular 2-D array, or throw. */
export function checkRectangular(
  rows: readonly (readonly number[])[],
  what: string,
): number {
  const d = rows.length > 0 ? rows[0].length : 0;
  for (const row of rows) {
    if (row.length !== d) {
      throw new ShapeMismatchError(`${what} rows have uneven lengths (${row.length} vs ${d})`);
    }
  }
  return d;
}

/** Reject values that are non-finite now or become non-finite as f32. */
export function checkFinite32(rows: readonly (readonly number[])[], what: string): void {
  for (let i = 0; i < rows.length; i++) {
    const row = rows[i];
    for (let j = 0; j < row.length; j++) {
      const v = row[j];
      if (!Number.isFinite(v) || !Number.isFinite(Math.fround(v))) {
        throw new NonFiniteError(`${what}[${i}][${j}] = ${v} is not finite as a 32-bit float`);
      }
    }
  }
}

/** Serialize features (+ optional labels and class names) to FMX bytes. */
export function encodeFmx(arrays: FmxArrays): Buffer {
  const { features } = arrays;
  const labels = arrays.labels ?? null;
  const classNames = arrays.classNames ?? null;

  const n = features.length;
  const measured = checkRectangular(features, "features");
  let d = measured;
  if (arrays.width !== undefined && arrays.width !== null) {
    if (n > 0 && arrays.width !== measured) {
      throw new ShapeMismatchError(`width ${arrays.width} but rows have ${measured} columns`);
    }
    d = arrays.width;
  }
  checkFinite32(features, "features");

  let c: number;
  if (arrays.numClasses === undefined || arrays.numClasses === null) {
    if (labels === null) {
      c = 0;
    } else if (classNames !== null) {
      c = classNames.length;
    } else {
      c = labels.length > 0 ? Math.max(...labels) + 1 : 1;
    }
  } else {
    c = arrays.numClasses;
  }

  if (labels !== null && c === 0) {
    throw new BadSpecError("labels supplied but numClasses is 0");
  }
  if (labels === null && c !== 0) {
    throw new BadSpecError("numClasses > 0 but no labels supplied");
  }
  if (classNames !== null) {
    if (labels === null) {
      throw new BadSpecError("class names require labels");
    }
    if (classNames.length !== c) {
      throw new ShapeMismatchError(`${classNames.length} names for ${c} classes`);
    }
  }
  if (c > MAX_CLASSES) {
    throw new BadSpecError("labels limited to 16-bit storage");
  }

  if (labels !== null) {
    if (labels.length !== n) {
      throw new ShapeMismatchError(`labels shape (${labels.length},) for ${n} rows`);
    }
    for (const lab of labels) {
      if (!Number.isInteger(lab) || lab < 0 || lab >= c) {
        throw new LabelOutOfRangeError(`labels must lie in [0, ${c})`);
      }
    }
  }

  const meta =
    classNames !== null ? Buffer.from(classNames.map((name) => name + "\n").join(""), "utf-8") : null;
  let size = 16 + 4 * n * d;
  if (labels !== null) size += 2 * n;
  if (meta !== null) size += 4 + meta.length;

  const out = Buffer.alloc(size);
  const view = new DataView(out.buffer, out.byteOffset, out.length);
  out.write(FMX_MAGIC, 0, "ascii");
  view.setUint32(4, n, true);
  view.setUint32(8, d, true);
  view.setUint32(12, c, true);

  let pos = 16;
  for (const row of features) {
    for (const v of row) {
      view.setFloat32(pos, v, true);
      pos += 4;
    }
  }
  if (labels !== null) {
    for (const lab of labels) {
      view.setUint16(pos, lab, true);
      pos += 2;
    }
  }
  if (meta !== null) {
    view.setUint32(pos, meta.length, true);
    pos += 4;
    meta.copy(out, pos);
    pos += meta.length;
  }
  return out;
}
