/**
 * Export jobs: one labeled embedding matrix plus its classifier head,
 * bound for an FMX feature file and a head text file.
 */

import { readFile, writeFile } from "node:fs/promises";

import { ShapeMismatchError } from "./errors.js";
import { checkRectangular, encodeFmx } from "./fmx.js";
import { formatHeadFile } from "./head.js";

export interface ExportJob {
  features: number[][];
  labels: number[];
  classNames: string[];
  headWeights: number[][];
  headBias: number[];
}

/** Cross-check every shape in the job against every other. */
export function validateJob(job: ExportJob): void {
  const n = job.features.length;
  const d = checkRectangular(job.features, "features");
  if (job.labels.length !== n) {
    throw new ShapeMismatchError(`${job.labels.length} labels for ${n} feature rows`);
  }
  const c = job.classNames.length;
  if (job.headWeights.length !== c) {
    throw new ShapeMismatchError(`head W has ${job.headWeights.length} rows for ${c} classes`);
  }
  const wCols = checkRectangular(job.headWeights, "head W");
  if (job.headWeights.length > 0 && wCols !== d) {
    throw new ShapeMismatchError(`head W width ${wCols} vs feature width ${d}`);
  }
  if (job.headBias.length !== c) {
    throw new ShapeMismatchError(`head b has ${job.headBias.length} entries for ${c} classes`);
  }
}

function requireArray(value: unknown, what: string): unknown[] {
  if (!Array.isArray(value)) {
    throw new ShapeMismatchError(`job field ${what} must be an array`);
  }
  return value;
}

function numberMatrix(value: unknown, what: string): number[][] {
  return requireArray(value, what).map((row, i) =>
    requireArray(row, `${what}[${i}]`).map((v) => {
      if (typeof v !== "number") {
        throw new ShapeMismatchError(`${what} must contain only numbers`);
      }
      return v;
    }),
  );
}

function numberVector(value: unknown, what: string): number[] {
  return requireArray(value, what).map((v) => {
    if (typeof v !== "number") {
      throw new ShapeMismatchError(`${what} must contain only numbers`);
    }
    return v;
  });
}

function stringVector(value: unknown, what: string): string[] {
  return requireArray(value, what).map((v) => {
    if (typeof v !== "string") {
      throw new ShapeMismatchError(`${what} must contain only strings`);
    }
    return v;
  });
}

/** Parse a JSON array container into a job; shapes are not yet validated. */
export function parseJob(text: string): ExportJob {
  const raw: unknown = JSON.parse(text);
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ShapeMismatchError("job container must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  return {
    features: numberMatrix(obj.features, "features"),
    labels: numberVector(obj.labels, "labels"),
    classNames: stringVector(obj.class_names, "class_names"),
    headWeights: numberMatrix(obj.head_weights, "head_weights"),
    headBias: numberVector(obj.head_bias, "head_bias"),
  };
}

export async function loadJob(path: string): Promise<ExportJob> {
  return parseJob(await readFile(path, "utf-8"));
}

/** Validate, then write the FMX file and the head text file. */
export async function runExport(
  job: ExportJob,
  featuresPath: string,
  headPath: string,
): Promise<void> {
  validateJob(job);
  const fmx = encodeFmx({
    features: job.features,
    labels: job.labels,
    classNames: job.classNames,
  });
  const head = formatHeadFile(job.headWeights, job.headBias, job.classNames);
  await writeFile(featuresPath, fmx);
  await writeFile(headPath, head, "utf-8");
}
