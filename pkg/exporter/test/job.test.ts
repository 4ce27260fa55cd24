import { describe, expect, test } from "vitest";

import { ShapeMismatchError, parseJob, validateJob } from "../src/index.js";
import type { ExportJob } from "../src/index.js";

function goodJob(): ExportJob {
  return {
    features: [
      [1.0, 2.0],
      [3.0, 4.0],
      [5.0, 6.0],
    ],
    labels: [0, 1, 0],
    classNames: ["in", "out"],
    headWeights: [
      [0.1, -0.2],
      [0.3, 0.4],
    ],
    headBias: [0.0, -1.0],
  };
}

describe("job validation", () => {
  test("a consistent job passes", () => {
    expect(() => validateJob(goodJob())).not.toThrow();
  });

  test("label count must match the feature rows", () => {
    const job = goodJob();
    job.labels = [0, 1];
    expect(() => validateJob(job)).toThrow(ShapeMismatchError);
    expect(() => validateJob(job)).toThrow(/2 labels for 3 feature rows/);
  });

  test("head rows must match the class count", () => {
    const job = goodJob();
    job.headWeights = [[0.1, 0.2]];
    expect(() => validateJob(job)).toThrow(ShapeMismatchError);
  });

  test("head width must match the feature width", () => {
    const job = goodJob();
    job.headWeights = [
      [0.1, 0.2, 0.3],
      [0.4, 0.5, 0.6],
    ];
    expect(() => validateJob(job)).toThrow(/head W width 3 vs feature width 2/);
  });

  test("bias length must match the class count", () => {
    const job = goodJob();
    job.headBias = [0.0];
    expect(() => validateJob(job)).toThrow(ShapeMismatchError);
  });
});

describe("job parsing", () => {
  test("snake_case container fields map onto the job", () => {
    const job = parseJob(
      JSON.stringify({
        features: [[1, 2]],
        labels: [0],
        class_names: ["only"],
        head_weights: [[1, 1]],
        head_bias: [0],
      }),
    );
    expect(job.features).toEqual([[1, 2]]);
    expect(job.classNames).toEqual(["only"]);
  });

  test("non-object container is rejected", () => {
    expect(() => parseJob("[1,2,3]")).toThrow(ShapeMismatchError);
  });

  test("missing field is rejected", () => {
    expect(() => parseJob('{"features": [[1]]}')).toThrow(ShapeMismatchError);
  });

  test("strings inside a numeric field are rejected", () => {
    expect(() =>
      parseJob(
        JSON.stringify({
          features: [[1, "x"]],
          labels: [0],
          class_names: ["a"],
          head_weights: [[1, 1]],
          head_bias: [0],
        }),
      ),
    ).toThrow(/must contain only numbers/);
  });

  test("numbers inside class_names are rejected", () => {
    expect(() =>
      parseJob(
        JSON.stringify({
          features: [[1]],
          labels: [0],
          class_names: [7],
          head_weights: [[1]],
          head_bias: [0],
        }),
      ),
    ).toThrow(/must contain only strings/);
  });
});
