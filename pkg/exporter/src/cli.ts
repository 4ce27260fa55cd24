/**
 * Command line entry.
 *
 * fmx-export --job job.json --features-out run.fmx --head-out head.txt
 *
 * Exit codes follow the toolkit convention: 0 success, 1 named export
 * failure, 2 usage problems (bad flags, unreadable or malformed job file).
 */

import { parseArgs } from "node:util";

import { loadJob, runExport } from "./job.js";

const USAGE =
  "usage: fmx-export --job <job.json> --features-out <file.fmx> --head-out <file.txt>";

export async function main(argv: string[]): Promise<number> {
  let values: { job?: string; "features-out"?: string; "head-out"?: string };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        job: { type: "string" },
        "features-out": { type: "string" },
        "head-out": { type: "string" },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 2;
  }
  const jobPath = values.job;
  const featuresOut = values["features-out"];
  const headOut = values["head-out"];
  if (!jobPath || !featuresOut || !headOut) {
    console.error(USAGE);
    return 2;
  }

  let job;
  try {
    job = await loadJob(jobPath);
  } catch (err) {
    if (err instanceof SyntaxError || (err as NodeJS.ErrnoException).code !== undefined) {
      console.error(`cannot read job file ${jobPath}: ${(err as Error).message}`);
      return 2;
    }
    return report(err);
  }

  try {
    await runExport(job, featuresOut, headOut);
  } catch (err) {
    return report(err);
  }
  console.log(`features -> ${featuresOut}`);
  console.log(`head -> ${headOut}`);
  return 0;
}

function report(err: unknown): number {
  if (err instanceof Error) {
    const label = err.name.endsWith("Error") ? err.name.slice(0, -"Error".length) : err.name;
    console.error(`${label}: ${err.message}`);
    return 1;
  }
  throw err;
}
