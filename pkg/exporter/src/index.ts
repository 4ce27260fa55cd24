export { encodeFmx, checkRectangular, checkFinite32 } from "./fmx.js";
export type { FmxArrays } from "./fmx.js";
export { formatHeadFile } from "./head.js";
export { parseJob, loadJob, validateJob, runExport } from "./job.js";
export type { ExportJob } from "./job.js";
export {
  BadSpecError,
  LabelOutOfRangeError,
  NonFiniteError,
  ShapeMismatchError,
} from "./errors.js";
