/** Named failures, mirroring the error vocabulary of the analysis toolkit. */

/** Arrays whose dimensions disagree with each other or with the format. */
export class ShapeMismatchError extends Error {
  override name = "ShapeMismatchError";
}

/** NaN or infinity where the output format requires finite values. */
export class NonFiniteError extends Error {
  override name = "NonFiniteError";
}

/** A label outside [0, num_classes). */
export class LabelOutOfRangeError extends Error {
  override name = "LabelOutOfRangeError";
}

/** A structurally impossible request, e.g. more classes than u16 can hold. */
export class BadSpecError extends Error {
  override name = "BadSpecError";
}
