"""Exception types shared across the toolkit.

Each class carries a stable ``name`` matching the contract-level error
identifier, so callers and the CLI can report the failing check by name.
"""


class ToolkitError(Exception):
    name = "ToolkitError"


class NonFiniteError(ToolkitError):
    name = "NonFinite"


class NoConvergenceError(ToolkitError):
    name = "NoConvergence"


class NotSymmetricError(ToolkitError):
    name = "NotSymmetric"


class ShapeMismatchError(ToolkitError):
    name = "ShapeMismatch"


class BadSpecError(ToolkitError):
    name = "BadSpec"


class BadClassError(ToolkitError):
    name = "BadClass"


class EmptyClassError(ToolkitError):
    name = "EmptyClass"


class EmptyPairError(ToolkitError):
    name = "EmptyPair"


class TooFewSamplesError(ToolkitError):
    name = "TooFewSamples"


class EmptyDatasetError(ToolkitError):
    name = "EmptyDataset"


class EmptyTrainingSetError(ToolkitError):
    name = "EmptyTrainingSet"


class MismatchedUniverseError(ToolkitError):
    name = "MismatchedUniverse"


class StepOutOfRangeError(ToolkitError):
    name = "StepOutOfRange"


class NonFiniteGradientError(ToolkitError):
    name = "NonFiniteGradient"


class BadMagicError(ToolkitError):
    name = "BadMagic"


class TruncatedError(ToolkitError):
    name = "Truncated"


class LabelOutOfRangeError(ToolkitError):
    name = "LabelOutOfRange"


class ManifestMismatchError(ToolkitError):
    name = "ManifestMismatch"


class IoFailureError(ToolkitError):
    name = "IoFailure"


class UsageError(ToolkitError):
    name = "UsageError"
