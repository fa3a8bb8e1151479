"""Exception and warning types raised across the package.

Errors fall into two families so that callers (the command line in
particular) can tell bad input apart from numerical breakdown:

- :class:`InputError` for malformed data, arguments, or files;
- :class:`NumericError` for failures of the computation itself.
"""


class DeepeastError(Exception):
    """Base class for every error raised by this package."""


class InputError(DeepeastError, ValueError):
    """Invalid data, argument, or file contents."""


class NumericError(DeepeastError, ArithmeticError):
    """A computation could not be carried out on otherwise valid input."""


class InvalidSample(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class EmptyReference(InputError):
    pass


class SingularCovariance(NumericError):
    pass


class InvalidQPlus(InputError):
    pass


class InvalidAlpha(InputError):
    pass


class BlockSizeMismatch(InputError):
    pass


class PermutedDepthFailure(NumericError):
    """A depth evaluation failed on a permuted reassembly of the samples."""

    def __init__(self, replicate, cause):
        self.replicate = replicate
        self.cause = cause
        super().__init__(f"depth evaluation failed on permutation replicate {replicate}: {cause}")


class QuadratureNonConvergence(NumericError):
    pass


class ScenarioConfigError(InputError):
    pass


class ParseError(InputError):
    pass


class NonMonotoneWavenumbers(InputError):
    pass


class NegativeIntensity(InputError):
    pass


class WindowOutOfRange(InputError):
    pass


class NonPositiveForLog(InputError):
    pass


class AlphaOutOfRange(InputError):
    pass


class NegativeIntensityWarning(UserWarning):
    pass


class DegenerateRegressionWarning(UserWarning):
    pass


class DegenerateBlockWarning(UserWarning):
    """Fewer than four permutation blocks; the test cannot reject."""
