"""Exception types shared across the package."""


class HrrplenError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HrrplenError):
    """A run configuration is malformed; the message names the offending key."""


class NonPositiveLabelError(HrrplenError):
    """The label model produced a radial length <= 0 for the requested aspect."""


class AliasedTargetError(HrrplenError):
    """Projected scatterer extent exceeds the unambiguous range window."""


class DegenerateSequenceError(HrrplenError):
    """A constant sequence cannot be rescaled; it carries no shape information."""


class NoTargetDetectedError(HrrplenError):
    """No range bin exceeds the detection threshold."""


class NonPositiveTruthError(HrrplenError):
    """A relative-error denominator (true radial length) is not positive."""


class ShapeMismatchError(HrrplenError):
    """An array does not have the shape a layer or loss expects."""


class NoForwardStateError(HrrplenError):
    """backward() was called without a preceding training-mode forward pass."""


class DivergedTrainingError(HrrplenError):
    """Training produced a non-finite loss."""
