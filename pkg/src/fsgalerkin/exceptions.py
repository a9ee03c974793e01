"""Exception hierarchy shared across the package."""


class FSGalerkinError(Exception):
    """Base class for all package errors."""


class ParameterError(FSGalerkinError, ValueError):
    """A parameter lies outside its admissible range."""


class DomainError(FSGalerkinError, ValueError):
    """An evaluation point lies outside the domain of the operation."""


class RangeError(FSGalerkinError, OverflowError):
    """The result would overflow double precision."""


class InsufficientDataError(FSGalerkinError, ValueError):
    """Too few samples or points to carry out the computation."""


class ShapeError(FSGalerkinError, ValueError):
    """Array dimensions do not match."""


class ConfigurationError(FSGalerkinError, ValueError):
    """A problem or run configuration is inconsistent."""


class ConvergenceError(FSGalerkinError, RuntimeError):
    """Picard iteration failed although the contraction condition holds."""
