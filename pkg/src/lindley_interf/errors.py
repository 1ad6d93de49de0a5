"""Exception hierarchy shared across the package."""


class LindleyError(Exception):
    """Base class for all errors raised by lindley_interf."""


class NumericalError(LindleyError):
    """A numerical procedure could not produce a trustworthy value."""


class NonConvergence(NumericalError):
    """Adaptive quadrature exhausted its evaluation budget."""


class Indeterminate(NumericalError):
    """Both hypotheses assign zero likelihood to the observed outcome."""


class DivergentSensitivity(NumericalError):
    """The mean signal is flat at the working point, so the phase error blows up."""


class ConfigError(LindleyError, ValueError):
    """A configuration value violates a model invariant."""
