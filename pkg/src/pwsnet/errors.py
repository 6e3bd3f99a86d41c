"""Exception hierarchy shared by all pwsnet modules."""


class PwsnetError(Exception):
    """Base class for all pwsnet errors."""


class ParameterError(PwsnetError):
    """An input value violates a documented precondition."""


class SymmetryError(ParameterError):
    """A matrix required to be symmetric is not."""


class ConnectivityError(PwsnetError):
    """A random graph could not be made connected within the retry cap."""


class HypothesisViolationError(PwsnetError):
    """A theorem hypothesis does not hold for the supplied matrices."""


class DivergenceError(PwsnetError):
    """A trajectory left the admissible region (norm overflow / NaN).

    Carries the time at which the blow-up was detected.
    """

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class ConfigError(PwsnetError):
    """An experiment config file is malformed or inconsistent."""
