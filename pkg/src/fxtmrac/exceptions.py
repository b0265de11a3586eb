"""Exception hierarchy for the toolkit."""


class FxtMracError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(FxtMracError, ValueError):
    """Raised when an argument violates a documented precondition."""


class DesignError(FxtMracError):
    """Raised when a controller design step cannot produce a valid artifact."""


class C1DegenerateError(DesignError):
    """``L - I`` is singular, so ``K_0 = Y (L - I)^{-1}`` does not exist."""


class InvalidAuxiliaryConstants(DesignError):
    """The settling-time constant ``p`` is not positive for the chosen ``c, z``."""


class SynthesisFailed(DesignError):
    """The LMI search exhausted its budget without a verified solution."""


class BisectionError(FxtMracError):
    """The canonical-norm level function could not be bracketed."""


class PhaseError(FxtMracError):
    """A phase-specific controller operation was used in the wrong phase."""


class SimulationBlowUp(FxtMracError):
    """The integrated state became non-finite."""

    def __init__(self, message, row=None, t=None):
        super().__init__(message)
        self.row = row
        self.t = t
