"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid or mismatched parameters, or an unsupported configuration."""


class ParityError(ValueError):
    """An element has the wrong or a mixed Z/2 parity."""


class SingularityError(ValueError):
    """A matrix that must be invertible is singular."""


class NotSpecialError(ValueError):
    """A p-th power of a derivation is not of the form sum f_r D_r."""


class DomainError(ValueError):
    """An automorphism does not preserve the algebra it is applied to."""


class ReconstructionError(RuntimeError):
    """Recovering an automorphism of O from an automorphism of g failed."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SamplingError(RuntimeError):
    """The automorphism sampler gave up after its attempt budget."""


class ImportRejected(ValueError):
    """A structure-constant file is malformed or fails verification."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{message} (at {location})")
        self.message = message
        self.location = location


class VerificationFailure(AssertionError):
    """A structural identity did not hold; ``item`` names which one."""

    def __init__(self, item, message, degree=None):
        where = f"{item}" if degree is None else f"{item} at degree {degree}"
        super().__init__(f"{where}: {message}")
        self.item = item
        self.degree = degree
