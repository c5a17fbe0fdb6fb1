"""Exception hierarchy shared by all modules."""


class NonsubError(Exception):
    """Base class for library errors."""


class ContractError(NonsubError, ValueError):
    """A documented precondition was violated by the caller."""


class OutOfRangeError(ContractError, IndexError):
    """An element index lies outside the ground set."""


class DomainError(ContractError):
    """A fractional point has a coordinate outside [0, 1]."""


class ParameterError(ContractError):
    """A numeric parameter is outside its admissible range."""


class CapacityError(NonsubError):
    """Exhaustive enumeration was requested beyond the size guard."""


class ProtocolError(NonsubError):
    """The delayed-feedback protocol was used out of order."""


class SolverError(NonsubError, ArithmeticError):
    """A least-squares factorization failed."""


class ConfigError(NonsubError, ValueError):
    """An experiment configuration is malformed; ``field`` names the key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
