"""Exception hierarchy shared by every module."""


class DimconsError(Exception):
    """Base class for all errors raised by this package."""


class SpecMismatchError(DimconsError, ValueError):
    """Operands live in different groups (rank mismatch)."""


class UnsupportedBaseError(DimconsError, ValueError):
    """Gromov product with a boundary argument requested at a non-identity base."""


class IndeterminateError(DimconsError):
    """A boundary approximation is too shallow to decide the question exactly."""


class UnsupportedSpecError(DimconsError, ValueError):
    """The requested method does not apply to this measure."""


class SamplingError(DimconsError):
    """Sampling budget exhausted; retrying with a larger budget may succeed."""

    retryable = True


class DepthExhaustedError(IndeterminateError):
    """A conditioned walk ran past the depth of its target boundary point."""


class NoCertificateError(DimconsError):
    """No Schottky set could be certified inside the searched support."""


class ConstantViolationError(DimconsError, ValueError):
    """Pivotal constants violate the required inequalities."""


class EnumerationBudgetError(DimconsError):
    """Full enumeration would exceed the configured budget."""


class ConfigError(DimconsError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
