"""Exception types shared across the package."""


class ScatdecayError(Exception):
    """Base class for all package-specific errors."""


class BudgetExceededError(ScatdecayError):
    """Requested scattering tree exceeds the depth/breadth safety budget."""

    def __init__(self, message: str, estimated_paths: int | None = None):
        super().__init__(message)
        self.estimated_paths = estimated_paths


class NonTightBankError(ScatdecayError):
    """Filter pair does not partition energy, so exact balance is undefined."""


class CoverageHoleError(ScatdecayError):
    """A dyadic sum vanishes inside the requested frequency range."""


class DegenerateOctaveError(ScatdecayError):
    """Octave mass is concentrated at a point; decay constants collapse."""


class WeakAsymmetryError(ScatdecayError):
    """No strict analytic preference between +/- frequencies; c <= 0."""


class VanishingOrderError(ScatdecayError):
    """Mother wavelet lacks the near-zero decay order the bounds require."""


class BankConditionError(ScatdecayError):
    """A hard filter-bank condition failed during precondition checks."""
