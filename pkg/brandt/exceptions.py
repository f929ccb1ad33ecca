class BrandtError(Exception):
    """Base class for every error raised by the brandt app."""


class DefinitenessError(BrandtError):
    """A quadratic form expected to be positive definite is not."""


class PlaceError(BrandtError):
    """A place argument is neither a prime nor infinity."""


class InvalidDiscriminantError(BrandtError):
    """The requested discriminant cannot be that of a definite algebra over Q."""


class OrderConstructionError(BrandtError):
    """An order cannot be built from the given parameters."""


class IdealError(BrandtError):
    """An ideal operation received incompatible or degenerate input."""


class BudgetExceededError(BrandtError):
    """The class set search visited more ideals than the configured budget."""


class MassMismatchError(BrandtError):
    """The class set disagrees with the mass formula."""


class ConsistencyError(BrandtError):
    """An exact identity that must hold failed; this falsifies a prediction."""


class CoverageError(BrandtError):
    """The fixture database lacks levels needed for a prediction."""

    def __init__(self, missing_levels):
        self.missing_levels = sorted(missing_levels)
        levels = ', '.join(str(level) for level in self.missing_levels)
        super().__init__(f"Fixture data missing for levels: {levels}")


class FixtureError(BrandtError):
    """A fixture file failed to parse or validate."""

    def __init__(self, problems):
        # problems: list of (line number, message)
        self.problems = list(problems)
        lines = '; '.join(f"line {number}: {message}" for number, message in self.problems)
        super().__init__(f"Invalid fixture data: {lines}")


class ParameterError(BrandtError):
    """Arguments outside the supported range of an operation."""
