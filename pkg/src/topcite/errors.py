"""Exception hierarchy.

Everything a caller can fix by changing its input derives from
:class:`ValidationError`; the CLI maps that family to exit code 2.
"""


class TopciteError(Exception):
    pass


class ValidationError(TopciteError, ValueError):
    pass


class DegenerateUnitError(ValidationError):
    """A research unit with no papers has no defined impact ratio."""


class DomainError(ValidationError):
    pass


class DegenerateSampleError(ValidationError):
    pass


class RankDeficiencyError(ValidationError):
    pass


class InsufficientPopulationError(ValidationError):
    """The requested percentile selects zero items of the population."""


class FormatError(ValidationError):
    pass
