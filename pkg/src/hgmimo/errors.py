"""Exception classes shared across the package."""


class HgMimoError(Exception):
    """Base class for all errors raised by hgmimo."""


class DomainError(HgMimoError, ValueError):
    """An argument lies outside the domain of a numerical routine."""


class DimensionError(HgMimoError, ValueError):
    """Matrix or vector shapes do not agree."""


class ConfigError(HgMimoError, ValueError):
    """A scenario configuration field is missing or invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
