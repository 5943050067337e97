"""Exception types shared across the package."""


class RmkitError(Exception):
    """Base class for errors raised by this package."""


class CapacityError(RmkitError):
    """An operation would exceed a configured size limit."""


class ConfigError(RmkitError):
    """Invalid experiment or solver configuration.

    ``path`` locates the offending field, e.g. ``algorithms[1].floor``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class GameFormatError(RmkitError):
    """A game file could not be parsed or failed validation."""


class UnsupportedModeError(RmkitError):
    """A mode was requested that the given game cannot support."""
