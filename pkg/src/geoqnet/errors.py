"""Exception types shared across the package."""


class GeoQNetError(Exception):
    """Base class for all package errors."""


class ConfigError(GeoQNetError, ValueError):
    """Invalid parameters or run configuration."""


class GeometryError(GeoQNetError, ValueError):
    """Malformed or non-simple region geometry."""


class FitError(GeoQNetError, RuntimeError):
    """A model fit failed; carries the last iterate when there is one."""

    def __init__(self, message, params=None, residual=None):
        super().__init__(message)
        self.params = params
        self.residual = residual


class NoPathError(GeoQNetError, LookupError):
    """Two nodes lie in different components."""


class UndefinedStatisticError(GeoQNetError, ValueError):
    """A statistic has no meaning on the given graph (e.g. giant cluster of one node)."""


class DegeneratePathError(GeoQNetError, ValueError):
    """A path of zero physical length."""
