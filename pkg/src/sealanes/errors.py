"""Exception types shared across the package."""


class SealanesError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(SealanesError):
    """A CSV header is missing a mapped column, or a file schema is invalid."""


class ConfigError(SealanesError):
    """Invalid parameters, distribution specs, or an empty input."""


class ModelError(SealanesError):
    """A pattern or calibration model is missing data required for scoring."""


class DegenerateCourseError(SealanesError):
    """Circular mean course is undefined (zero resultant vector)."""
