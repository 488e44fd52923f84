"""
Exception hierarchy for SchroWave.

Numerical modules raise these; the CLI maps them to exit codes and the API to HTTP errors.
"""


class SchroWaveError(Exception):
    """Base class for every error raised by the package."""


class GridError(SchroWaveError):
    pass


class MediumError(SchroWaveError):
    pass


class DimensionError(SchroWaveError):
    pass


class OperatorError(SchroWaveError):
    pass


class NumericalError(SchroWaveError):
    pass


class PWindowError(SchroWaveError):
    pass


class ConfigError(SchroWaveError):
    def __init__(self, message: str, problems: list[str] | None = None):
        super().__init__(message)
        self.problems = problems or []


class PresetNotFoundError(ConfigError):
    pass
