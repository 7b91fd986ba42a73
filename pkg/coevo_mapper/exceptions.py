"""Exceptions raised by coevo_mapper."""


class CoevoError(Exception):
    """Base class for all pipeline errors."""


class FormatError(CoevoError, ValueError):
    """An input file does not follow its documented format."""


class ConfigError(CoevoError, ValueError):
    """A configuration key or value is invalid."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ClassificationError(CoevoError, ValueError):
    """Classification tables are inconsistent."""


class DependencyError(CoevoError):
    """A stage ran before the stage producing its inputs."""

    def __init__(self, stage, missing):
        super().__init__(f"stage '{stage}' has not been run: missing {missing}")
        self.stage = stage
        self.missing = missing


class RenderError(CoevoError):
    """A figure cannot be drawn from the given data."""


class NoBurstSignal(CoevoError, ValueError):
    """A term never occurs in its stream, so no burst can be detected."""
