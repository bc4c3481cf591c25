"""Exception hierarchy shared by every package in the repo."""
from __future__ import annotations


class SplitIBError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""

    exit_code = 1


class ShapeError(SplitIBError, ValueError):
    def __init__(self, what: str, expected, got):
        self.expected = tuple(expected) if expected is not None else None
        self.got = tuple(got) if got is not None else None
        super().__init__(f"{what}: expected shape {self.expected}, got {self.got}")


class NumericError(SplitIBError, FloatingPointError):
    def __init__(self, message: str, timestep: int | None = None):
        self.timestep = timestep
        if timestep is not None:
            message = f"{message} (timestep {timestep})"
        super().__init__(message)


class TrainingDivergedError(NumericError):
    def __init__(self, phase: int, epoch: int):
        self.phase = phase
        self.epoch = epoch
        super().__init__(f"training diverged in phase {phase} at epoch {epoch}: loss is not finite")


class ConfigError(SplitIBError, ValueError):
    exit_code = 2


class SchemaError(ConfigError):
    def __init__(self, message: str, column: str | None = None, row: int | None = None):
        self.column = column
        self.row = row
        super().__init__(message)


class ContractError(SplitIBError):
    pass


class InsufficientSamplesError(ContractError):
    def __init__(self, required: int, got: int, what: str = "estimate"):
        self.required = required
        self.got = got
        super().__init__(f"{what} needs at least {required} samples, got {got}")


class ArtifactError(SplitIBError, OSError):
    def __init__(self, message: str, path=None):
        self.path = path
        if path is not None:
            message = f"{message}: {path}"
        super().__init__(message)
