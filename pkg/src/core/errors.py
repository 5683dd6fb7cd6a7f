"""
Exception hierarchy for the learner lab
"""
from typing import Optional


class LabError(Exception):
    """Base class for every error raised by the engine"""


class ConfigurationError(LabError, ValueError):
    """Invalid configuration value or experiment file"""


class InvalidGameError(LabError, ValueError):
    """Game matrices or action names violate the game invariants"""


class DimensionMismatchError(LabError, ValueError):
    """A strategy or vector does not match the game dimensions"""


class InvalidStrategyError(LabError, ValueError):
    """A probability vector is not on the simplex"""


class GameFileError(LabError, ValueError):
    """A game or policy file could not be parsed"""

    def __init__(self, path: str, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        location = path if line is None else f"{path}:{line}:{column}"
        super().__init__(f"{location}: {message}")


class LPSolveError(LabError):
    """The LP solver could not produce an optimal solution"""


class DominatedStrategyError(LabError):
    """The target learner action cannot be made the unique best response"""


class FeedbackModeError(LabError, ValueError):
    """Feedback does not match the learner's declared feedback mode"""


class StationaryDistributionError(LabError):
    """No stationary distribution could be recovered for the swap wrapper"""


class ScheduleError(LabError, ValueError):
    """A policy cannot be laid out on the requested number of rounds"""


class InvalidCycleError(LabError, ValueError):
    """A control-problem cycle does not return to a multiple of its start"""


class TraceFormatError(LabError, ValueError):
    """A trace CSV file is malformed"""
