# conflict-sim - traffic-conflict game simulation toolkit

from typing import Optional

from conflict_sim.helpers.error_handler import EXIT_IO, EXIT_USAGE, EXIT_VERIFICATION


class ConflictSimError(Exception):
    """
    Base exception class for conflict-sim errors.

    Attributes:
        message (str): A human-readable error message.
        exit_code (int): The CLI exit code associated with the error.
    """

    exit_code = EXIT_USAGE

    def __init__(self, message: str, exit_code: Optional[int] = None):
        """
        Initialize the ConflictSimError instance.

        Args:
            message (str): A human-readable error message.
            exit_code (int, optional): Overrides the class-level exit code.
        """
        super().__init__(message)
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        """Returns a string representation of the error instance."""
        return f"{self.__class__.__name__}: {self.args[0]}"


class ConfigError(ConflictSimError):
    """Raised when an experiment document or override does not conform to the schema."""


class ScenarioValidationError(ConfigError):
    """Raised when a parsed scenario violates an invariant (ROW holders, path topology, speed ranges)."""


class TrajectoryError(ConflictSimError):
    """Base class for trajectory generation and geometry errors."""


class EmptyActionSetError(TrajectoryError):
    """Raised when no feasible trajectory exists for an agent (or for a requested maneuver class)."""


class SpeedRangeError(TrajectoryError):
    """Raised when a pedestrian walking speed option lies outside the admissible range."""


class SamplingGridError(TrajectoryError):
    """Raised when two trajectories compared sample-by-sample do not share a time grid."""


class GameConstructionError(ConflictSimError):
    """Raised when a game tree cannot be built, naming the offending node."""


class ProfileError(ConflictSimError):
    """Raised when a strategy profile is undefined at a node it is asked about."""


class AggregationError(ConflictSimError):
    """Raised when statistics are requested over an empty set of records."""


class VerificationError(ConflictSimError):
    """Raised when a profile fails the epsilon-equilibrium check."""

    exit_code = EXIT_VERIFICATION


class ReportIOError(ConflictSimError):
    """Raised when results cannot be read or written."""

    exit_code = EXIT_IO


class ExperimentNotLoadedError(ConflictSimError):
    """Raised when a simulator method needing an experiment is called before one is loaded."""
