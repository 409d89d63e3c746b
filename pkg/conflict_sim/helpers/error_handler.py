# conflict-sim - traffic-conflict game simulation toolkit

from typing import Optional

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


class ErrorHandler:
    """
    Represents an error handler turning CLI exit codes into diagnostic messages.

    Attributes:
        exit_code (int): The process exit code associated with the error.
        message (str, None): An optional error message providing additional details.
            Defaults to None.
    """

    def __init__(self, exit_code: int, message: Optional[str] = None):
        """
        Initialize the ErrorHandler object with a given exit code.

        Args:
            exit_code (int): The exit code representing the error.
            message (str, optional): An optional error message providing additional details.
        """
        self.exit_code = exit_code
        self.message = message

    def handle(self) -> str:
        """
        Handle the error based on the provided exit code.

        Returns:
            (str): A message describing the error, with the detail message appended when present.
        """
        error_handlers = {
            EXIT_VERIFICATION: self.handle_verification_failure,
            EXIT_USAGE: self.handle_usage_error,
            EXIT_IO: self.handle_io_error,
        }

        handler = error_handlers.get(self.exit_code, self.handle_unknown_error)
        summary = handler()
        return f"{summary} {self.message}" if self.message else summary

    @staticmethod
    def handle_verification_failure() -> str:
        """Handle a failed equilibrium verification (exit 1)."""
        return "Verification failed:"

    @staticmethod
    def handle_usage_error() -> str:
        """Handle a usage or validation error (exit 2)."""
        return "Invalid input:"

    @staticmethod
    def handle_io_error() -> str:
        """Handle an I/O error (exit 3)."""
        return "I/O failure:"

    @staticmethod
    def handle_unknown_error() -> str:
        """Handle an unknown error."""
        return "Unknown error occurred:"
