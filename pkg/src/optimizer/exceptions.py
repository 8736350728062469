from typing import Optional


class MemEvoError(Exception):
    """Base class for every error raised by the MemEvo packages"""


class InvalidInput(MemEvoError, ValueError):
    """Raised when an operation receives data that breaks its contract"""


class NumericalBreakdown(MemEvoError):
    """Raised when solver iterates stop being finite"""

    def __init__(self, message: str, view_index: Optional[int] = None):
        self.view_index = view_index
        if view_index is not None:
            message = f"view {view_index}: {message}"
        super().__init__(message)


class ParseError(MemEvoError):
    """Raised when a view or labels file cannot be read as a numeric table"""

    def __init__(self, message: str, path: Optional[str] = None, line_number: Optional[int] = None):
        self.path = path
        self.line_number = line_number
        location = path or "<input>"
        if line_number is not None:
            location = f"{location}:{line_number}"
        super().__init__(f"{location}: {message}")


class ConfigError(MemEvoError):
    """Raised for an inconsistent or incomplete run configuration"""
