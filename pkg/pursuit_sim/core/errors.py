"""
Exception hierarchy shared by the library and the CLI.
"""
from typing import Any, Dict, Optional


class PursuitSimError(Exception):
    """Base class for all simulator errors"""
    exit_code = 2


class DomainError(PursuitSimError, ValueError):
    """A math primitive was called outside its domain"""


class DegenerateGeometryError(DomainError):
    """Two positions coincide where a bearing or distance ratio is needed"""


class TimeRegressionError(DomainError):
    """Phase bookkeeping was asked to move backwards in time"""


class ConfigError(PursuitSimError):
    """Scenario or schema violation"""
    exit_code = 1

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class IntegrityError(PursuitSimError):
    """Non-finite state detected during a run"""
    exit_code = 2

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class OutputError(PursuitSimError):
    """Reading or writing a file failed"""
    exit_code = 2

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path
