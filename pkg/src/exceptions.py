"""
Exception classes for the simplifying-assumption test toolkit
This module defines custom exceptions for better error handling.
"""
from typing import Optional, Dict, Any

class SVCTError(Exception):
    """Base class for all toolkit exceptions"""

    def __init__(self, message: str, error_code: Optional[str] = None,
                details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(message)

    def __str__(self) -> str:
        """Format the exception message"""
        if self.error_code:
            return f"[{self.error_code}] {self.message}"
        return self.message

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        return self.message

    def _edge_info(self) -> str:
        edge = self.details.get("edge")
        return f" on edge {edge}" if edge is not None else ""

class DomainError(SVCTError):
    """Raised when a parameter or input lies outside its admissible range"""

    def __init__(self, message: str, parameter: Optional[str] = None,
                value: Any = None, error_code: Optional[str] = None,
                details: Optional[Dict[str, Any]] = None):
        self.parameter = parameter
        self.value = value
        _details = {
            "parameter": parameter,
            "value": value
        }
        if details:
            _details.update(details)

        super().__init__(message, error_code=error_code or "DOMAIN_ERROR", details=_details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        if self.parameter:
            return f"Invalid value for '{self.parameter}' ({self.value}): {self.message}"
        return f"Invalid input: {self.message}"

class SizeError(DomainError):
    """Raised when a sample is too small for the requested operation"""

    def __init__(self, message: str, n: Optional[int] = None, minimum: Optional[int] = None,
                error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        self.n = n
        self.minimum = minimum
        _details = {"minimum": minimum}
        if details:
            _details.update(details)
        super().__init__(message, parameter="n", value=n,
                        error_code=error_code or "SIZE_ERROR", details=_details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        if self.minimum is not None:
            return f"Sample too small (n={self.n}, need at least {self.minimum}): {self.message}"
        return f"Sample too small: {self.message}"

class NumericError(SVCTError):
    """Raised when a numerical procedure fails; diagnostics go into details"""

    def __init__(self, message: str, operation: Optional[str] = None,
                diagnostics: Optional[Dict[str, Any]] = None,
                error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        self.operation = operation
        self.diagnostics = diagnostics or {}
        _details: Dict[str, Any] = {"operation": operation}
        _details.update(self.diagnostics)
        if details:
            _details.update(details)

        super().__init__(message, error_code=error_code or "NUMERIC_ERROR", details=_details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        operation_info = f" in {self.operation}" if self.operation else ""
        return f"Numerical failure{operation_info}{self._edge_info()}: {self.message}"

class ConvergenceError(NumericError):
    """Raised when an iterative solver or optimizer does not converge"""

    def __init__(self, message: str, operation: Optional[str] = None,
                diagnostics: Optional[Dict[str, Any]] = None,
                error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, operation=operation, diagnostics=diagnostics,
                        error_code=error_code or "CONVERGENCE_ERROR", details=details)

class SingularMatrixError(NumericError):
    """Raised when a matrix to be inverted is numerically singular"""

    def __init__(self, message: str, operation: Optional[str] = None,
                diagnostics: Optional[Dict[str, Any]] = None,
                error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, operation=operation, diagnostics=diagnostics,
                        error_code=error_code or "SINGULAR_MATRIX", details=details)

class PartitionError(SVCTError):
    """Raised when a partition has empty, tiny or overlapping leaves"""

    def __init__(self, message: str, leaf: Optional[int] = None,
                error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        self.leaf = leaf
        _details: Dict[str, Any] = {"leaf": leaf}
        if details:
            _details.update(details)
        super().__init__(message, error_code=error_code or "PARTITION_ERROR", details=_details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        leaf_info = f" (leaf {self.leaf})" if self.leaf is not None else ""
        return f"Invalid partition{leaf_info}: {self.message}"

class DegenerateDataError(SVCTError):
    """Raised when data inside a leaf has zero variance"""

    def __init__(self, message: str, leaf: Optional[int] = None,
                error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        self.leaf = leaf
        _details: Dict[str, Any] = {"leaf": leaf}
        if details:
            _details.update(details)
        super().__init__(message, error_code=error_code or "DEGENERATE_DATA", details=_details)

class UnsupportedOperationError(SVCTError):
    """Raised when an operation is not defined for a copula family"""

    def __init__(self, message: str, family: Optional[str] = None, operation: Optional[str] = None,
                error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        self.family = family
        self.operation = operation
        _details = {"family": family, "operation": operation}
        if details:
            _details.update(details)
        super().__init__(message, error_code=error_code or "UNSUPPORTED_OPERATION", details=_details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        if self.family and self.operation:
            return f"'{self.operation}' is not available for the {self.family} family"
        return f"Unsupported operation: {self.message}"

class StateError(SVCTError):
    """Raised when an object is used before the state it needs exists"""

    def __init__(self, message: str, error_code: Optional[str] = None,
                details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code=error_code or "STATE_ERROR", details=details)

class ValidationError(SVCTError):
    """Raised when validation of input data fails"""

    def __init__(self, message: str, validation_errors: Optional[Dict[str, str]] = None,
                field_name: Optional[str] = None, error_code: Optional[str] = None,
                details: Optional[Dict[str, Any]] = None):
        self.validation_errors = validation_errors or {}
        self.field_name = field_name

        _details: Dict[str, Any] = {
            "validation_errors": self.validation_errors,
            "field_name": field_name
        }
        if details:
            _details.update(details)

        super().__init__(message, error_code=error_code or "VALIDATION_ERROR", details=_details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        if self.field_name:
            return f"Validation error for field '{self.field_name}': {self.message}"
        if self.validation_errors:
            error_list = [f"{field}: {error}" for field, error in self.validation_errors.items()]
            error_str = "; ".join(error_list)
            return f"Validation errors: {error_str}"
        return f"Validation error: {self.message}"

class UsageError(ValidationError):
    """Raised for malformed command-line usage"""

    def __init__(self, message: str, usage: Optional[str] = None,
                error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        self.usage = usage
        super().__init__(message, error_code=error_code or "USAGE_ERROR", details=details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        if self.usage:
            return f"{self.usage.rstrip()}\nerror: {self.message}"
        return f"error: {self.message}"

class ConfigurationError(SVCTError):
    """Raised when there's an issue with configuration"""

    def __init__(self, message: str, config_key: Optional[str] = None,
                config_section: Optional[str] = None, error_code: Optional[str] = None,
                details: Optional[Dict[str, Any]] = None):
        self.config_key = config_key
        self.config_section = config_section

        _details: Dict[str, Any] = {
            "config_key": config_key,
            "config_section": config_section
        }
        if details:
            _details.update(details)

        super().__init__(message, error_code=error_code or "CONFIG_ERROR", details=_details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        if self.config_section and self.config_key:
            return f"Configuration error in section '{self.config_section}', key '{self.config_key}': {self.message}"
        elif self.config_section:
            return f"Configuration error in section '{self.config_section}': {self.message}"
        else:
            return f"Configuration error: {self.message}"

class CacheError(SVCTError):
    """Raised when a cache operation fails"""

    def __init__(self, message: str, operation: Optional[str] = None,
                key: Optional[str] = None, error_code: Optional[str] = None,
                details: Optional[Dict[str, Any]] = None):
        self.operation = operation

        _details: Dict[str, Any] = {
            "operation": operation,
            "key": key
        }
        if details:
            _details.update(details)

        super().__init__(message, error_code=error_code or "CACHE_ERROR", details=_details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        operation_info = ""
        if self.operation:
            operation_info = f" during {self.operation}"
        return f"Cache error{operation_info}: {self.message}"

class StudyError(SVCTError):
    """Raised when a Monte Carlo replication or study cell fails"""

    def __init__(self, message: str, study: Optional[str] = None, replication: Optional[int] = None,
                error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        self.study = study
        self.replication = replication
        _details: Dict[str, Any] = {"study": study, "replication": replication}
        if details:
            _details.update(details)
        super().__init__(message, error_code=error_code or "STUDY_ERROR", details=_details)

    def get_user_message(self) -> str:
        """Get a user-friendly error message"""
        rep_info = f" (replication {self.replication})" if self.replication is not None else ""
        study_info = f" in study '{self.study}'" if self.study else ""
        return f"Study failure{study_info}{rep_info}: {self.message}"

def format_error_for_user(error: Exception) -> str:
    """Format an exception into a user-friendly error message

    Args:
        error: The exception to format

    Returns:
        str: User-friendly error message
    """
    if isinstance(error, SVCTError):
        return error.get_user_message()
    else:
        return str(error)

def format_error_for_logging(error: Exception) -> str:
    """Format an exception for logging with additional context

    Args:
        error: The exception to format

    Returns:
        str: Detailed error message for logging
    """
    if isinstance(error, SVCTError):
        details_str = ", ".join(f"{k}={v}" for k, v in error.details.items() if v is not None)
        if details_str:
            return f"{error} [{details_str}]"
        return str(error)
    else:
        return str(error)
