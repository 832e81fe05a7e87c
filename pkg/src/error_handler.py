"""
Error context helpers for the simplifying-assumption test toolkit.
"""
import logging
import traceback
from typing import Callable, Any, Dict, Optional, Type, TypeVar

from .exceptions import SVCTError, format_error_for_logging

logger = logging.getLogger("SVCT.ErrorHandler")

T = TypeVar('T')

class ErrorContext:
    """Context manager attaching context information (edge, replication, ...) to errors"""

    def __init__(self, context_info: Dict[str, Any],
                error_type: Type[SVCTError] = SVCTError,
                error_code: Optional[str] = None,
                log_level: int = logging.DEBUG):
        """Initialize error context

        Args:
            context_info: Context information to include in error
            error_type: Error type to raise if a foreign exception occurs
            error_code: Error code to use in the raised error
            log_level: Level at which the failure is logged
        """
        self.context_info = context_info
        self.error_type = error_type
        self.error_code = error_code
        self.log_level = log_level

    def __enter__(self):
        """Enter the context manager"""
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Exit the context manager

        Returns:
            bool: always False; the (possibly converted) exception propagates
        """
        if exc_type is None:
            return False

        context_str = ", ".join(f"{k}={v}" for k, v in self.context_info.items())

        if issubclass(exc_type, SVCTError):
            # Inner contexts win on conflicting keys
            for key, value in self.context_info.items():
                if exc_val.details.get(key) is None:
                    exc_val.details[key] = value

            logger.log(self.log_level, f"Error in context ({context_str}): {exc_val}")
            return False

        if not issubclass(exc_type, Exception):
            return False

        error = self.error_type(
            str(exc_val) or exc_type.__name__,
            error_code=self.error_code,
            details=dict(self.context_info)
        )

        logger.log(self.log_level, f"Converted error in context: {format_error_for_logging(error)}")
        logger.debug(f"Original traceback: {''.join(traceback.format_exception(exc_type, exc_val, exc_tb))}")

        raise error from exc_val

def safe_execute(func: Callable[..., T],
                context_info: Dict[str, Any],
                error_type: Type[SVCTError] = SVCTError,
                error_code: Optional[str] = None,
                *args: Any, **kwargs: Any) -> T:
    """Safely execute a function with error context

    Args:
        func: Function to execute
        context_info: Context information to include in error
        error_type: Error type to raise if a foreign exception occurs
        error_code: Error code to use in the raised error
        *args: Positional arguments for the function
        **kwargs: Keyword arguments for the function

    Returns:
        T: Result of the function
    """
    with ErrorContext(context_info, error_type, error_code):
        return func(*args, **kwargs)
