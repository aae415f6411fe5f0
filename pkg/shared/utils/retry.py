from typing import Callable, Any, Optional, Tuple, Type
from functools import wraps
from shared.utils.logger import get_logger
from shared.utils.exceptions import ContractViolationException


logger = get_logger("retry_system")


class MaxAttemptsExceededException(ContractViolationException):
    """Raised when every restart of a numerical routine failed"""
    pass


def retry_with_restarts(
    max_attempts: int = 3,
    exceptions: Tuple[Type[Exception], ...] = (ArithmeticError,),
    on_retry: Optional[Callable] = None
):
    """
    Decorator for multi-start numerical routines

    The wrapped function receives the zero-based ``attempt`` index as a keyword
    argument and is expected to pick a different starting point per attempt.

    Args:
        max_attempts: Maximum number of starts
        exceptions: Tuple of exceptions that trigger another start
        on_retry: Optional callback function called on each restart

    Usage:
        @retry_with_restarts(max_attempts=4, exceptions=(ArithmeticError,))
        def solve(target, attempt=0):
            # ... start from initial_points[attempt]
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            last_exception = None

            for attempt in range(max_attempts):
                try:
                    return func(*args, attempt=attempt, **kwargs)
                except exceptions as e:
                    last_exception = e

                    if attempt < max_attempts - 1:
                        logger.warning(
                            f"Attempt {attempt + 1}/{max_attempts} failed for {func.__name__}. "
                            f"Restarting. Error: {str(e)}"
                        )

                        if on_retry:
                            on_retry(attempt + 1, e)
                    else:
                        logger.error(
                            f"All {max_attempts} attempts failed for {func.__name__}. "
                            f"Final error: {str(e)}"
                        )

            raise MaxAttemptsExceededException(
                f"Failed after {max_attempts} attempts. Last error: {str(last_exception)}"
            ) from last_exception

        return wrapper

    return decorator
