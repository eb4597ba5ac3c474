"""Command timing/logging and the mapping from errors to exit codes."""

import logging
import time
from typing import Any, Callable

from pydantic import ValidationError

from catgate.exceptions import EXIT_CONFIG, EXIT_OK, EXIT_UNEXPECTED, CatGateError, StageError

logger = logging.getLogger(__name__)


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, CatGateError):
        return error.exit_code
    if isinstance(error, ValidationError):
        return EXIT_CONFIG
    return EXIT_UNEXPECTED


def run_command(name: str, func: Callable[..., Any], *args, **kwargs) -> tuple[int, Any]:
    """Run one CLI command, log its outcome and elapsed time, return (exit code, result)."""
    start = time.time()
    result = None
    try:
        result = func(*args, **kwargs)
        code = EXIT_OK
    except StageError as e:
        code = e.exit_code
        logger.error(f"{name}: {e}", exc_info=e.cause)
    except (CatGateError, ValidationError) as e:
        code = exit_code_for(e)
        logger.error(f"{name}: {e}")
    except Exception as e:
        code = EXIT_UNEXPECTED
        logger.error(f"{name}: unexpected error: {e}", exc_info=True)
    elapsed = time.time() - start
    logger.info(f"{name} - exit {code} - {elapsed:.3f}s")
    return code, result
