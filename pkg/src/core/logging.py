import logging
import sys
from typing import Any, List, Optional

import structlog

from .config import settings

LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _processors(log_format: str) -> List[Any]:
    chain: List[Any] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.CallsiteParameterAdder(
            parameters=[
                structlog.processors.CallsiteParameter.MODULE,
                structlog.processors.CallsiteParameter.FUNC_NAME,
            ],
        ),
    ]
    if log_format == "json":
        chain.append(structlog.processors.JSONRenderer(sort_keys=True))
    else:
        chain.append(structlog.dev.ConsoleRenderer(colors=False))
    return chain


def setup_logging(level: Optional[str] = None, log_format: Optional[str] = None) -> None:
    """Configure structlog on top of stdlib logging.

    Logs always go to standard error; standard output carries reports only.
    Unknown level names fall back to WARNING.
    """
    level_name = (level or settings.log_level).upper()
    if level_name not in LEVELS:
        level_name = "WARNING"

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level_name, force=True)
    structlog.configure(
        processors=_processors(log_format or settings.log_format),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )


def get_logger(name: str = __name__) -> structlog.stdlib.BoundLogger:
    return structlog.get_logger(name)


def bind_command(command: str, **context: Any) -> None:
    """Bind the CLI subcommand to every event logged until the context is cleared."""
    structlog.contextvars.bind_contextvars(command=command, **context)


def bind_request_id(request_id: str) -> None:
    structlog.contextvars.bind_contextvars(request_id=request_id)


def clear_contextvars() -> None:
    structlog.contextvars.clear_contextvars()
