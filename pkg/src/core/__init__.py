from .config import settings
from .logging import bind_command, clear_contextvars, get_logger, setup_logging

__all__ = ["settings", "setup_logging", "get_logger", "bind_command", "clear_contextvars"]
