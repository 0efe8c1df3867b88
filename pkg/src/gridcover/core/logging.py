"""Structured logging configuration using structlog.

Runs log one JSON object per line to stdout; ``DEBUG`` switches to the
coloured console renderer. Fields bound with :func:`bind_run` (command,
algorithm, seed) are attached to every event until :func:`clear_run`.
"""

from __future__ import annotations

import logging
import sys
from typing import Any

import numpy as np
import structlog

from gridcover.core.exceptions import ConfigError

_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def numpy_to_builtin(
    _logger: Any, _method: str, event_dict: structlog.types.EventDict
) -> structlog.types.EventDict:
    """Render numpy scalars and arrays as plain JSON values."""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray):
            event_dict[key] = value.tolist()
    return event_dict


def setup_logging(level: str = "INFO") -> None:
    """Configure structlog and route it through a single stdout handler.

    Raises:
        ConfigError: ``level`` is not a standard level name.
    """
    level = level.upper()
    if level not in _LEVELS:
        raise ConfigError(f"Unknown log level: {level}", key="log_level")

    shared_processors: list[structlog.types.Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.UnicodeDecoder(),
        numpy_to_builtin,
    ]

    if level == "DEBUG":
        renderer: structlog.types.Processor = structlog.dev.ConsoleRenderer(colors=True)
    else:
        renderer = structlog.processors.JSONRenderer()

    structlog.configure(
        processors=[
            *shared_processors,
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )

    formatter = structlog.stdlib.ProcessorFormatter(
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            renderer,
        ],
    )

    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(formatter)

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(level)

    # trial threads make asyncio chatty at DEBUG
    logging.getLogger("asyncio").setLevel(logging.WARNING)


def bind_run(**fields: Any) -> None:
    """Attach fields to every subsequent event in this context."""
    structlog.contextvars.bind_contextvars(**fields)


def clear_run() -> None:
    structlog.contextvars.clear_contextvars()


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a bound logger for a module."""
    return structlog.get_logger(name)
