"""Structured logging configuration for spectral-tori.

Every run gets a short run id that is attached to each event so that the logs
of one CLI invocation can be grouped after the fact.
"""
import logging
import sys
import uuid
from contextvars import ContextVar
from typing import Any

import structlog
from structlog.types import Processor

from .config import get_settings

# Context variable for the current run id
run_id_var: ContextVar[str | None] = ContextVar("run_id", default=None)


def get_run_id() -> str | None:
    """Get the current run id from context."""
    return run_id_var.get()


def set_run_id(run_id: str | None = None) -> str:
    """Set a run id in context, generating one if not provided."""
    if run_id is None:
        run_id = str(uuid.uuid4())[:8]
    run_id_var.set(run_id)
    return run_id


def add_run_id(
    logger: logging.Logger, method_name: str, event_dict: dict[str, Any]
) -> dict[str, Any]:
    """Add the run id to log events."""
    run_id = get_run_id()
    if run_id:
        event_dict["run_id"] = run_id
    return event_dict


def add_service_info(
    logger: logging.Logger, method_name: str, event_dict: dict[str, Any]
) -> dict[str, Any]:
    """Add package metadata to log events."""
    settings = get_settings()
    event_dict["service"] = "spectral-tori"
    event_dict["version"] = settings.package_version
    return event_dict


def configure_logging() -> structlog.stdlib.BoundLogger:
    """Configure structured logging based on environment.

    In debug mode: human-readable console output with colors.
    Otherwise: JSON lines. Both go to stderr so stdout carries only results.

    Returns:
        Configured structlog logger instance
    """
    settings = get_settings()

    shared_processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="iso"),
        add_run_id,
        add_service_info,
        structlog.processors.StackInfoRenderer(),
        structlog.processors.UnicodeDecoder(),
    ]

    renderer: Processor
    if settings.debug:
        renderer = structlog.dev.ConsoleRenderer(colors=True)
    else:
        renderer = structlog.processors.JSONRenderer()

    processors: list[Processor] = shared_processors + [
        structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
    ]
    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=shared_processors,
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            renderer,
        ],
    )

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.addHandler(handler)
    root_logger.setLevel(logging.DEBUG if settings.debug else logging.INFO)

    return structlog.get_logger("spectral_tori")


def get_logger(name: str = "spectral_tori") -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance.

    Args:
        name: Logger name for categorization

    Returns:
        Configured structlog logger
    """
    return structlog.get_logger(name)
