"""
Structured logging for the library and the CLI.

Library modules only call ``get_logger(__name__)``; the CLI calls
``configure_logging()`` once after reading ``.env``. Events are dotted names
with keyword context::

    log = get_logger(__name__)
    log.info("harness.cell.done", n=1000, a=0.25, failures=0)

Environment variables:
    LOG_LEVEL          DEBUG, INFO, WARNING, ERROR (default INFO)
    LOG_FORMAT         json or console (console under pytest or a dev checkout)
    LOG_FILE           rotating log file (default logs/aprxlik.log)
    LOG_MAX_SIZE_MB    rotation size (default 10)
    LOG_BACKUP_COUNT   rotated files kept (default 5)
"""

from __future__ import annotations

import logging
import math
import os
import sys
from dataclasses import dataclass
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import TYPE_CHECKING, Any

import orjson
import structlog


if TYPE_CHECKING:
    from structlog.typing import EventDict, Processor, WrappedLogger

SERVICE = "aprxlik"
DEFAULT_LOG_FILE = "logs/aprxlik.log"

_configured = False


@dataclass(frozen=True)
class LogSettings:
    level: int
    level_name: str
    json: bool
    file: Path
    max_bytes: int
    backups: int

    @classmethod
    def resolve(
        cls,
        log_level: str | None = None,
        log_format: str | None = None,
        log_file: str | Path | None = None,
    ) -> LogSettings:
        """Arguments win over the environment, which wins over defaults."""
        level_name = (log_level or os.getenv("LOG_LEVEL") or "INFO").upper()
        fmt = (log_format or os.getenv("LOG_FORMAT") or "").lower()
        if not fmt:
            fmt = "console" if _interactive() else "json"
        return cls(
            level=getattr(logging, level_name, logging.INFO),
            level_name=level_name,
            json=fmt == "json",
            file=Path(log_file or os.getenv("LOG_FILE") or DEFAULT_LOG_FILE),
            max_bytes=int(os.getenv("LOG_MAX_SIZE_MB", "10")) * 1024 * 1024,
            backups=int(os.getenv("LOG_BACKUP_COUNT", "5")),
        )


def _interactive() -> bool:
    if os.getenv("ENVIRONMENT", "").lower() in ("dev", "development", "local"):
        return True
    return "pytest" in sys.modules or sys.stderr.isatty()


def _add_service(_logger: WrappedLogger, _method: str, event_dict: EventDict) -> EventDict:
    event_dict.setdefault("service", SERVICE)
    return event_dict


def _nonfinite_as_text(_logger: WrappedLogger, _method: str, event_dict: EventDict) -> EventDict:
    """orjson writes nan and inf as null; keep them readable in the JSON lines."""
    for key, value in event_dict.items():
        if isinstance(value, float) and not math.isfinite(value):
            event_dict[key] = str(value)
    return event_dict


def _json_default(obj: Any) -> Any:
    if hasattr(obj, "item"):
        return obj.item()
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return str(obj)


def _dumps(obj: Any, **_kwargs: Any) -> str:
    return orjson.dumps(obj, default=_json_default, option=orjson.OPT_SERIALIZE_NUMPY).decode("utf-8")


def _processors(settings: LogSettings) -> list[Processor]:
    shared: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        _add_service,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        structlog.processors.StackInfoRenderer(),
    ]
    if settings.json:
        return [
            *shared,
            _nonfinite_as_text,
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(serializer=_dumps),
        ]
    return [*shared, structlog.dev.ConsoleRenderer(colors=False, exception_formatter=structlog.dev.plain_traceback)]


def _install_handlers(settings: LogSettings) -> None:
    settings.file.parent.mkdir(parents=True, exist_ok=True)
    plain = logging.Formatter("%(message)s")

    to_file = RotatingFileHandler(settings.file, maxBytes=settings.max_bytes, backupCount=settings.backups)
    # stderr, so `aprxlik logz` leaves stdout to the number it prints
    to_stderr = logging.StreamHandler(sys.stderr)

    root = logging.getLogger()
    root.setLevel(settings.level)
    root.handlers.clear()
    for handler in (to_file, to_stderr):
        handler.setLevel(settings.level)
        handler.setFormatter(plain)
        root.addHandler(handler)


def configure_logging(
    *,
    log_level: str | None = None,
    log_format: str | None = None,
    log_file: str | Path | None = None,
    force: bool = False,
) -> None:
    """
    Configure structlog over stdlib logging for this process.

    Later calls do nothing unless ``force=True``.
    """
    global _configured  # noqa: PLW0603
    if _configured and not force:
        return

    settings = LogSettings.resolve(log_level, log_format, log_file)
    _install_handlers(settings)
    structlog.configure(
        processors=_processors(settings),
        wrapper_class=structlog.make_filtering_bound_logger(settings.level),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )
    _configured = True

    structlog.get_logger(__name__).debug(
        "logging.configured",
        level=settings.level_name,
        json=settings.json,
        log_file=str(settings.file),
        version=_package_version(),
    )


def _package_version() -> str:
    from importlib.metadata import PackageNotFoundError, version

    try:
        return version(SERVICE)
    except PackageNotFoundError:
        return "dev"


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """Logger for ``name``, configuring with defaults on first use."""
    if not _configured:
        configure_logging()
    return structlog.get_logger(name)  # type: ignore[no-any-return]


def bind_contextvars(**kwargs: Any) -> None:
    """Attach context (experiment, cell, replicate) to every event from this thread."""
    structlog.contextvars.bind_contextvars(**kwargs)


def clear_contextvars() -> None:
    structlog.contextvars.clear_contextvars()
