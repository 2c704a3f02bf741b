import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator, Optional

import structlog

from pursuit_sim.core.config import settings


def configure_structlog(level: Optional[str] = None, json_output: Optional[bool] = None) -> None:
    """Configure structlog for structured logging."""
    level = (level or settings.log_level).upper()
    json_output = settings.log_json if json_output is None else json_output

    # Logs go to stderr so stdout stays machine-readable for the CLI summary
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level, force=True)

    renderer = (
        structlog.processors.JSONRenderer()
        if json_output
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


@contextmanager
def log_run(name: str, **context) -> Iterator[structlog.stdlib.BoundLogger]:
    """Log start, completion and failure of one unit of work with its duration."""
    start_time = time.perf_counter()
    logger = structlog.get_logger("pursuit_sim.run").bind(run=name, **context)

    logger.info("Run started")
    try:
        yield logger
    except Exception as e:
        processing_time = (time.perf_counter() - start_time) * 1000
        logger.error(
            "Run failed",
            duration_ms=round(processing_time, 2),
            error=str(e),
            error_type=type(e).__name__,
        )
        raise

    processing_time = (time.perf_counter() - start_time) * 1000
    logger.info("Run completed", duration_ms=round(processing_time, 2))
