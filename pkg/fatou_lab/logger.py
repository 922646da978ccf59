import logging
import sys

import structlog


def setup_logger(level: str = "INFO", json: bool = True) -> structlog.BoundLogger:
    """Configure structured logging"""

    # Logs go to stderr so report output on stdout stays clean
    logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr, force=True)

    renderer = structlog.processors.JSONRenderer() if json else structlog.dev.ConsoleRenderer()
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    return structlog.get_logger("fatou_lab")


def _default_logger() -> structlog.BoundLogger:
    from fatou_lab.config import settings
    return setup_logger(settings.log_level, settings.log_json)


# Create default logger
logger = _default_logger()
