import logging
import logging.handlers
import traceback
import colorlog
from pathlib import Path
from typing import Optional, Dict, Any


def setup_logging(config: Dict[str, Any], log_name: Optional[str] = None) -> logging.Logger:
    """
    Set up logging configuration.

    The named logger gets a colored console handler and a size-rotating file
    handler; library modules log through ``logging.getLogger(__name__)`` and
    propagate to the root logger, which receives the same handlers.

    Args:
        config: Main configuration dictionary
        log_name: Optional specific logger name

    Returns:
        Configured logger instance
    """
    logging_config = config.get("logging", {})

    log_level = logging_config.get("level", "INFO")
    log_format = logging_config.get("format",
                                    "%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    console_enabled = logging_config.get("console", True)
    file_enabled = logging_config.get("file", True)
    level = getattr(logging, str(log_level).upper(), logging.INFO)

    root = logging.getLogger()
    root.setLevel(level)
    root.handlers.clear()

    if console_enabled:
        console_handler = colorlog.StreamHandler()
        console_handler.setLevel(level)
        console_handler.setFormatter(colorlog.ColoredFormatter(
            "%(log_color)s" + log_format,
            log_colors={
                'DEBUG': 'cyan',
                'INFO': 'green',
                'WARNING': 'yellow',
                'ERROR': 'red',
                'CRITICAL': 'bold_red',
            }
        ))
        root.addHandler(console_handler)

    if file_enabled:
        log_dir = Path(config.get("paths", {}).get("logs", "./logs"))
        log_dir.mkdir(parents=True, exist_ok=True)

        max_bytes = int(logging_config.get("max_file_size_mb", 10) * 1024 * 1024)
        backup_count = logging_config.get("backup_count", 5)

        file_handler = logging.handlers.RotatingFileHandler(
            log_dir / "mia_audit.log",
            maxBytes=max_bytes,
            backupCount=backup_count,
            encoding='utf-8'
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(logging.Formatter(log_format))
        root.addHandler(file_handler)

    logger = logging.getLogger(log_name or "mia_audit")
    logger.setLevel(level)
    logger.debug(f"Logging initialized - Level: {log_level}, Console: {console_enabled}, File: {file_enabled}")

    return logger


class StageLogger:
    """Logger wrapper that appends key=value context (stage, scenario, seed, dataset)."""

    def __init__(self, logger: logging.Logger):
        """
        Initialize StageLogger.

        Args:
            logger: Base logger instance
        """
        self.logger = logger
        self.context: Dict[str, Any] = {}

    def set_context(self, **kwargs) -> None:
        self.context.update(kwargs)

    def _format_message(self, message: str, extra: Optional[Dict[str, Any]] = None) -> str:
        context = dict(self.context)
        if extra:
            context.update(extra)
        if not context:
            return message
        context_str = " | ".join(f"{k}={v}" for k, v in context.items())
        return f"{message} | {context_str}"

    def debug(self, message: str, **kwargs) -> None:
        self.logger.debug(self._format_message(message, kwargs))

    def info(self, message: str, **kwargs) -> None:
        self.logger.info(self._format_message(message, kwargs))

    def error(self, message: str, **kwargs) -> None:
        self.logger.error(self._format_message(message, kwargs))

    def log_stage_start(self, stage: str) -> None:
        self.info("Stage started", stage=stage)

    def log_stage_complete(self, stage: str, duration_seconds: float, **kwargs) -> None:
        self.info("Stage complete", stage=stage, duration=f"{duration_seconds:.2f}s", **kwargs)

    def log_error_with_traceback(self, message: str, exception: Exception, **kwargs) -> None:
        """
        Log error with exception traceback.

        The traceback goes to DEBUG so the console stays readable.
        """
        self.error(f"{message}: {exception}", **kwargs)
        self.debug(f"Traceback: {traceback.format_exc()}")

    def log_performance_metric(self, operation: str, duration_ms: float, **kwargs) -> None:
        self.debug(f"Performance metric: {operation}", duration_ms=f"{duration_ms:.1f}", **kwargs)
