from datetime import datetime
import logging
from pathlib import Path
import sys

COMPONENT_LOGGERS: dict[str, logging.Logger] = {}

COMPONENTS = (
    "refill",
    "refill.elimination",
    "refill.heuristics",
    "refill.oracle",
    "refill.environment",
    "refill.policy",
    "refill.training",
    "refill.graph_io",
    "refill.evaluation",
)


def get_default_log_dir() -> Path:
    """Return the default log directory: ~/.logs/refill/"""
    return Path.home() / ".logs" / "refill"


def get_logger(name: str, log_dir: Path | None = None) -> logging.Logger:
    if name in COMPONENT_LOGGERS:
        return COMPONENT_LOGGERS[name]

    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    # Each component owns its handlers; records do not reach the package root.
    logger.propagate = "." not in name

    log_format = "%(asctime)s - %(levelname)s - %(message)s"
    date_format = "%Y-%m-%d %H:%M:%S"

    if log_dir is not None:
        log_dir = log_dir.expanduser()
        log_dir.mkdir(parents=True, exist_ok=True)

        date_str = datetime.now().strftime("%Y-%m-%d")
        log_file = log_dir / f"refill-{date_str}.log"

        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(log_format, datefmt=date_format))

        logger.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(logging.Formatter(log_format, datefmt=date_format))

    logger.addHandler(console_handler)

    COMPONENT_LOGGERS[name] = logger
    return logger


def setup_logging(log_dir: Path | None = None) -> dict[str, logging.Logger]:
    """Register one logger per component, all sharing ``log_dir``.

    Loggers created earlier without a file handler get one attached so that a
    late ``--log-dir`` still captures every component.
    """
    loggers: dict[str, logging.Logger] = {}

    for component in COMPONENTS:
        logger = get_logger(component, log_dir)
        if log_dir is not None and not any(
            isinstance(h, logging.FileHandler) for h in logger.handlers
        ):
            COMPONENT_LOGGERS.pop(component)
            for handler in logger.handlers[:]:
                handler.close()
                logger.removeHandler(handler)
            logger = get_logger(component, log_dir)
        loggers[component] = logger

    return loggers


def set_console_level(level: int) -> None:
    for logger in COMPONENT_LOGGERS.values():
        for handler in logger.handlers:
            if type(handler) is logging.StreamHandler:
                handler.setLevel(level)
