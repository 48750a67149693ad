import logging
from pathlib import Path
import re
import uuid

import pytest

from refill.logging import (
    COMPONENTS,
    get_default_log_dir,
    get_logger,
    set_console_level,
    setup_logging,
)


def _unique_name() -> str:
    return f"test_{uuid.uuid4().hex[:8]}"


class TestGetDefaultLogDir:
    def test_returns_refill_dir_under_home(self) -> None:
        assert get_default_log_dir() == Path.home() / ".logs" / "refill"


class TestGetLogger:
    def test_returns_same_logger_for_same_name(self) -> None:
        name = _unique_name()
        assert get_logger(name) is get_logger(name)

    def test_sets_debug_level(self) -> None:
        assert get_logger(_unique_name()).level == logging.DEBUG

    def test_console_handler_at_info(self) -> None:
        logger = get_logger(_unique_name())
        handlers = [h for h in logger.handlers if type(h) is logging.StreamHandler]
        assert len(handlers) == 1
        assert handlers[0].level == logging.INFO

    def test_no_file_handler_without_log_dir(self) -> None:
        logger = get_logger(_unique_name())
        assert not any(isinstance(h, logging.FileHandler) for h in logger.handlers)

    def test_log_file_named_by_date(self, temp_log_dir: Path) -> None:
        logger = get_logger(_unique_name(), temp_log_dir)
        logger.info("training started")
        for handler in logger.handlers:
            handler.flush()

        log_files = list(temp_log_dir.glob("*.log"))
        assert len(log_files) == 1
        assert re.fullmatch(r"refill-\d{4}-\d{2}-\d{2}\.log", log_files[0].name)

    def test_log_line_format(self, temp_log_dir: Path) -> None:
        logger = get_logger(_unique_name(), temp_log_dir)
        logger.info("fill=37")
        for handler in logger.handlers:
            handler.flush()

        content = next(iter(temp_log_dir.glob("*.log"))).read_text().strip()
        pattern = r"\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2} - INFO - fill=37"
        assert re.match(pattern, content), content

    def test_log_directory_created(self, tmp_path: Path) -> None:
        log_dir = tmp_path / "nested" / "logs"
        get_logger(_unique_name(), log_dir)
        assert log_dir.exists()

    def test_records_reach_caplog(
        self, temp_log_dir: Path, caplog: pytest.LogCaptureFixture
    ) -> None:
        logger = get_logger(_unique_name(), temp_log_dir)
        logger.debug("debug message")
        logger.warning("warning message")

        assert [r.levelname for r in caplog.records] == ["DEBUG", "WARNING"]


class TestSetupLogging:
    def test_creates_one_logger_per_component(self, temp_log_dir: Path) -> None:
        loggers = setup_logging(temp_log_dir)
        assert set(loggers) == set(COMPONENTS)
        assert "refill.training" in loggers

    def test_components_share_one_file(self, temp_log_dir: Path) -> None:
        loggers = setup_logging(temp_log_dir)
        for name, logger in loggers.items():
            logger.info(f"hello from {name}")
            for handler in logger.handlers:
                handler.flush()

        assert len(list(temp_log_dir.glob("*.log"))) == 1

    def test_late_log_dir_attaches_file_handler(self, temp_log_dir: Path) -> None:
        get_logger("refill.oracle")
        loggers = setup_logging(temp_log_dir)

        handlers = loggers["refill.oracle"].handlers
        assert any(isinstance(h, logging.FileHandler) for h in handlers)
        assert sum(type(h) is logging.StreamHandler for h in handlers) == 1

    def test_without_log_dir_console_only(self) -> None:
        loggers = setup_logging(None)
        for logger in loggers.values():
            assert not any(isinstance(h, logging.FileHandler) for h in logger.handlers)


class TestSetConsoleLevel:
    def test_lowers_console_handlers(self, temp_log_dir: Path) -> None:
        loggers = setup_logging(temp_log_dir)
        set_console_level(logging.DEBUG)

        for logger in loggers.values():
            consoles = [h for h in logger.handlers if type(h) is logging.StreamHandler]
            assert consoles
            assert all(h.level == logging.DEBUG for h in consoles)

    def test_raise_console_to_warning(self) -> None:
        loggers = setup_logging(None)
        set_console_level(logging.WARNING)
        for logger in loggers.values():
            assert all(h.level == logging.WARNING for h in logger.handlers)
