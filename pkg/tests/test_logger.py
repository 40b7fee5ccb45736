import logging

from rich.logging import RichHandler

from fermi_trap.logger import get_logger_config, setup_rich_logger


def test_level_names():
    assert get_logger_config("debug").level == logging.DEBUG
    assert get_logger_config("WARNING").level == logging.WARNING
    assert get_logger_config("chatty").level == logging.INFO


def test_setup_installs_one_rich_handler():
    setup_rich_logger("DEBUG")
    root = logging.getLogger()
    assert root.level == logging.DEBUG
    assert [type(handler) for handler in root.handlers] == [RichHandler]
    assert logging.getLogger("fermi_trap.theory.matrix_elements").propagate
    setup_rich_logger("INFO")
    assert root.level == logging.INFO
