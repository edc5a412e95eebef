import logging
import sys

import pytest

from hyperl4.utils.logger import (
    init_kernel_worker,
    kernel_worker_logging,
    normalize_level,
    setup_logging,
)


def _flush():
    for handler in logging.getLogger().handlers:
        handler.flush()


def test_normalize_level():
    assert normalize_level("debug") == "DEBUG"
    with pytest.raises(ValueError, match="Invalid log_level 'LOUD'"):
        normalize_level("loud")


def test_setup_logging_writes_the_run_log(tmp_path):
    setup_logging("info", tmp_path, file_logging=True, console=False)
    logging.info("omega done")
    logging.debug("hidden")
    _flush()
    text = (tmp_path / "hyperl4.log").read_text(encoding="utf-8")
    assert "omega done" in text
    assert "hidden" not in text


def test_kernel_workers_inherit_level_and_log_file(tmp_path):
    setup_logging("debug", tmp_path, file_logging=True, console=False)
    assert kernel_worker_logging() == ("DEBUG", str(tmp_path / "hyperl4.log"))
    setup_logging("warning", tmp_path, file_logging=False, console=True)
    assert kernel_worker_logging() == ("WARNING", None)


def test_kernel_worker_appends_to_the_parent_log(tmp_path):
    log_file = tmp_path / "hyperl4.log"
    setup_logging("info", tmp_path, file_logging=True, console=False)
    logging.info("parent line")
    init_kernel_worker(*kernel_worker_logging())
    logging.info("slab 3 done")
    _flush()
    lines = log_file.read_text(encoding="utf-8").splitlines()
    assert "parent line" in lines[0]
    assert "MainProcess" in lines[1]
    assert "slab 3 done" in lines[1]


def test_kernel_worker_without_a_file_logs_to_stderr():
    init_kernel_worker("error")
    (handler,) = logging.getLogger().handlers
    assert handler.stream is sys.stderr
    assert logging.getLogger().level == logging.ERROR
