import logging
import sys
from pathlib import Path

VALID_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}

LOG_FORMAT = "%(asctime)s: [%(filename)s:%(lineno)d]: \t[%(levelname)s]: \t%(message)s"
# kernel workers share the parent's log file, so lines carry the process name
WORKER_LOG_FORMAT = (
    "%(asctime)s: [%(processName)s %(filename)s:%(lineno)d]: "
    "\t[%(levelname)s]: \t%(message)s"
)
DATE_FORMAT = "%H:%M:%S"


def normalize_level(log_level: str) -> str:
    level = str(log_level).upper()
    if level not in VALID_LOG_LEVELS:
        raise ValueError(
            f"Config error: Invalid log_level '{level}'. "
            f"Must be one of {', '.join(sorted(VALID_LOG_LEVELS))}."
        )
    return level


def _attach(
    root: logging.Logger,
    handler: logging.Handler,
    level: str,
    formatter: logging.Formatter,
) -> None:
    handler.setLevel(level)
    handler.setFormatter(formatter)
    root.addHandler(handler)


def setup_logging(
    log_level: str,
    output_dir: Path,
    file_logging: bool,
    log_filename: str = "hyperl4.log",
    console: bool = True,
) -> None:
    """Configure the root logger for a CLI run or a suite worker.

    Args:
        log_level: DEBUG, INFO, WARNING, ERROR or CRITICAL (any case).
        output_dir: Directory receiving the log file.
        file_logging: Also write to output_dir / log_filename.
        log_filename: hyperl4.log for the main process; suite workers pass
            "<check>.log".
        console: Attach a stdout handler. Workers run without one.
    """
    level = normalize_level(log_level)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    root = logging.getLogger()
    root.setLevel(level)
    root.handlers = []

    if console:
        _attach(root, logging.StreamHandler(sys.stdout), level, formatter)

    if not file_logging:
        return
    file_path = Path(output_dir) / log_filename
    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        _attach(
            root,
            logging.FileHandler(file_path, encoding="utf-8"),
            level,
            formatter,
        )
    except OSError as e:
        logging.getLogger(__name__).warning(
            "Failed to set up file logging at '%s': %s", file_path, e
        )


def kernel_worker_logging() -> tuple[str, str | None]:
    """(level, log file) of this process, to hand to spawned kernel workers."""
    root = logging.getLogger()
    level = logging.getLevelName(root.getEffectiveLevel())
    if level not in VALID_LOG_LEVELS:
        # NOTSET and custom levels below DEBUG
        level = "DEBUG"
    for handler in root.handlers:
        if isinstance(handler, logging.FileHandler):
            return level, handler.baseFilename
    return level, None


def init_kernel_worker(log_level: str, log_file: str | None = None) -> None:
    """ProcessPoolExecutor initializer for the resonance slab workers.

    Spawned workers start with a bare root logger. They append to the
    parent's log file when there is one and write to stderr otherwise, so
    stdout stays with the parent's summary.
    """
    level = normalize_level(log_level)
    formatter = logging.Formatter(WORKER_LOG_FORMAT, datefmt=DATE_FORMAT)
    root = logging.getLogger()
    root.setLevel(level)
    root.handlers = []
    if log_file is not None:
        try:
            _attach(
                root,
                logging.FileHandler(log_file, encoding="utf-8"),
                level,
                formatter,
            )
            return
        except OSError:
            pass
    _attach(root, logging.StreamHandler(sys.stderr), level, formatter)
