import functools
import json
import logging
import logging.config
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from logging_config import LOGGING_CONFIG

logger = logging.getLogger("utils")

WORKERS_ENV = "FIBRECL_WORKERS"
LOG_FILE_NAME = "fibrecl.log"


class FibreclError(Exception):
    """Base class for library errors."""


class WordSyntaxError(FibreclError):
    pass


class UnknownGeneratorError(FibreclError):
    pass


class PresentationSyntaxError(FibreclError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class EmptyRelatorError(FibreclError):
    pass


class NoRelatorsError(FibreclError):
    pass


class NotSmallCancellationError(FibreclError):
    pass


class AlphabetClashError(FibreclError):
    pass


class InvalidCapsError(FibreclError):
    pass


class CertificateError(FibreclError):
    pass


class NonMemberError(FibreclError):
    pass


class ConstructionError(FibreclError):
    pass


class RootNotFoundError(FibreclError):
    pass


class ConfigError(FibreclError):
    pass


class StageError(FibreclError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class NonErrorFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool | logging.LogRecord:
        return record.levelno <= logging.INFO


def state_dir() -> Path:
    """
    Directory for the rotating log file.
    $XDG_STATE_HOME/fibrecl if set, otherwise ~/.fibrecl
    """
    base = os.environ.get("XDG_STATE_HOME")
    if base is None:
        return Path.home() / ".fibrecl"
    return Path(base) / "fibrecl"


def setup_logging(level: str = "WARNING") -> Path:
    log_file_path = state_dir() / LOG_FILE_NAME
    log_file_path.parent.mkdir(parents=True, exist_ok=True)

    with open(LOGGING_CONFIG) as f:
        logging_config = json.load(f)

    logging_config["handlers"]["file"]["filename"] = str(log_file_path)
    logging_config["handlers"]["console"]["level"] = level.upper()

    logging.config.dictConfig(logging_config)
    logger.debug(f"Logging to {log_file_path}")
    return log_file_path


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        count = int(raw)
    except ValueError as e:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from e
    if count < 1:
        raise ConfigError(f"{WORKERS_ENV} must be positive, got {count}")
    return count


def worker_pool() -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=worker_count(), thread_name_prefix="fibrecl")


def ordered_map(func, items: list) -> list:
    """
    Map func over items on the worker pool, returning results in input order.
    """
    if worker_count() == 1 or len(items) < 2:
        return [func(item) for item in items]
    with worker_pool() as pool:
        return list(pool.map(func, items))


def stage(name: str):
    """
    Decorator tagging failures of a pipeline step with the step name.
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except StageError:
                raise
            except FibreclError as e:
                msg = f"Error in {func.__name__}: {e}"
                logger.error(msg)
                raise StageError(name, msg) from e

        return wrapper

    return decorator


def dump_json(data) -> str:
    """Stable JSON text: fixed key order from the producers, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
