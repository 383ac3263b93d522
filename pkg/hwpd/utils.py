import hashlib
import io
import logging
import multiprocessing as mp
import os
from datetime import datetime
from functools import partial
from multiprocessing import Pool
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar

from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")

LOG_LEVEL_ENV = "HWPD_LOG"

logger = logging.getLogger(__name__)


class TqdmToLogger(io.StringIO):
    """
    Output stream for TQDM which will output to logger module instead of
    the StdOut.
    """

    def __init__(self, base_logger, level=None):
        super(TqdmToLogger, self).__init__()
        self.logger = base_logger
        self.level = level or logging.INFO
        self.buf = ""

    def write(self, buf):
        self.buf = buf.strip("\r\n\t ")

    def flush(self):
        if self.buf:
            self.logger.log(self.level, self.buf)


class log_exec_timer:
    def __init__(self, name: Optional[str] = None):
        self.name = name
        self._start = None
        self._duration = None

    def __enter__(self):
        self._start = datetime.now()
        return self

    def __exit__(self, typ, value, traceback):
        self._duration = (datetime.now() - self._start).total_seconds()
        msg = (
            f"Exec time of {self.name}: {self._duration}"
            if self.name
            else f"Exec time: {self._duration}"
        )
        logger.info(msg)

    @property
    def duration(self):
        return self._duration


def progress(items: Iterable[T], desc: str, total: Optional[int] = None, base_logger=None) -> Iterable[T]:
    """Wraps an iterable into tqdm that reports into the logger."""
    out = TqdmToLogger(base_logger or logger, level=logging.DEBUG)
    return tqdm(items, desc=desc, total=total, file=out, mininterval=5)


def parallel_map(func: Callable[..., R], items: List[T], n_workers: int = 1, desc: Optional[str] = None,
                 **kwargs) -> List[R]:
    """
    Applies func to every item preserving the input order.

    :param func: a picklable function applied to each item
    :param items: inputs
    :param n_workers: amount of processes. In case of -1 takes all the available cores.
        With 1 the work is done in the calling process.
    :param desc: progress bar description
    :param kwargs: additional keyword parameters of func
    :return: list of results aligned with items
    """
    if n_workers == -1:
        n_workers = max(mp.cpu_count() - 1, 1)
    func_with_args = partial(func, **kwargs) if kwargs else func
    desc = desc or getattr(func, "__name__", "work")

    if n_workers <= 1 or len(items) <= 1:
        return [func_with_args(item) for item in progress(items, desc=desc, total=len(items))]

    with Pool(min(n_workers, len(items))) as pool:
        return list(progress(pool.imap(func_with_args, items), desc=desc, total=len(items)))


def sha256_of_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_of_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def resolve_log_level(verbose: bool = False) -> int:
    if verbose:
        return logging.DEBUG
    level = os.environ.get(LOG_LEVEL_ENV)
    if not level:
        return logging.INFO
    if level.isdigit():
        return int(level)
    resolved = logging.getLevelName(level.upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def make_log_config_dict(filename: Optional[str] = None, level: int = logging.INFO) -> Dict[str, Any]:
    """
    Builds a dictConfig with a stderr handler on the root logger and, if filename
    is given, a sidecar file handler on the ``hwpd`` logger that always records DEBUG.
    """
    if filename is not None:
        logfile_handler = {
            "logfile": {
                "level": "DEBUG",
                "formatter": "standard",
                "class": "logging.FileHandler",
                "filename": filename,
                "mode": "w",
                "encoding": "utf-8",
            }
        }
        handlers = ["logfile"]
    else:
        logfile_handler = dict()
        handlers = []

    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "standard": {
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
            },
        },
        "handlers": {
            "default": {
                "level": logging.getLevelName(level),
                "formatter": "standard",
                "class": "logging.StreamHandler",
                "stream": "ext://sys.stderr",
            },
            **logfile_handler
        },
        "loggers": {
            "hwpd": {
                "handlers": handlers,
                "level": "DEBUG",
                "propagate": True,
            },
        },
        "root": {
            "handlers": ["default"],
            "level": logging.getLevelName(level),
        },
    }
