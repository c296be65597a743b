# src/core/utils.py
import logging
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np
import structlog

from .config import config

T = TypeVar("T")
R = TypeVar("R")


def configure_logging(level: Optional[str] = None, log_format: Optional[str] = None) -> None:
    """
    Configure structlog for the process.

    Everything is written to stderr so that stdout stays reserved for
    command payloads.

    Args:
        level: Log level name (defaults to config.log_level)
        log_format: "console" or "json" (defaults to config.log_format)
    """
    level_name = (level or config.log_level).upper()
    numeric_level = getattr(logging, level_name, logging.INFO)
    renderer = (
        structlog.processors.JSONRenderer()
        if (log_format or config.log_format) == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    logging.basicConfig(level=numeric_level, stream=sys.stderr, format="%(message)s")
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def substream(seed: Optional[int], label: str, *counters: int) -> np.random.Generator:
    """
    Derive an independent random generator from a root seed.

    The stream depends only on (seed, label, counters), never on the order
    in which streams are created, so parallel and serial execution draw
    identical numbers.

    Args:
        seed: Root 64-bit seed (None draws fresh OS entropy)
        label: Fixed subsystem label, e.g. "moran" or "impacts"
        counters: Chunk or replication indices

    Returns:
        np.random.Generator: Generator for this substream
    """
    if seed is None:
        return np.random.default_rng()
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode("utf-8"))]
    entropy.extend(int(c) for c in counters)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def resolve_threads(threads: Optional[int] = None) -> int:
    """Number of worker threads, capped by config.threads"""
    cap = max(1, int(config.threads))
    if threads is None:
        return cap
    return max(1, min(int(threads), cap))


def ordered_map(func: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply func to items, possibly concurrently, returning results in input order.

    Args:
        func: Function to apply
        items: Work items
        threads: Requested worker count (capped by config.threads)

    Returns:
        List[R]: Results aligned with items
    """
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def chunk_sizes(total: int, chunk: int) -> List[int]:
    """Split total into consecutive chunk sizes"""
    if total <= 0:
        return []
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def zscore(values: np.ndarray) -> np.ndarray:
    """
    Standardize columns to mean 0 and sample standard deviation 1 (n-1 denominator).

    Args:
        values: 1-D or 2-D array

    Returns:
        np.ndarray: Standardized copy
    """
    arr = np.asarray(values, dtype=float)
    mean = arr.mean(axis=0)
    sd = arr.std(axis=0, ddof=1)
    return (arr - mean) / sd


def parse_float_list(text: Optional[str]) -> List[float]:
    """Parse '1,-1,0.5' into floats; empty or None gives []"""
    if text is None or not text.strip():
        return []
    return [float(part) for part in text.split(",") if part.strip()]


def parse_name_list(text: Optional[str]) -> List[str]:
    """Parse 'a, b,c' into names"""
    if text is None:
        return []
    return [part.strip() for part in text.split(",") if part.strip()]


class Timer:
    """Simple timer utility for measuring execution time"""

    def __init__(self):
        self.start_time = None
        self.end_time = None

    def start(self):
        """Start the timer"""
        self.start_time = datetime.now(timezone.utc)
        return self

    def stop(self):
        """Stop the timer"""
        self.end_time = datetime.now(timezone.utc)
        return self

    def elapsed_ms(self) -> int:
        """Get elapsed time in milliseconds"""
        if self.start_time is None:
            return 0

        end = self.end_time or datetime.now(timezone.utc)
        delta = end - self.start_time
        return int(delta.total_seconds() * 1000)

    def __enter__(self):
        return self.start()

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.stop()
