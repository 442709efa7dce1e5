"""Logging utilities for Seminorm Lab.

This module centralizes all logging functionality including:
- Log levels and categories
- An in-memory ring buffer of recent records (stored with UTC timestamps)
- Forwarding to the standard ``logging`` logger on stderr
- CSV export of the buffered records

Stdout belongs to CLI reports, so nothing here ever prints to it.
"""

import logging
import sys
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional

UTC = timezone.utc

LOGGER_NAME = "seminorm_lab"
RING_BUFFER_SIZE = 100


class LogLevel(Enum):
    """Debug log levels."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class LogCategory(Enum):
    """Debug log categories for filtering."""
    ENGINE = "ENGINE"
    WITNESS = "WITNESS"
    MODELS = "MODELS"
    FALSIFY = "FALSIFY"
    COVERING = "COVERING"
    CARDINAL = "CARDINAL"
    CLI = "CLI"
    CONFIG = "CONFIG"
    GENERAL = "GENERAL"


_LEVEL_ORDER = {
    LogLevel.DEBUG: 0,
    LogLevel.INFO: 1,
    LogLevel.WARNING: 2,
    LogLevel.ERROR: 3,
    LogLevel.CRITICAL: 4,
}

_PY_LEVELS = {
    LogLevel.DEBUG: logging.DEBUG,
    LogLevel.INFO: logging.INFO,
    LogLevel.WARNING: logging.WARNING,
    LogLevel.ERROR: logging.ERROR,
    LogLevel.CRITICAL: logging.CRITICAL,
}

# Ring buffer of the most recent records, newest last
DEBUG_LOG: List[Dict[str, Any]] = []

logger = logging.getLogger(LOGGER_NAME)


def setup_logging(level: LogLevel = LogLevel.WARNING) -> None:
    """Attach a stderr handler to the library logger (idempotent)."""
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
        logger.addHandler(handler)
        logger.propagate = False
    logger.setLevel(_PY_LEVELS[level])


def get_utc_timestamp() -> str:
    """Get current UTC timestamp in ISO format (timezone-aware)."""
    return datetime.now(UTC).isoformat()


def format_display_time(utc_timestamp: Optional[str] = None) -> str:
    """Short UTC display format (MM/DD HH:MM:SS)."""
    try:
        if utc_timestamp is None:
            moment = datetime.now(UTC)
        else:
            moment = datetime.fromisoformat(utc_timestamp.replace('Z', '+00:00'))
        return moment.strftime('%m/%d %H:%M:%S')
    except ValueError:
        return datetime.now(UTC).strftime('%m/%d %H:%M:%S')


def _record(message: str, level: LogLevel, category: LogCategory) -> None:
    timestamp = get_utc_timestamp()
    DEBUG_LOG.append({
        'timestamp': timestamp,
        'display_time': format_display_time(timestamp),
        'level': level.value,
        'category': category.value,
        'message': message,
    })
    # Keep only last RING_BUFFER_SIZE records
    if len(DEBUG_LOG) > RING_BUFFER_SIZE:
        del DEBUG_LOG[:-RING_BUFFER_SIZE]
    logger.log(_PY_LEVELS[level], f"[{category.value}] {message}")


def log_debug(message: str, category: LogCategory = LogCategory.GENERAL) -> None:
    """Log a debug message."""
    _record(message, LogLevel.DEBUG, category)


def log_info(message: str, category: LogCategory = LogCategory.GENERAL) -> None:
    """Log an info message."""
    _record(message, LogLevel.INFO, category)


def log_warning(message: str, category: LogCategory = LogCategory.GENERAL) -> None:
    """Log a warning message."""
    _record(message, LogLevel.WARNING, category)


def log_error(message: str, category: LogCategory = LogCategory.GENERAL) -> None:
    """Log an error message."""
    _record(message, LogLevel.ERROR, category)


def get_debug_logs(level_filter: Optional[LogLevel] = None,
                   category_filter: Optional[LogCategory] = None,
                   limit: Optional[int] = 100) -> List[Dict[str, Any]]:
    """Get buffered records, newest first.

    ``level_filter`` is a minimum level; ``category_filter`` an exact match.
    """
    selected = []
    for entry in reversed(DEBUG_LOG):
        if level_filter is not None and _LEVEL_ORDER[LogLevel(entry['level'])] < _LEVEL_ORDER[level_filter]:
            continue
        if category_filter is not None and entry['category'] != category_filter.value:
            continue
        selected.append(entry)
        if limit is not None and len(selected) >= limit:
            break
    return selected


def clear_debug_logs() -> None:
    """Clear all buffered records."""
    DEBUG_LOG.clear()


def export_debug_logs(level_filter: Optional[LogLevel] = None,
                      category_filter: Optional[LogCategory] = None) -> str:
    """Export buffered records as CSV."""
    logs = get_debug_logs(level_filter, category_filter, limit=None)
    csv_lines = ['UTC Timestamp,Display Time,Level,Category,Message']

    for log in logs:
        # Escape quotes in message
        message = str(log.get('message', '')).replace('"', '""')
        csv_line = f'"{log["timestamp"]}","{log["display_time"]}","{log["level"]}","{log["category"]}","{message}"'
        csv_lines.append(csv_line)

    return '\n'.join(csv_lines)


__all__ = [
    'LogLevel',
    'LogCategory',
    'DEBUG_LOG',
    'setup_logging',
    'get_utc_timestamp',
    'format_display_time',
    'log_debug',
    'log_info',
    'log_warning',
    'log_error',
    'get_debug_logs',
    'clear_debug_logs',
    'export_debug_logs',
]
