"""UTC millisecond instants and durations.

All timestamps inside the package are integer epoch milliseconds. These
helpers sit at the file boundary only.
"""
from __future__ import annotations

import re
from datetime import datetime, timezone

MS = 1
SECOND = 1000
MINUTE = 60 * SECOND
HOUR = 60 * MINUTE
DAY = 24 * HOUR

_UNITS = {
    "ms": MS,
    "s": SECOND,
    "sec": SECOND,
    "m": MINUTE,
    "min": MINUTE,
    "h": HOUR,
    "hr": HOUR,
    "d": DAY,
}
_DURATION_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([a-z]+)\s*$")
_INT_RE = re.compile(r"^[+-]?\d+$")


def parse_instant(value: str | int | float) -> int:
    """Parse ISO-8601 (naive means UTC) or integer epoch-milliseconds."""
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("timestamp not finite")
        return int(round(value))
    text = value.strip()
    if not text:
        raise ValueError("empty timestamp")
    if _INT_RE.match(text):
        return int(text)
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    delta = dt - datetime(1970, 1, 1, tzinfo=timezone.utc)
    # integer arithmetic to avoid float rounding of microseconds
    return (delta.days * 86_400 + delta.seconds) * 1000 + delta.microseconds // 1000


def format_instant(ms: int) -> str:
    """Format epoch-ms as ``YYYY-MM-DDTHH:MM:SS.mmmZ``."""
    seconds, millis = divmod(int(ms), 1000)
    dt = datetime.fromtimestamp(seconds, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S") + f".{millis:03d}Z"


def parse_duration(value: str | int | float) -> int:
    """Duration to milliseconds. Bare numbers are seconds; strings take a
    unit suffix (``ms``, ``s``, ``m``/``min``, ``h``, ``d``)."""
    if isinstance(value, bool):
        raise ValueError(f"not a duration: {value!r}")
    if isinstance(value, (int, float)):
        return int(round(value * SECOND))
    m = _DURATION_RE.match(value.lower())
    if m is None:
        try:
            return int(round(float(value) * SECOND))
        except ValueError:
            raise ValueError(f"not a duration: {value!r}") from None
    number, unit = m.groups()
    if unit not in _UNITS:
        raise ValueError(f"unknown duration unit {unit!r}")
    return int(round(float(number) * _UNITS[unit]))


def utc_day(ms: int) -> str:
    return datetime.fromtimestamp(int(ms) // 1000, tz=timezone.utc).strftime("%Y-%m-%d")
