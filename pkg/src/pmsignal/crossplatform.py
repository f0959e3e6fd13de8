"""Cross-platform signal aggregation, divergence and YES/NO consistency."""
from __future__ import annotations

import bisect
import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

import numpy as np

from .errors import (
    EmptySeries,
    InputError,
    MalformedRecord,
    MissingNoPrice,
    MissingPlatformPrice,
    WeightSumViolation,
)
from .timeutil import parse_instant, utc_day

log = logging.getLogger(__name__)

QUOTE_COLUMNS = ("timestamp", "platform_id", "market_id", "yes_price", "no_price")
WEIGHT_TOL = 1e-9
# prices carry at most 6 decimals; rounding strips float noise at boundaries
_ROUND_DIGITS = 10


@dataclass(frozen=True)
class PlatformQuote:
    platform_id: str
    timestamp: int
    yes_price: float
    no_price: float | None = None
    market_id: str = ""

    def __post_init__(self):
        for name in ("yes_price", "no_price"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise InputError(f"{name} {v!r} outside [0, 1]")


@dataclass
class WeightSchedule:
    """Piecewise-constant platform weights.

    ``steps[platform]`` is a time-sorted list of (timestamp, weight); the weight
    in force at t is the last step at or before t (the first step also covers
    earlier instants).
    """

    steps: dict[str, list[tuple[int, float]]] = field(default_factory=dict)

    @classmethod
    def constant(cls, weights: Mapping[str, float]) -> "WeightSchedule":
        return cls({k: [(0, float(w))] for k, w in weights.items()})

    @classmethod
    def from_json(cls, obj) -> "WeightSchedule":
        if not isinstance(obj, dict) or not obj:
            raise InputError("weight schedule must be a non-empty JSON object")
        steps = {}
        for platform, spec in obj.items():
            if isinstance(spec, (int, float)) and not isinstance(spec, bool):
                steps[platform] = [(0, float(spec))]
            elif isinstance(spec, list) and spec:
                pairs = sorted((parse_instant(ts), float(w)) for ts, w in spec)
                steps[platform] = pairs
            else:
                raise InputError(f"bad weight entry for {platform!r}")
            if any(w < 0 for _, w in steps[platform]):
                raise WeightSumViolation(f"negative weight for {platform!r}")
        return cls(steps)

    def weights_at(self, t: int) -> dict[str, float]:
        out = {}
        for platform, pairs in self.steps.items():
            i = bisect.bisect_right([ts for ts, _ in pairs], t) - 1
            out[platform] = pairs[max(i, 0)][1]
        return out


def common_knowledge_signal(
    prices: Mapping[str, float],
    weights: WeightSchedule | Mapping[str, float],
    t: int = 0,
) -> float:
    """Weighted average sum_k w_k(t) p_k; clipped into [min p_k, max p_k]."""
    w = weights.weights_at(t) if isinstance(weights, WeightSchedule) else dict(weights)
    if abs(math.fsum(w.values()) - 1.0) > WEIGHT_TOL:
        raise WeightSumViolation(f"weights sum to {math.fsum(w.values())!r} at t={t}")
    if any(v < 0 for v in w.values()):
        raise WeightSumViolation("weights must be nonnegative")
    missing = [k for k in w if k not in prices or prices[k] is None]
    if missing:
        raise MissingPlatformPrice(f"no price for platforms {sorted(missing)} at t={t}")
    ps = [prices[k] for k in w]
    value = math.fsum(w[k] * prices[k] for k in w)
    return min(max(value, min(ps)), max(ps))


# -- alignment and spreads -------------------------------------------------


def _as_arrays(series) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(series, tuple) and len(series) == 2 and isinstance(series[0], np.ndarray):
        ts, ps = series
    else:
        pairs = sorted(series, key=lambda x: x[0])
        ts = np.array([p[0] for p in pairs], dtype=np.int64)
        ps = np.array([p[1] for p in pairs], dtype=float)
    return np.asarray(ts, dtype=np.int64), np.asarray(ps, dtype=float)


def align_locf(*series) -> tuple[np.ndarray, list[np.ndarray]]:
    """Union grid with last-observation carry-forward.

    The grid starts at the latest first observation so no series is ever
    filled before it exists.
    """
    arrays = [_as_arrays(s) for s in series]
    if any(len(ts) == 0 for ts, _ in arrays):
        raise EmptySeries("cannot align an empty series")
    start = max(int(ts[0]) for ts, _ in arrays)
    grid = np.unique(np.concatenate([ts for ts, _ in arrays]))
    grid = grid[grid >= start]
    # duplicate timestamps: the last observation at a time wins
    aligned = [ps[np.searchsorted(ts, grid, side="right") - 1] for ts, ps in arrays]
    return grid, aligned


@dataclass(frozen=True)
class SpreadSeries:
    timestamps: np.ndarray
    price_a: np.ndarray
    price_b: np.ndarray
    spread_pp: np.ndarray
    breach: np.ndarray
    break_even: float

    @property
    def n_breaches(self) -> int:
        return int(self.breach.sum())


def divergence_spread(series_a, series_b, break_even: float = 2.0) -> SpreadSeries:
    """Absolute spread in percentage points and strict breaches of break_even."""
    if not break_even >= 0:
        raise InputError(f"break_even must be >= 0, got {break_even}")
    grid, (a, b) = align_locf(series_a, series_b)
    spread = np.round(np.abs(a - b) * 100.0, _ROUND_DIGITS)
    return SpreadSeries(grid, a, b, spread, spread > break_even, float(break_even))


# -- internal consistency --------------------------------------------------


@dataclass(frozen=True)
class ConsistencyResult:
    deviation: float
    consistent: bool


def internal_consistency(quote: PlatformQuote, tolerance: float = 0.0) -> ConsistencyResult:
    """|yes + no - 1| against an inclusive tolerance."""
    if quote.no_price is None:
        raise MissingNoPrice(f"{quote.platform_id} quote at {quote.timestamp} has no no_price")
    if not tolerance >= 0:
        raise InputError("tolerance must be >= 0")
    deviation = round(abs(quote.yes_price + quote.no_price - 1.0), _ROUND_DIGITS)
    return ConsistencyResult(deviation, deviation <= tolerance)


@dataclass
class ConsistencyScan:
    days_total: int
    days_violating: int
    per_day: dict[str, bool]
    skipped: list[tuple[str, str]]

    def to_dict(self) -> dict:
        return {
            "days_total": self.days_total,
            "days_violating": self.days_violating,
            "per_day": dict(sorted(self.per_day.items())),
            "skipped": [{"day": d, "platform_id": p} for d, p in self.skipped],
        }


def consistency_scan(quotes: Sequence[PlatformQuote], tolerance: float = 0.0) -> ConsistencyScan:
    """A UTC day violates when any platform has an inconsistent quote that day.

    Platforms without a no_price on a day sit that day out (logged).
    """
    by_day: dict[str, dict[str, list[PlatformQuote]]] = {}
    for q in quotes:
        by_day.setdefault(utc_day(q.timestamp), {}).setdefault(q.platform_id, []).append(q)
    per_day: dict[str, bool] = {}
    skipped = []
    for day in sorted(by_day):
        violating = False
        for platform in sorted(by_day[day]):
            usable = [q for q in by_day[day][platform] if q.no_price is not None]
            if not usable:
                log.warning("%s: %s has no no_price, skipped", day, platform)
                skipped.append((day, platform))
                continue
            if any(not internal_consistency(q, tolerance).consistent for q in usable):
                violating = True
        per_day[day] = violating
    return ConsistencyScan(len(per_day), sum(per_day.values()), per_day, skipped)


# -- file formats ----------------------------------------------------------


def parse_quotes(stream: IO[str] | str) -> list[PlatformQuote]:
    text = stream if isinstance(stream, str) else stream.read()
    reader = csv.DictReader(io.StringIO(text, newline=""))
    if reader.fieldnames is None:
        raise MalformedRecord(1, "missing header row")
    missing = [c for c in QUOTE_COLUMNS if c not in [f.strip() for f in reader.fieldnames]]
    if missing:
        raise MalformedRecord(1, f"header lacks columns {missing}")
    out = []
    for rec in reader:
        line = reader.line_num
        rec = {k.strip(): (v or "").strip() for k, v in rec.items() if k is not None}
        try:
            out.append(
                PlatformQuote(
                    platform_id=rec["platform_id"],
                    timestamp=parse_instant(rec["timestamp"]),
                    yes_price=float(rec["yes_price"]),
                    no_price=float(rec["no_price"]) if rec["no_price"] else None,
                    market_id=rec["market_id"],
                )
            )
        except (ValueError, InputError) as exc:
            raise MalformedRecord(line, str(exc)) from None
    return out


def read_quotes(path) -> list[PlatformQuote]:
    with open(path, encoding="utf-8") as fh:
        return parse_quotes(fh)


def read_weights(path) -> WeightSchedule:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"weights file is not JSON: {exc}") from None
    return WeightSchedule.from_json(obj)


def yes_series(quotes: Sequence[PlatformQuote]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Per-platform time-sorted YES price series."""
    grouped: dict[str, list[tuple[int, float]]] = {}
    for q in quotes:
        grouped.setdefault(q.platform_id, []).append((q.timestamp, q.yes_price))
    return {k: _as_arrays(v) for k, v in sorted(grouped.items())}


def common_knowledge_series(
    series: Mapping[str, tuple[np.ndarray, np.ndarray]], weights: WeightSchedule
) -> tuple[np.ndarray, np.ndarray]:
    platforms = sorted(weights.steps)
    missing = [p for p in platforms if p not in series]
    if missing:
        raise MissingPlatformPrice(f"no quotes for weighted platforms {missing}")
    grid, aligned = align_locf(*(series[p] for p in platforms))
    values = np.array(
        [
            common_knowledge_signal({p: float(col[i]) for p, col in zip(platforms, aligned)}, weights, int(t))
            for i, t in enumerate(grid)
        ]
    )
    return grid, values
