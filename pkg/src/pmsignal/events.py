"""Shock event studies and lambda maturation profiles."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .diagnostics import DiagnosticsConfig, DiagnosticsReport, diagnose, kyle_lambda
from .errors import (
    ConfigInvalid,
    DegenerateFlow,
    EmptyGrid,
    InsufficientData,
    NoBaseline,
)
from .timeutil import HOUR, MINUTE, format_instant, parse_duration, parse_instant
from .trades import ReturnSeries, Trade, bin_prices, slice_window


@dataclass(frozen=True)
class EventSpec:
    event_id: str
    market_id: str
    event_time: int
    pre_window: int = 4 * HOUR
    post_window: int = 4 * HOUR
    peak_search: int = 30 * MINUTE
    baseline: str = "last"  # or "mean" of pre-window trade prices

    def __post_init__(self):
        if min(self.pre_window, self.post_window, self.peak_search) <= 0:
            raise ConfigInvalid(f"{self.event_id}: durations must be > 0")
        if self.peak_search > self.post_window:
            raise ConfigInvalid(f"{self.event_id}: peak_search exceeds post_window")
        if self.baseline not in ("last", "mean"):
            raise ConfigInvalid(f"{self.event_id}: baseline must be 'last' or 'mean'")

    @classmethod
    def from_dict(cls, d: dict) -> "EventSpec":
        try:
            kwargs = {
                "event_id": str(d["event_id"]),
                "market_id": str(d["market_id"]),
                "event_time": parse_instant(d["event_time"]),
            }
        except (KeyError, ValueError) as exc:
            raise ConfigInvalid(f"bad event spec: {exc}") from None
        for key in ("pre_window", "post_window", "peak_search"):
            if key in d:
                try:
                    kwargs[key] = parse_duration(d[key])
                except ValueError as exc:
                    raise ConfigInvalid(f"{kwargs['event_id']}: {exc}") from None
        if "baseline" in d:
            kwargs["baseline"] = d["baseline"]
        return cls(**kwargs)


@dataclass(frozen=True)
class EventReport:
    event_id: str
    baseline_price: float
    dp_immediate: float
    dp_4h: float
    diagnostics: DiagnosticsReport
    path: ReturnSeries

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "baseline_price": self.baseline_price,
            "dp_immediate": self.dp_immediate,
            "dp_4h": self.dp_4h,
            "diagnostics": self.diagnostics.to_dict(),
        }

    def path_rows(self) -> list[tuple[str, float]]:
        return [(format_instant(int(t)), float(p)) for t, p in zip(self.path.bin_starts, self.path.prices)]


def run_event_study(trades: Sequence[Trade], spec: EventSpec, config: DiagnosticsConfig) -> EventReport:
    """Baseline, peak and end-of-window displacement plus post-window diagnostics."""
    pre = slice_window(trades, spec.event_time - spec.pre_window, spec.pre_window, spec.market_id)
    if len(pre) == 0:
        raise NoBaseline(f"{spec.event_id}: no trade before event_time")
    if spec.baseline == "last":
        baseline = pre.trades[-1].price
    else:
        baseline = math.fsum(t.price for t in pre.trades) / len(pre)

    post = slice_window(trades, spec.event_time, spec.post_window, spec.market_id)
    if len(post) == 0:
        raise InsufficientData(f"{spec.event_id}: no trades after event_time")
    occupied = len({(t.timestamp - post.start) // config.bin_width for t in post.trades})
    if occupied < config.min_bins:
        raise InsufficientData(
            f"{spec.event_id}: trades in {occupied} post-event bins, need >= {config.min_bins}"
        )
    path = bin_prices(post, config.bin_width)

    in_search = path.bin_starts < spec.event_time + spec.peak_search
    moves = path.prices[in_search] - baseline
    dp_immediate = float(moves[int(np.argmax(np.abs(moves)))]) if moves.size else 0.0
    dp_4h = float(path.prices[-1] - baseline)

    return EventReport(
        event_id=spec.event_id,
        baseline_price=float(baseline),
        dp_immediate=dp_immediate,
        dp_4h=dp_4h,
        diagnostics=diagnose(post, config),
        path=path,
    )


@dataclass(frozen=True)
class MaturationPoint:
    window_start: int
    lambda_: float | None
    gap_reason: str | None = None

    @property
    def is_gap(self) -> bool:
        return self.lambda_ is None


def maturation_profile(
    trades: Sequence[Trade],
    grid: Sequence[tuple[int, int]],
    config: DiagnosticsConfig,
    market_id: str | None = None,
) -> list[MaturationPoint]:
    """Kyle's lambda per (start, duration) window, in grid order.

    Windows where lambda cannot be estimated come back as gap points carrying
    the error name.
    """
    if not grid:
        raise EmptyGrid("maturation grid is empty")
    out = []
    for start, duration in grid:
        window = slice_window(trades, start, duration, market_id)
        try:
            lam = kyle_lambda(window, config.bin_width)
        except (InsufficientData, DegenerateFlow) as exc:
            out.append(MaturationPoint(start, None, type(exc).__name__))
        else:
            out.append(MaturationPoint(start, lam))
    return out


def load_maturation_grid(path) -> list[tuple[int, int]]:
    """``{"grid": [[start, duration], ...]}``; bare durations are seconds."""
    try:
        with open(path, encoding="utf-8") as fh:
            rows = json.load(fh)["grid"]
        return [(parse_instant(start), parse_duration(duration)) for start, duration in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad maturation grid {path}: {exc}") from None
