"""Trade log ingestion, windowing and event-time binning."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import (
    EmptyWindow,
    InputError,
    MalformedRecord,
    NonPositiveSize,
    PriceOutOfRange,
    UnknownSide,
)
from .timeutil import MINUTE, format_instant, parse_instant

CSV_COLUMNS = ("timestamp", "market_id", "platform_id", "side", "price", "size", "trader_id")
DEFAULT_BIN_WIDTH = 5 * MINUTE


class Side(str, Enum):
    BUY = "BUY"
    SELL = "SELL"

    @property
    def sign(self) -> int:
        return 1 if self is Side.BUY else -1


@dataclass(frozen=True)
class Trade:
    """One executed transaction on the YES contract.

    ``side`` is the taker direction; ``timestamp`` is UTC epoch milliseconds.
    """

    timestamp: int
    market_id: str
    platform_id: str
    side: Side
    price: float
    size: float
    trader_id: str | None = None

    def __post_init__(self):
        # numpy scalars would leak into CSV output through repr
        object.__setattr__(self, "price", float(self.price))
        object.__setattr__(self, "size", float(self.size))
        object.__setattr__(self, "timestamp", int(self.timestamp))
        if not (0.0 <= self.price <= 1.0):
            raise PriceOutOfRange(0, f"price {self.price!r} outside [0, 1]")
        if not (self.size > 0.0) or math.isinf(self.size):
            raise NonPositiveSize(0, f"size {self.size!r} must be finite and > 0")

    @property
    def signed_size(self) -> float:
        return self.side.sign * self.size


@dataclass(frozen=True)
class TradeWindow:
    market_id: str
    start: int
    end: int
    trades: tuple[Trade, ...] = ()

    def __post_init__(self):
        if not self.start < self.end:
            raise InputError(f"window start {self.start} must precede end {self.end}")

    def __len__(self) -> int:
        return len(self.trades)

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class ReturnSeries:
    """Per-bin closing prices on a regular grid starting at ``origin``.

    ``returns`` is derived, so ``len(returns) == len(prices) - 1`` always holds.
    """

    bin_width: int
    origin: int
    prices: np.ndarray = field(repr=False)

    @property
    def returns(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.diff(np.log(self.prices))

    @property
    def bin_starts(self) -> np.ndarray:
        return self.origin + self.bin_width * np.arange(len(self.prices), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.prices)


# -- parsing ---------------------------------------------------------------


def _record_to_trade(rec: dict, line: int) -> Trade:
    try:
        ts = parse_instant(rec["timestamp"])
    except (KeyError, TypeError, ValueError, OverflowError) as exc:
        raise MalformedRecord(line, f"bad timestamp: {exc}") from None
    side_raw = str(rec.get("side", "")).strip().upper()
    try:
        side = Side(side_raw)
    except ValueError:
        raise UnknownSide(line, f"unknown side {rec.get('side')!r}") from None
    try:
        price = float(rec["price"])
        size = float(rec["size"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(line, f"bad numeric field: {exc}") from None
    if not (0.0 <= price <= 1.0):
        raise PriceOutOfRange(line, f"price {rec['price']!r} outside [0, 1]")
    if not (size > 0.0) or math.isinf(size):
        raise NonPositiveSize(line, f"size {rec['size']!r} must be > 0")
    market_id = rec.get("market_id")
    platform_id = rec.get("platform_id")
    if market_id in (None, "") or platform_id in (None, ""):
        raise MalformedRecord(line, "market_id and platform_id are required")
    trader = rec.get("trader_id")
    trader = None if trader in (None, "") else str(trader)
    return Trade(ts, str(market_id), str(platform_id), side, price, size, trader)


def parse_trade_log(stream: IO[bytes] | bytes | str, fmt: str = "csv") -> list[Trade]:
    """Parse a CSV or JSONL trade log into validated trades, in file order.

    Line numbers in errors are 1-based physical lines (the CSV header is line 1).
    """
    if isinstance(stream, (bytes, bytearray)):
        raw = bytes(stream)
    elif isinstance(stream, str):
        raw = stream.encode("utf-8")
    else:
        raw = stream.read()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(0, f"not UTF-8: {exc}") from None

    fmt = fmt.lower()
    trades: list[Trade] = []
    if fmt == "csv":
        reader = csv.reader(io.StringIO(text, newline=""))
        header = next(reader, None)
        if header is None:
            raise MalformedRecord(1, "missing header row")
        header = [h.strip() for h in header]
        missing = [c for c in CSV_COLUMNS if c != "trader_id" and c not in header]
        if missing:
            raise MalformedRecord(1, f"header lacks columns {missing}")
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) > len(header):
                raise MalformedRecord(line, f"expected {len(header)} fields, got {len(row)}")
            rec = dict(zip(header, (cell.strip() for cell in row)))
            trades.append(_record_to_trade(rec, line))
    elif fmt == "jsonl":
        for line, raw_line in enumerate(text.splitlines(), start=1):
            if not raw_line.strip():
                continue
            try:
                rec = json.loads(raw_line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line, f"invalid JSON: {exc.msg}") from None
            if not isinstance(rec, dict):
                raise MalformedRecord(line, "expected a JSON object")
            trades.append(_record_to_trade(rec, line))
    else:
        raise InputError(f"unknown trade log format {fmt!r}")
    return trades


def read_trade_log(path, fmt: str | None = None) -> list[Trade]:
    path = str(path)
    if fmt is None:
        fmt = "jsonl" if path.endswith((".jsonl", ".ndjson")) else "csv"
    with open(path, "rb") as fh:
        return parse_trade_log(fh, fmt)


def write_trade_csv(trades: Iterable[Trade], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for t in trades:
        writer.writerow(
            [
                format_instant(t.timestamp),
                t.market_id,
                t.platform_id,
                t.side.value,
                repr(t.price),
                repr(t.size),
                t.trader_id or "",
            ]
        )


def trades_to_csv(trades: Iterable[Trade]) -> str:
    buf = io.StringIO()
    write_trade_csv(trades, buf)
    return buf.getvalue()


# -- windows and bins ------------------------------------------------------


def slice_window(
    trades: Sequence[Trade] | TradeWindow,
    start: int,
    duration: int,
    market_id: str | None = None,
) -> TradeWindow:
    """Trades with ``start <= timestamp < start + duration``, order preserved."""
    if duration <= 0:
        raise InputError(f"duration must be > 0, got {duration}")
    source = trades.trades if isinstance(trades, TradeWindow) else trades
    wanted = market_id
    if market_id is None:
        if isinstance(trades, TradeWindow):
            market_id = trades.market_id
        else:
            market_id = source[0].market_id if source else ""
    end = start + duration
    kept = tuple(
        t
        for t in source
        if start <= t.timestamp < end and (wanted is None or t.market_id == wanted)
    )
    # stable sort: ties keep input order
    kept = tuple(sorted(kept, key=lambda t: t.timestamp))
    return TradeWindow(market_id, start, end, kept)


def bin_index(window: TradeWindow, bin_width: int) -> tuple[np.ndarray, int]:
    """Bin number of each trade relative to ``window.start`` and the bin count."""
    if bin_width <= 0:
        raise InputError(f"bin_width must be > 0, got {bin_width}")
    ts = np.fromiter((t.timestamp for t in window.trades), dtype=np.int64, count=len(window))
    idx = (ts - window.start) // bin_width
    n_bins = -(-(window.end - window.start) // bin_width)
    return idx, int(n_bins)


def bin_prices(window: TradeWindow, bin_width: int = DEFAULT_BIN_WIDTH) -> ReturnSeries:
    """Close-of-bin prices across the window, carrying forward over empty bins.

    Bins before the first trade are dropped; the grid then runs to the end of
    the window.
    """
    if len(window) == 0:
        raise EmptyWindow(f"no trades in window for market {window.market_id!r}")
    idx, n_bins = bin_index(window, bin_width)
    first = int(idx.min())
    closes = np.full(n_bins, np.nan)
    # trades are time-ordered, so the last write per bin is the close
    for k, t in zip(idx, window.trades):
        closes[k] = t.price
    closes = closes[first:]
    for k in range(1, len(closes)):
        if np.isnan(closes[k]):
            closes[k] = closes[k - 1]
    return ReturnSeries(bin_width, window.start + first * bin_width, closes)


def signed_volume_by_bin(window: TradeWindow, bin_width: int) -> np.ndarray:
    """Net signed size per bin over the full window grid (BUY positive)."""
    idx, n_bins = bin_index(window, bin_width)
    flow = np.zeros(n_bins)
    signed = np.fromiter((t.signed_size for t in window.trades), dtype=float, count=len(window))
    np.add.at(flow, idx, signed)
    return flow
