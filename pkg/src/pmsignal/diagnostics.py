"""Per-shock signal credibility diagnostics.

VR (variance ratio), TS (two-sidedness), HHI (trader concentration), their
product SCI, and Kyle's lambda, plus the Table-1 style signal classification.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .errors import (
    ConfigInvalid,
    DegenerateFlow,
    DegenerateVariance,
    DomainError,
    EmptyWindow,
    InsufficientData,
    MissingTraderIds,
)
from .trades import DEFAULT_BIN_WIDTH, ReturnSeries, TradeWindow, bin_prices, signed_volume_by_bin

MIN_LAMBDA_BINS = 10


@dataclass(frozen=True)
class DiagnosticsConfig:
    tau: float
    vr_horizon: int = 6
    bin_width: int = DEFAULT_BIN_WIDTH
    min_bins: int = 12
    vr_band: float = 0.1
    ts_cut: float = 0.5
    component_exponents: tuple[float, float, float] = (1.0, 1.0, 1.0)
    # "gross": traded notional per trader; "net": |net signed position change|
    hhi_mode: str = "gross"

    def __post_init__(self):
        if self.vr_horizon < 2:
            raise ConfigInvalid(f"vr_horizon must be >= 2, got {self.vr_horizon}")
        if self.min_bins < 2 * self.vr_horizon:
            raise ConfigInvalid(f"min_bins must be >= 2*vr_horizon, got {self.min_bins}")
        if self.bin_width <= 0:
            raise ConfigInvalid("bin_width must be > 0")
        if not (self.tau >= 0):
            raise ConfigInvalid(f"tau must be >= 0, got {self.tau}")
        if not (self.vr_band >= 0):
            raise ConfigInvalid("vr_band must be >= 0")
        if len(self.component_exponents) != 3 or any(not (w >= 0) for w in self.component_exponents):
            raise ConfigInvalid("component_exponents must be three nonnegative reals")
        if self.hhi_mode not in ("gross", "net"):
            raise ConfigInvalid(f"hhi_mode must be 'gross' or 'net', got {self.hhi_mode!r}")
        object.__setattr__(self, "component_exponents", tuple(float(w) for w in self.component_exponents))

    @classmethod
    def from_dict(cls, d: dict) -> "DiagnosticsConfig":
        from .timeutil import parse_duration

        d = dict(d)
        if "tau" not in d:
            raise ConfigInvalid("tau is required")
        if "bin_width" in d:
            d["bin_width"] = parse_duration(d["bin_width"])
        if "component_exponents" in d:
            d["component_exponents"] = tuple(d["component_exponents"])
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigInvalid(f"unknown diagnostics keys {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None


class SignalLabel(str, Enum):
    PERSISTENT_CONSENSUS = "PERSISTENT_CONSENSUS"
    TRANSIENT_PRESSURE = "TRANSIENT_PRESSURE"
    DISPUTED_ANCHOR = "DISPUTED_ANCHOR"
    INDETERMINATE = "INDETERMINATE"


@dataclass(frozen=True)
class SignalClass:
    label: SignalLabel
    socially_consequential: bool


@dataclass(frozen=True)
class DiagnosticsReport:
    vr: float
    ts: float
    hhi: float
    sci: float
    lambda_: float | None
    n_trades: int
    n_bins: int
    classification: SignalClass

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["classification"] = self.classification.label.value
        d["socially_consequential"] = self.classification.socially_consequential
        order = ["vr", "ts", "hhi", "sci", "lambda", "n_trades", "n_bins",
                 "classification", "socially_consequential"]
        return {k: d[k] for k in order}


# -- variance ratio --------------------------------------------------------


def variance_ratio(series: ReturnSeries | np.ndarray, horizon: int = 6, min_bins: int | None = None) -> float:
    """Non-overlapping variance ratio VR(h).

    Var of h-bin summed returns over h * Var of base returns, both unbiased
    sample variances over the first ``h * (n // h)`` returns.
    """
    r = series.returns if isinstance(series, ReturnSeries) else np.asarray(series, dtype=float)
    if horizon < 2:
        raise DomainError(f"horizon must be >= 2, got {horizon}")
    if min_bins is None:
        min_bins = 2 * horizon
    n = len(r)
    m = n // horizon
    if n < min_bins or m < 2:
        raise InsufficientData(f"{n} returns; need >= {max(min_bins, 2 * horizon)} for horizon {horizon}")
    if not np.all(np.isfinite(r)):
        raise DomainError("returns contain non-finite values (zero price?)")
    base = r[: m * horizon]
    if np.ptp(base) == 0.0:
        raise DegenerateVariance("base returns have zero variance")
    var_base = base.var(ddof=1)
    if var_base == 0.0:
        raise DegenerateVariance("base returns have zero variance")
    agg = base.reshape(m, horizon).sum(axis=1)
    return float(agg.var(ddof=1) / (horizon * var_base))


# -- order flow ------------------------------------------------------------


def _buy_sell_totals(window: TradeWindow) -> tuple[float, float]:
    buys = math.fsum(t.size for t in window.trades if t.side.sign > 0)
    sells = math.fsum(t.size for t in window.trades if t.side.sign < 0)
    return buys, sells


def two_sidedness(window: TradeWindow) -> float:
    """1 - |B - S| / (B + S); 1 is balanced flow, 0 is one-sided."""
    if len(window) == 0:
        raise EmptyWindow("two_sidedness needs at least one trade")
    b, s = _buy_sell_totals(window)
    return 1.0 - abs(b - s) / (b + s)


def trader_volumes(window: TradeWindow, mode: str = "gross") -> dict[str, float]:
    if any(t.trader_id is None for t in window.trades):
        raise MissingTraderIds("every trade needs a trader_id for HHI")
    acc: dict[str, list[float]] = {}
    for t in window.trades:
        acc.setdefault(t.trader_id, []).append(t.size if mode == "gross" else t.signed_size)
    if mode == "gross":
        return {k: math.fsum(v) for k, v in acc.items()}
    vols = {k: abs(math.fsum(v)) for k, v in acc.items()}
    return {k: v for k, v in vols.items() if v > 0}


def concentration_hhi(window: TradeWindow, mode: str = "gross") -> float:
    """Herfindahl index of per-trader volume shares within the window."""
    if len(window) == 0:
        raise EmptyWindow("concentration_hhi needs at least one trade")
    vols = trader_volumes(window, mode)
    total = math.fsum(vols.values())
    if not total > 0:
        raise DegenerateFlow("no net positions in window")
    return math.fsum((v / total) ** 2 for v in vols.values())


# -- composite -------------------------------------------------------------


def signal_credibility(vr: float, ts: float, hhi: float, config: DiagnosticsConfig | None = None) -> float:
    """SCI = vr^a * (1 - ts)^b * (1 - hhi)^c; exponents default to 1."""
    if not (vr >= 0) or math.isinf(vr):
        raise DomainError(f"vr must be finite and >= 0, got {vr}")
    if not (0 <= ts <= 1):
        raise DomainError(f"ts must lie in [0, 1], got {ts}")
    if not (0 <= hhi <= 1):
        raise DomainError(f"hhi must lie in [0, 1], got {hhi}")
    w_vr, w_ts, w_hhi = config.component_exponents if config else (1.0, 1.0, 1.0)
    return vr**w_vr * (1.0 - ts) ** w_ts * (1.0 - hhi) ** w_hhi


def classify_signal(vr: float, ts: float, sci: float, config: DiagnosticsConfig) -> SignalClass:
    eps = config.vr_band
    if vr > 1 + eps and ts < config.ts_cut:
        label = SignalLabel.PERSISTENT_CONSENSUS
    elif vr < 1 - eps:
        label = SignalLabel.TRANSIENT_PRESSURE
    elif abs(vr - 1) <= eps and ts >= config.ts_cut:
        label = SignalLabel.DISPUTED_ANCHOR
    else:
        label = SignalLabel.INDETERMINATE
    return SignalClass(label, bool(sci > config.tau))


# -- price impact ----------------------------------------------------------


def ols_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of y on x with an intercept."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateFlow("regressor has zero variance")
    return float(dx @ (y - y.mean()) / sxx)


def impact_regression_data(window: TradeWindow, bin_width: int = DEFAULT_BIN_WIDTH) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin (signed volume, close-to-close price change) pairs.

    The first populated bin has no prior close and is excluded.
    """
    series = bin_prices(window, bin_width)
    flow = signed_volume_by_bin(window, bin_width)
    skipped = (series.origin - window.start) // bin_width
    flow = flow[skipped:]
    return flow[1:], np.diff(series.prices)


def kyle_lambda(window: TradeWindow, bin_width: int = DEFAULT_BIN_WIDTH) -> float:
    q, dp = impact_regression_data(window, bin_width)
    if len(q) < MIN_LAMBDA_BINS:
        raise InsufficientData(f"{len(q)} bins; kyle_lambda needs >= {MIN_LAMBDA_BINS}")
    if np.ptp(q) == 0.0:
        raise DegenerateFlow("signed volume is constant across bins")
    active = int(np.count_nonzero(q))
    if active < MIN_LAMBDA_BINS:
        raise InsufficientData(f"{active} bins with nonzero flow; need >= {MIN_LAMBDA_BINS}")
    return ols_slope(q, dp)


# -- report ----------------------------------------------------------------


def diagnose(window: TradeWindow, config: DiagnosticsConfig) -> DiagnosticsReport:
    """All diagnostics for one window; lambda is None when not estimable."""
    series = bin_prices(window, config.bin_width)
    vr = variance_ratio(series, config.vr_horizon, config.min_bins)
    ts = two_sidedness(window)
    hhi = concentration_hhi(window, config.hhi_mode)
    sci = signal_credibility(vr, ts, hhi, config)
    try:
        lam = kyle_lambda(window, config.bin_width)
    except (InsufficientData, DegenerateFlow):
        lam = None
    return DiagnosticsReport(
        vr=vr,
        ts=ts,
        hhi=hhi,
        sci=sci,
        lambda_=lam,
        n_trades=len(window),
        n_bins=len(series),
        classification=classify_signal(vr, ts, sci, config),
    )
