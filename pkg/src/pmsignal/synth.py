"""Seeded synthetic trade and quote streams.

Real transaction archives are not redistributable, so every bundled fixture
is produced here from ``GENERATOR_CONFIG`` and frozen as CSV. Shock streams
are searched over seeds until the built path meets its shape constraints;
the search is deterministic so regeneration is byte-identical.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .crossplatform import QUOTE_COLUMNS, PlatformQuote
from .timeutil import DAY, HOUR, MINUTE, format_instant, parse_instant
from .trades import Side, Trade, trades_to_csv

BIN = 5 * MINUTE
POST_BINS = 48
PRICE_DIGITS = 6

GENERATOR_CONFIG: dict = {
    "trader_pool": {"n_traders": 20, "zipf_exponent": 1.0},
    "shocks": {
        "debate": {
            "market_id": "pres24-trump",
            "event_time": "2024-06-28T01:30:00.000Z",
            "baseline": 0.55,
            "opening": [0.09, 0.111],
            "dp_end": 0.020,
            "pattern": "reversal",
            "noise": 0.006,
            "buy_share": 0.65,
            "vr_range": [0.30, 0.60],
            "seed": 1000,
        },
        "assassination": {
            "market_id": "pres24-trump",
            "event_time": "2024-07-13T22:11:00.000Z",
            "baseline": 0.60,
            "opening": [0.109],
            "dp_end": 0.109,
            "pattern": "momentum",
            "noise": 0.003,
            "buy_share": 0.85,
            "vr_range": [1.30, 1.90],
            "seed": 2000,
        },
        "dropout": {
            "market_id": "pres24-trump",
            "event_time": "2024-07-21T17:46:00.000Z",
            "baseline": 0.68,
            "opening": [-0.039],
            "dp_end": -0.020,
            "pattern": "walk",
            "noise": 0.003,
            "buy_share": 0.50,
            "vr_range": [0.97, 1.03],
            "seed": 3000,
        },
        "persistent": {
            "market_id": "demo-persistent",
            "pre_tape": False,
            "event_time": "2024-08-01T12:00:00.000Z",
            "baseline": 0.45,
            "opening": [0.03],
            "dp_end": 0.08,
            "pattern": "momentum",
            "noise": 0.003,
            "buy_share": 0.85,
            "vr_range": [1.50, 2.50],
            "seed": 4000,
        },
        "reversal": {
            "market_id": "demo-reversal",
            "pre_tape": False,
            "event_time": "2024-08-02T12:00:00.000Z",
            "baseline": 0.45,
            "opening": [0.06],
            "dp_end": 0.01,
            "pattern": "reversal",
            "noise": 0.004,
            "buy_share": 0.60,
            "vr_range": [0.20, 0.60],
            "seed": 5000,
        },
    },
    "maturation": {
        "market_id": "pres24-maturation",
        "start": "2024-01-08T00:00:00.000Z",
        "n_windows": 10,
        "bins_per_window": 500,
        "lambda_first": 0.01,
        "lambda_last": 0.0005,
        "impact_scale": 0.001,
        "snr": 10.0,
        "p0": 0.5,
        "seed": 6000,
    },
    "quotes": {
        "two_platform": {
            "start": "2024-10-01T00:00:00.000Z",
            "n_points": 120,
            "step": "6h",
            "gap": 0.04,
            "seed": 7000,
        },
        "consistency": {
            "start": "2024-08-31T12:00:00.000Z",
            "n_days": 65,
            "consistent_days": [9, 31, 52],
            "missing_no_price": {"day": 20, "platform_id": "kalshi"},
            "seed": 8000,
        },
    },
    "weights": {"polymarket": 0.7, "kalshi": 0.3},
    "sim": {
        "horizon": 100,
        "p0": 0.5,
        "x_drift": 0.0,
        "x_vol": 0.002,
        "audiences": [
            {"name": "ELITES", "omega": 0.5, "sigma": 0.9},
            {"name": "MEDIA", "omega": 0.3, "sigma": 0.6},
            {"name": "VOTERS", "omega": 0.2, "sigma": 0.1},
        ],
        "kappa": 0.5,
        "alpha": 0.2,
        "info_shocks": [[10, 0.05]],
        "eta": 1.0,
        "noise_eps": 0.01,
        "noise_nu": 0.005,
        "anchor": 0.5,
        "delta": 0.001,
        "seed": 7,
    },
}


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def trader_pool(n_traders: int = 20, zipf_exponent: float = 1.0) -> tuple[list[str], np.ndarray]:
    weights = 1.0 / np.arange(1, n_traders + 1) ** zipf_exponent
    return [f"0x{i:04x}" for i in range(n_traders)], weights / weights.sum()


def _round_price(p: float) -> float:
    return round(float(min(max(p, 0.0), 1.0)), PRICE_DIGITS)


# -- shock streams ---------------------------------------------------------


def _shock_path(spec: dict, rng: np.random.Generator) -> np.ndarray:
    """Post-event closing prices, POST_BINS long, rounded."""
    base = spec["baseline"]
    opening = [base + d for d in spec["opening"]]
    n_tail = POST_BINS - len(opening)
    e = rng.standard_normal(n_tail + 1) * spec["noise"]
    if spec["pattern"] == "reversal":
        r = e[1:] - 0.8 * e[:-1]
    elif spec["pattern"] == "momentum":
        r = np.empty(n_tail)
        acc = 0.0
        for k in range(n_tail):
            acc = 0.6 * acc + e[k + 1]
            r[k] = acc
    elif spec["pattern"] == "walk":
        r = e[1:]
    else:
        raise ValueError(f"unknown pattern {spec['pattern']!r}")
    # constant shift in log returns pins the endpoint without touching VR
    target = math.log(base + spec["dp_end"])
    start = math.log(opening[-1])
    r = r + (target - start - r.sum()) / n_tail
    tail = np.exp(start + np.cumsum(r))
    return np.array([_round_price(p) for p in [*opening, *tail]])


def _path_vr(prices: np.ndarray, horizon: int = 6) -> float:
    r = np.diff(np.log(prices))
    m = len(r) // horizon
    base = r[: m * horizon]
    return float(base.reshape(m, horizon).sum(1).var(ddof=1) / (horizon * base.var(ddof=1)))


def _path_ok(spec: dict, prices: np.ndarray) -> bool:
    base = spec["baseline"]
    moves = prices[:6] - base
    peak = moves[np.argmax(np.abs(moves))]
    lo, hi = spec["vr_range"]
    return (
        abs(peak - max(spec["opening"], key=abs)) < 0.005
        and abs(prices[-1] - base - spec["dp_end"]) < 0.002
        and lo <= _path_vr(prices) <= hi
    )


def _bin_trades(
    rng: np.random.Generator,
    market_id: str,
    bin_start: int,
    prev_close: float,
    close: float,
    buy_share: float,
    traders: list[str],
    trader_w: np.ndarray,
    platform_id: str = "polymarket",
) -> list[Trade]:
    n = int(rng.integers(2, 7))
    offsets = np.sort(rng.choice(BIN - 1, size=n, replace=False))
    out = []
    for j, off in enumerate(offsets):
        frac = (j + 1) / n
        price = close if j == n - 1 else _round_price(prev_close + frac * (close - prev_close))
        side = Side.BUY if rng.random() < buy_share else Side.SELL
        size = round(float(rng.lognormal(4.0, 0.8)), 2)
        trader = traders[int(rng.choice(len(traders), p=trader_w))]
        out.append(Trade(bin_start + int(off), market_id, platform_id, side, price, max(size, 0.01), trader))
    return out


def shock_stream(spec: dict, pool: dict | None = None, max_tries: int = 10_000) -> tuple[list[Trade], int]:
    """Pre- and post-event trades for one engineered shock; returns (trades, seed used)."""
    traders, trader_w = trader_pool(**(pool or GENERATOR_CONFIG["trader_pool"]))
    t0 = parse_instant(spec["event_time"])
    for seed in range(spec["seed"], spec["seed"] + max_tries):
        rng = _rng(seed)
        path = _shock_path(spec, rng)
        if not _path_ok(spec, path):
            continue
        trades = []
        # quiet pre-event tape around the baseline, closing exactly on it
        pre_n = 24 if spec.get("pre_tape", True) else 0
        for k in range(pre_n):
            ts = t0 - 4 * HOUR + k * (4 * HOUR // pre_n) + int(rng.integers(0, 60_000))
            price = spec["baseline"] if k == pre_n - 1 else _round_price(spec["baseline"] + rng.normal(0, 0.002))
            side = Side.BUY if rng.random() < 0.5 else Side.SELL
            trader = traders[int(rng.choice(len(traders), p=trader_w))]
            trades.append(Trade(ts, spec["market_id"], "polymarket", side, price, round(float(rng.lognormal(3.5, 0.6)), 2), trader))
        prev = spec["baseline"]
        for k, close in enumerate(path):
            trades.extend(
                _bin_trades(rng, spec["market_id"], t0 + k * BIN, prev, float(close), spec["buy_share"], traders, trader_w)
            )
            prev = float(close)
        if _ts_ok(spec, trades[pre_n:]):
            return trades, seed
    raise RuntimeError(f"no seed satisfied shock constraints for {spec}")


def _ts_ok(spec: dict, post: list[Trade]) -> bool:
    b = sum(t.size for t in post if t.side is Side.BUY)
    s = sum(t.size for t in post if t.side is Side.SELL)
    ts = 1 - abs(b - s) / (b + s)
    if spec["buy_share"] >= 0.8:
        return ts < 0.45
    if spec["buy_share"] <= 0.5:
        return ts > 0.6
    return True


# -- planted price impact --------------------------------------------------


def planted_lambda_bins(
    lam: float, n_bins: int, snr: float, seed: int, impact_scale: float = 0.001
) -> tuple[np.ndarray, np.ndarray]:
    """Signed flow q and price change dp = lam * q + noise.

    ``impact_scale`` is the std of lam * q, so thin markets get small trades.
    SNR is the power ratio Var(lam * q) / Var(noise).
    """
    rng = _rng(seed)
    q = rng.standard_normal(n_bins) * (impact_scale / lam)
    noise = rng.standard_normal(n_bins) * (impact_scale / math.sqrt(snr))
    return q, lam * q + noise


def planted_lambda_trades(
    lam: float,
    n_bins: int,
    snr: float,
    seed: int,
    start: int = 0,
    p0: float = 0.5,
    market_id: str = "lambda-demo",
    impact_scale: float = 0.001,
    bin_width: int = BIN,
    round_prices: bool = False,
) -> list[Trade]:
    """One trade per bin carrying that bin's signed flow.

    The leading trade at ``start`` only sets the opening price.
    """
    q, dp = planted_lambda_bins(lam, n_bins, snr, seed, impact_scale)
    price = p0
    trades = [Trade(start, market_id, "polymarket", Side.BUY, p0, 1.0, "0x0000")]
    for k in range(n_bins):
        price = min(max(price + dp[k], 0.0), 1.0)
        p = _round_price(price) if round_prices else price
        side = Side.BUY if q[k] > 0 else Side.SELL
        trader = f"0x{(k % 50) + 1:04x}"
        trades.append(Trade(start + (k + 1) * bin_width + 1000, market_id, "polymarket", side, p, abs(float(q[k])), trader))
    return trades


def maturation_stream(spec: dict | None = None) -> tuple[list[Trade], list[tuple[int, int]], list[float]]:
    """Contiguous windows with geometrically decaying planted lambda.

    Returns trades, the (start, duration) grid and the planted values.
    """
    spec = spec or GENERATOR_CONFIG["maturation"]
    n_w = spec["n_windows"]
    n_b = spec["bins_per_window"]
    ratio = (spec["lambda_last"] / spec["lambda_first"]) ** (1 / (n_w - 1))
    lams = [spec["lambda_first"] * ratio**j for j in range(n_w)]
    t0 = parse_instant(spec["start"])
    span = (n_b + 1) * BIN
    trades: list[Trade] = []
    grid = []
    price = spec["p0"]
    for j, lam in enumerate(lams):
        start = t0 + j * span
        w = planted_lambda_trades(
            lam, n_b, spec["snr"], spec["seed"] + j, start=start, p0=price,
            market_id=spec["market_id"], impact_scale=spec["impact_scale"], round_prices=True,
        )
        price = w[-1].price
        trades.extend(w)
        grid.append((start, span))
    return trades, grid, lams


# -- quotes ----------------------------------------------------------------


def two_platform_quotes(spec: dict | None = None) -> list[PlatformQuote]:
    from .timeutil import parse_duration

    spec = spec or GENERATOR_CONFIG["quotes"]["two_platform"]
    rng = _rng(spec["seed"])
    t0 = parse_instant(spec["start"])
    step = parse_duration(spec["step"])
    out = []
    level = 0.60
    for k in range(spec["n_points"]):
        level = min(max(level + rng.normal(0, 0.004), 0.45), 0.70)
        a = round(level, 3)
        b = round(a - spec["gap"], 3)
        ts = t0 + k * step
        out.append(PlatformQuote("polymarket", ts, a, round(1 - a, 3), "pres24-trump"))
        out.append(PlatformQuote("kalshi", ts, b, round(1 - b, 3), "pres24-trump"))
    return out


def consistency_quotes(spec: dict | None = None) -> list[PlatformQuote]:
    spec = spec or GENERATOR_CONFIG["quotes"]["consistency"]
    rng = _rng(spec["seed"])
    t0 = parse_instant(spec["start"])
    consistent = set(spec["consistent_days"])
    missing = spec["missing_no_price"]
    out = []
    for d in range(spec["n_days"]):
        ts = t0 + d * DAY
        bad = None if d in consistent else ("polymarket", "kalshi")[int(rng.integers(0, 2))]
        for j, platform in enumerate(("polymarket", "kalshi")):
            yes = round(float(rng.uniform(0.45, 0.60)), 2)
            no = round(1 - yes, 2)
            if platform == bad:
                no = round(no + float(rng.choice([0.01, 0.02, 0.03])), 2)
            if d == missing["day"] and platform == missing["platform_id"]:
                no = None
            out.append(PlatformQuote(platform, ts + j * 60_000, yes, no, "pres24-trump"))
    return out


def quotes_to_csv(quotes: list[PlatformQuote]) -> str:
    lines = [",".join(QUOTE_COLUMNS)]
    for q in quotes:
        no = "" if q.no_price is None else repr(q.no_price)
        lines.append(f"{format_instant(q.timestamp)},{q.platform_id},{q.market_id},{q.yes_price!r},{no}")
    return "\n".join(lines) + "\n"


# -- bundle ----------------------------------------------------------------


@dataclass(frozen=True)
class FixtureBundle:
    files: dict[str, str]
    seeds: dict[str, int]


def build_fixtures(config: dict | None = None) -> FixtureBundle:
    """All bundled fixtures as {relative filename: text}."""
    cfg = config or GENERATOR_CONFIG
    files: dict[str, str] = {}
    seeds: dict[str, int] = {}
    table1 = []
    for name, spec in cfg["shocks"].items():
        trades, seed = shock_stream(spec, cfg["trader_pool"])
        seeds[name] = seed
        files[f"{name}.csv"] = trades_to_csv(trades)
        if name in ("debate", "assassination", "dropout"):
            table1.append({"event_id": name, "market_id": spec["market_id"], "event_time": spec["event_time"],
                           "pre_window": "4h", "post_window": "4h", "peak_search": "30m"})
    files["table1_manifest.json"] = _dumps(
        {
            "trade_logs": ["debate.csv", "assassination.csv", "dropout.csv"],
            "diagnostics": {"tau": 0.5},
            "events": table1,
            "output_dir": "out/table1",
        }
    )
    mat_trades, grid, lams = maturation_stream(cfg["maturation"])
    files["maturation.csv"] = trades_to_csv(mat_trades)
    files["maturation_grid.json"] = _dumps(
        {"grid": [[format_instant(s), d // 1000] for s, d in grid], "planted_lambda": lams}
    )
    files["two_platform_quotes.csv"] = quotes_to_csv(two_platform_quotes(cfg["quotes"]["two_platform"]))
    files["consistency_65d.csv"] = quotes_to_csv(consistency_quotes(cfg["quotes"]["consistency"]))
    files["weights.json"] = _dumps(cfg["weights"])
    files["sim_config.json"] = _dumps(cfg["sim"])
    files["generator_config.json"] = _dumps({**cfg, "resolved_seeds": seeds})
    return FixtureBundle(files, seeds)


def write_fixtures(out_dir, config: dict | None = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in sorted(build_fixtures(config).files.items()):
        path = out / name
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(text, encoding="utf-8", newline="\n")
        tmp.replace(path)
        written.append(path)
    return written


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


FIXTURE_DIR = Path(__file__).parent / "fixtures"
