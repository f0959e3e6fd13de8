"""Kyle's lambda recovery on planted flow, and the bundled maturation profile."""
import argparse

import numpy as np

from pmsignal.diagnostics import DiagnosticsConfig, kyle_lambda
from pmsignal.events import load_maturation_grid, maturation_profile
from pmsignal.synth import BIN, FIXTURE_DIR, planted_lambda_trades
from pmsignal.timeutil import format_instant
from pmsignal.trades import read_trade_log, slice_window


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--lam", type=float, default=0.001)
    ap.add_argument("--bins", type=int, default=1000)
    ap.add_argument("--snr", type=float, default=10.0)
    ap.add_argument("--seeds", type=int, default=100)
    args = ap.parse_args()

    est = np.array([
        kyle_lambda(slice_window(planted_lambda_trades(args.lam, args.bins, args.snr, s), 0, (args.bins + 1) * BIN), BIN)
        for s in range(args.seeds)
    ])
    rel = np.abs(est / args.lam - 1)
    print(f"planted {args.lam:g}: mean estimate {est.mean():.6g}, "
          f"{int((rel <= 0.10).sum())}/{args.seeds} within 10%, worst {rel.max():.1%}")

    trades = read_trade_log(FIXTURE_DIR / "maturation.csv")
    grid = load_maturation_grid(FIXTURE_DIR / "maturation_grid.json")
    print("\nwindow_start              lambda")
    for point in maturation_profile(trades, grid, DiagnosticsConfig(tau=0.5)):
        value = point.gap_reason if point.is_gap else f"{point.lambda_:.6g}"
        print(f"{format_instant(point.window_start)}  {value}")


if __name__ == "__main__":
    main()
