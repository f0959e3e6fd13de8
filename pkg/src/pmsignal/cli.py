"""Command-line entry point: ``pmsignal <command>``.

Exit codes: 0 ok, 2 input/config error, 3 insufficient data, 4 degenerate
statistic. Machine output goes to stdout and files; diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from itertools import combinations
from pathlib import Path

from . import crossplatform as xp
from .diagnostics import DiagnosticsConfig, diagnose
from .errors import ConfigInvalid, InputError, PMSignalError
from .events import EventSpec, run_event_study
from .sim import load_sim_config, regime_classify, regime_sweep, coordination_check, simulate
from .synth import write_fixtures
from .timeutil import format_instant, parse_duration, parse_instant
from .trades import read_trade_log, slice_window

log = logging.getLogger("pmsignal")

TABLE_COLUMNS = ["event_id", "dp_immediate", "dp_4h", "vr", "ts", "hhi", "sci", "classification", "error"]


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    tmp.replace(path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None


def _diag_config(args, base: dict | None = None) -> DiagnosticsConfig:
    d = dict(base or {})
    if getattr(args, "config", None):
        d.update(_load_json(args.config))
    overrides = {
        "tau": getattr(args, "tau", None),
        "vr_horizon": getattr(args, "horizon", None),
        "bin_width": getattr(args, "bin_width", None),
        "min_bins": getattr(args, "min_bins", None),
        "vr_band": getattr(args, "vr_band", None),
        "hhi_mode": getattr(args, "hhi_mode", None),
    }
    d.update({k: v for k, v in overrides.items() if v is not None})
    return DiagnosticsConfig.from_dict(d)


# -- commands --------------------------------------------------------------


def cmd_sci(args) -> int:
    trades = read_trade_log(args.trade_log)
    if args.market:
        trades = [t for t in trades if t.market_id == args.market]
    if not trades and args.start is None:
        raise InputError("trade log is empty")
    start = parse_instant(args.start) if args.start is not None else min(t.timestamp for t in trades)
    if args.duration is not None:
        duration = parse_duration(args.duration)
    else:
        duration = max(t.timestamp for t in trades) - start + 1
    window = slice_window(trades, start, duration, args.market)
    report = diagnose(window, _diag_config(args)).to_dict()
    if args.format == "csv":
        text = _csv_text(list(report), [[_fmt(v) for v in report.values()]])
    else:
        text = _dumps(report)
    if args.out:
        path = Path(args.out) / ("sci_report." + args.format)
        _write_atomic(path, text)
        log.info("wrote %s", path)
    sys.stdout.write(text)
    return 0


def cmd_event_study(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = _load_json(manifest_path)
    root = manifest_path.parent
    logs = [root / p for p in manifest.get("trade_logs", [])]
    missing = [str(p) for p in logs if not p.exists()]
    if missing:
        raise InputError(f"manifest references missing files: {missing}")
    specs = [EventSpec.from_dict(e) for e in manifest.get("events", [])]
    ids = [s.event_id for s in specs]
    if len(set(ids)) != len(ids):
        raise ConfigInvalid("event_ids in manifest are not unique")
    config = _diag_config(args, manifest.get("diagnostics", {}))
    out_dir = Path(args.out) if args.out else root / manifest.get("output_dir", "out")

    trades = [t for p in logs for t in read_trade_log(p)]
    rows, reports, first_error = [], [], None
    for spec in specs:
        try:
            rep = run_event_study(trades, spec, config)
        except PMSignalError as exc:
            log.warning("%s failed: %s: %s", spec.event_id, type(exc).__name__, exc)
            first_error = first_error or exc
            rows.append([spec.event_id, "", "", "", "", "", "", "", f"{type(exc).__name__}: {exc}"])
            continue
        dg = rep.diagnostics
        rows.append([spec.event_id, rep.dp_immediate, rep.dp_4h, dg.vr, dg.ts, dg.hhi, dg.sci,
                     dg.classification.label.value, ""])
        reports.append(rep.to_dict())
        _write_atomic(out_dir / "events" / f"{spec.event_id}.json", _dumps(rep.to_dict()))
        _write_atomic(out_dir / "events" / f"{spec.event_id}_path.csv",
                      _csv_text(["bin_start", "price"], [[t, repr(p)] for t, p in rep.path_rows()]))
    table = _csv_text(TABLE_COLUMNS, [[_fmt(v) for v in r] for r in rows])
    _write_atomic(out_dir / "event_table.csv", table)
    sys.stdout.write(_dumps(reports) if args.format == "json" else table)
    if specs and not reports:
        return first_error.exit_code
    return 0


def cmd_simulate(args) -> int:
    if not args.config:
        raise ConfigInvalid("simulate needs --config <sim config>")
    config = load_sim_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    out = Path(args.out or "sim_out")
    if args.kappa_grid:
        try:
            kappas = [float(k) for k in args.kappa_grid.split(",")]
        except ValueError:
            raise ConfigInvalid(f"bad --kappa-grid {args.kappa_grid!r}") from None
        for k in kappas:
            traj = simulate(replace(config, kappa=k))
            _write_atomic(out / f"trajectory_kappa{k:+g}_seed{config.seed}.csv", traj.to_csv())
        rows = regime_sweep(config, kappas, args.runs, args.dp, args.inner_seeds, args.sign_tol)
        header = list(rows[0]) if rows else ["kappa", "n_runs", "self_fulfilling", "self_defeating", "neutral", "regime"]
        table = _csv_text(header, [[_fmt(r[h]) for h in header] for r in rows])
        _write_atomic(out / "regime_table.csv", table)
        _write_atomic(out / "regime_table.json", _dumps(rows))
        sys.stdout.write(_dumps(rows) if args.format == "json" else table)
        return 0
    traj = simulate(config)
    _write_atomic(out / f"trajectory_seed{config.seed}.csv", traj.to_csv())
    coord = coordination_check(config, args.dp, args.inner_seeds)
    summary = {
        "seed": config.seed,
        "kappa": config.kappa,
        "regime": regime_classify(config, args.dp, args.inner_seeds, args.sign_tol).value,
        "analytic_sensitivity": config.analytic_sensitivity,
        "mean_sensitivity": coord.mean_sensitivity,
        "mean_sigma_p": coord.mean_sigma_p,
        "effect": coord.effect,
        "delta": config.delta,
        "consequential": coord.consequential,
        "sigma_p": traj.sigma_p,
        "terminal_displacement": traj.terminal_displacement,
    }
    _write_atomic(out / "classification.json", _dumps(summary))
    sys.stdout.write(_dumps(summary))
    return 0


def cmd_divergence(args) -> int:
    quotes = [q for path in args.quotes for q in xp.read_quotes(path)]
    series = xp.yes_series(quotes)
    out = Path(args.out or "divergence_out")
    summary: dict = {"platforms": sorted(series)}
    if not args.no_spread:
        if len(series) < 2:
            raise InputError(f"spreads need >= 2 platforms, got {sorted(series)}; use --no-spread")
        rows, pairs = [], []
        for a, b in combinations(sorted(series), 2):
            sp = xp.divergence_spread(series[a], series[b], args.break_even)
            pairs.append({"platform_a": a, "platform_b": b, "n_points": len(sp.timestamps),
                          "n_breaches": sp.n_breaches, "max_spread_pp": float(sp.spread_pp.max())})
            for i, t in enumerate(sp.timestamps):
                rows.append([format_instant(int(t)), a, b, repr(float(sp.price_a[i])), repr(float(sp.price_b[i])),
                             repr(float(sp.spread_pp[i])), str(bool(sp.breach[i])).lower()])
        _write_atomic(out / "spread.csv", _csv_text(
            ["timestamp", "platform_a", "platform_b", "price_a", "price_b", "spread_pp", "breach"], rows))
        summary["break_even_pp"] = args.break_even
        summary["pairs"] = pairs
    if args.weights:
        grid, pstar = xp.common_knowledge_series(series, xp.read_weights(args.weights))
        _write_atomic(out / "pstar.csv", _csv_text(
            ["timestamp", "p_star"], [[format_instant(int(t)), repr(float(v))] for t, v in zip(grid, pstar)]))
    scan = xp.consistency_scan(quotes, args.tolerance)
    _write_atomic(out / "consistency.json", _dumps({"tolerance": args.tolerance, **scan.to_dict()}))
    summary["consistency"] = {"days_total": scan.days_total, "days_violating": scan.days_violating}
    sys.stdout.write(_dumps(summary))
    return 0


def cmd_gen_fixtures(args) -> int:
    paths = write_fixtures(args.out or "fixtures")
    for p in paths:
        log.info("wrote %s", p)
    sys.stdout.write("".join(f"{p.name}\n" for p in paths))
    return 0


# -- parser ----------------------------------------------------------------


def _add_global(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON config (diagnostics or simulator)")
    p.add_argument("--out", default=d, help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS if suppress else "json")
    p.add_argument("--seed", type=int, default=d)
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmsignal", description=__doc__.splitlines()[0])
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sci", help="diagnostics report for one window of a trade log")
    _add_global(p, suppress=True)
    p.add_argument("trade_log")
    p.add_argument("--start", help="window start (ISO-8601 or epoch ms); default first trade")
    p.add_argument("--duration", help="window length, e.g. 4h; default through last trade")
    p.add_argument("--market")
    p.add_argument("--tau", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--bin-width", dest="bin_width")
    p.add_argument("--min-bins", dest="min_bins", type=int)
    p.add_argument("--vr-band", dest="vr_band", type=float)
    p.add_argument("--hhi-mode", dest="hhi_mode", choices=("gross", "net"))
    p.set_defaults(func=cmd_sci)

    p = sub.add_parser("event-study", help="run a manifest of shock event studies")
    _add_global(p, suppress=True)
    p.add_argument("manifest")
    p.add_argument("--tau", type=float)
    p.set_defaults(func=cmd_event_study)

    p = sub.add_parser("simulate", help="reflexive loop simulation and regime sweep")
    _add_global(p, suppress=True)
    p.add_argument("--kappa-grid", dest="kappa_grid", help="comma-separated kappa values")
    p.add_argument("--runs", type=int, default=100, help="classifications per kappa in sweep mode")
    p.add_argument("--inner-seeds", dest="inner_seeds", type=int, default=30)
    p.add_argument("--dp", type=float, default=1e-4)
    p.add_argument("--sign-tol", dest="sign_tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("divergence", help="cross-platform spreads, p* and YES/NO consistency")
    _add_global(p, suppress=True)
    p.add_argument("quotes", nargs="+")
    p.add_argument("--weights")
    p.add_argument("--break-even", dest="break_even", type=float, default=2.0, help="percentage points")
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--no-spread", dest="no_spread", action="store_true")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("gen-fixtures", help="regenerate the bundled synthetic fixtures")
    _add_global(p, suppress=True)
    p.set_defaults(func=cmd_gen_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except PMSignalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
