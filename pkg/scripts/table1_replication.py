"""Event-study table for the three bundled shock fixtures."""
import json

from pmsignal.diagnostics import DiagnosticsConfig
from pmsignal.events import EventSpec, run_event_study
from pmsignal.synth import FIXTURE_DIR
from pmsignal.trades import read_trade_log

TARGET = {"debate": (0.111, 0.020), "assassination": (0.109, 0.109), "dropout": (-0.039, -0.020)}


def main():
    manifest = json.loads((FIXTURE_DIR / "table1_manifest.json").read_text())
    config = DiagnosticsConfig.from_dict(manifest["diagnostics"])
    trades = [t for name in manifest["trade_logs"] for t in read_trade_log(FIXTURE_DIR / name)]
    print(f"{'event':<14}{'dp_imm':>8}{'target':>8}{'dp_4h':>8}{'target':>8}{'VR':>7}{'TS':>7}{'SCI':>7}  class")
    for ev in manifest["events"]:
        rep = run_event_study(trades, EventSpec.from_dict(ev), config)
        d = rep.diagnostics
        t_imm, t_4h = TARGET.get(rep.event_id, (float("nan"),) * 2)
        print(f"{rep.event_id:<14}{rep.dp_immediate:>+8.3f}{t_imm:>+8.3f}{rep.dp_4h:>+8.3f}{t_4h:>+8.3f}"
              f"{d.vr:>7.3f}{d.ts:>7.3f}{d.sci:>7.3f}  {d.classification.label.value}")


if __name__ == "__main__":
    main()
