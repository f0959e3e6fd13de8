"""Regime counts over a kappa grid for the bundled simulator config."""
import argparse
import json

from pmsignal.sim import SimConfig, regime_sweep
from pmsignal.synth import FIXTURE_DIR


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kappas", default="-1,-0.5,-0.1,0,0.1,0.5,1")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--inner-seeds", type=int, default=30)
    args = ap.parse_args()

    config = SimConfig.from_dict(json.loads((FIXTURE_DIR / "sim_config.json").read_text()))
    kappas = [float(k) for k in args.kappas.split(",")]
    print(f"response gain {config.response_gain:.3f}")
    print(f"{'kappa':>7}{'dO/dp':>8}{'S-F':>6}{'S-D':>6}{'neu':>6}  regime")
    for row in regime_sweep(config, kappas, args.runs, n_seeds=args.inner_seeds):
        print(f"{row['kappa']:>7.2f}{row['kappa'] * config.response_gain:>8.3f}{row['self_fulfilling']:>6}"
              f"{row['self_defeating']:>6}{row['neutral']:>6}  {row['regime']}")


if __name__ == "__main__":
    main()
