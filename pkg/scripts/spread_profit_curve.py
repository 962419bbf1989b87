"""Profit vs spread factor under repeated trading capped at ten executions.

One sweep row per phi at fixed sigma_b = 1; the per-session column is concave
with an interior maximum, the per-trade column keeps rising. Output:
OUT/surface.csv (single-sigma slice, ready for a line plot).
"""

import argparse
import json
import os

from infotrade.cli import main as cli


def run(out_dir: str, phi_spec: str, sessions: int, n_steps: int, seed: int):
    os.makedirs(out_dir, exist_ok=True)
    config = {
        "scenario": 6, "phi": 1.02, "psi_a": 1.0, "psi_b": 1.0,
        "max_trades": 10, "p": 0.8,
        "n_steps": n_steps, "sessions": sessions, "seed": seed,
        "sigma_a": [1.0, 1.0], "sigma_b": [1.0],
    }
    cfg_path = os.path.join(out_dir, "config.json")
    with open(cfg_path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
    code = cli(["sweep", "--config", cfg_path, "--out", out_dir,
                "--phis", phi_spec, "--sigma-bs", "1.0"])
    if code != 0:
        raise SystemExit(code)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/spread_profit_curve")
    ap.add_argument("--phis", default="1.005:1.15:8")
    ap.add_argument("--sessions", type=int, default=100_000)
    ap.add_argument("--n-steps", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=1729)
    args = ap.parse_args()
    run(args.out, args.phis, args.sessions, args.n_steps, args.seed)
