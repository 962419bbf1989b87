"""Regenerate the trade-time histogram inputs: one hist.csv per spread factor.

Single-trade crossing sessions (scenario 3) at four spreads; wider spreads
push the first crossing later. Output: OUT/phi_<phi>/hist.csv.
"""

import argparse
import json
import os

from infotrade.cli import main as cli


def run(out_dir: str, phis, sessions: int, n_steps: int, seed: int):
    for phi in phis:
        cell = os.path.join(out_dir, f"phi_{phi:g}")
        os.makedirs(cell, exist_ok=True)
        config = {
            "scenario": 3, "phi": phi, "p": 0.8,
            "n_steps": n_steps, "sessions": sessions, "seed": seed,
            "sigma_a": [1.0, 1.0], "sigma_b": [1.0],
        }
        cfg_path = os.path.join(cell, "config.json")
        with open(cfg_path, "w", encoding="utf-8") as fh:
            json.dump(config, fh, indent=2)
        code = cli(["hist", "--config", cfg_path, "--out", cell, "--bins", "50"])
        if code != 0:
            raise SystemExit(code)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/trade_time_histograms")
    ap.add_argument("--phis", default="1.01,1.02,1.05,1.1")
    ap.add_argument("--sessions", type=int, default=100_000)
    ap.add_argument("--n-steps", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=1729)
    args = ap.parse_args()
    run(args.out, [float(v) for v in args.phis.split(",")],
        args.sessions, args.n_steps, args.seed)
