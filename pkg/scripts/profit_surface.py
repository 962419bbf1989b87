"""Average profit as a function of spread factor and B's information rate.

Full common-random-numbers sweep of the capped repeated-trading setup: phi on
one axis, sigma_b on the other, with sigma_a = sigma_ratio * sigma_b in every
cell. Feeds both the heat map and the surface plot. Output: OUT/surface.csv.

Defaults keep the grid affordable on one core (~2 min); raise --sessions for
smoother surfaces.
"""

import argparse
import json
import math
import os

from infotrade.cli import main as cli


def run(out_dir: str, phi_spec: str, sigma_spec: str, ratio: float,
        sessions: int, n_steps: int, seed: int):
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
                "--phis", phi_spec, "--sigma-bs", sigma_spec,
                "--sigma-ratio", repr(ratio)])
    if code != 0:
        raise SystemExit(code)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/profit_surface")
    ap.add_argument("--phis", default="1.005:1.15:6")
    ap.add_argument("--sigma-bs", default="0.25:2.0:5")
    ap.add_argument("--sigma-ratio", type=float, default=math.sqrt(2.0))
    ap.add_argument("--sessions", type=int, default=20_000)
    ap.add_argument("--n-steps", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=1729)
    args = ap.parse_args()
    run(args.out, args.phis, args.sigma_bs, args.sigma_ratio,
        args.sessions, args.n_steps, args.seed)
