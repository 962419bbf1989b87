"""Inventory-aversion ladder: max-position statistics across psi values.

Runs the repeated-trading scenario at each psi (same seed, common random
numbers) and assembles OUT/inventory_vs_psi.csv from the per-run summaries.
Stronger aversion caps the book earlier, so mean max |Q| falls with psi.
"""

import argparse
import json
import os

from infotrade.cli import main as cli

COLUMNS = ("mean_max_abs_inventory", "mean_h_a_0", "se_h_a_0",
           "mean_trade_count")


def run(out_dir: str, psis, sessions: int, n_steps: int, seed: int):
    rows = []
    for psi in psis:
        cell = os.path.join(out_dir, f"psi_{psi:g}")
        os.makedirs(cell, exist_ok=True)
        config = {
            "scenario": 6, "phi": 1.02, "psi_a": psi, "psi_b": psi,
            "p": 0.8, "n_steps": n_steps, "sessions": sessions, "seed": seed,
            "sigma_a": [1.0, 1.0], "sigma_b": [1.0],
        }
        cfg_path = os.path.join(cell, "config.json")
        with open(cfg_path, "w", encoding="utf-8") as fh:
            json.dump(config, fh, indent=2)
        code = cli(["simulate", "--config", cfg_path, "--out", cell])
        if code != 0:
            raise SystemExit(code)
        with open(os.path.join(cell, "summary.json"), encoding="utf-8") as fh:
            summary = json.load(fh)
        rows.append((psi, [summary[c] for c in COLUMNS]))

    out_path = os.path.join(out_dir, "inventory_vs_psi.csv")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("psi," + ",".join(COLUMNS) + "\n")
        for psi, vals in rows:
            fh.write(",".join([repr(psi)] + [repr(v) for v in vals]) + "\n")
    print(f"wrote {out_path}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/inventory_ladder")
    ap.add_argument("--psis", default="1.0,1.005,1.01,1.015")
    ap.add_argument("--sessions", type=int, default=100_000)
    ap.add_argument("--n-steps", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=1729)
    args = ap.parse_args()
    run(args.out, [float(v) for v in args.psis.split(",")],
        args.sessions, args.n_steps, args.seed)
