"""Trace one active session for the four-panel book/inventory figure.

Runs a small repeated-trading batch (up to ten trades per session), picks the
session with the most executions, and re-runs with --trace-session to emit
its per-instant book: mids, bids/offers, inventory, and the mid-ratio the
crossing test watches. Output: OUT/trace_<K>.csv plus the batch files.
"""

import argparse
import csv
import json
import os

from infotrade.cli import main as cli


def run(out_dir: str, sessions: int, n_steps: int, seed: int):
    os.makedirs(out_dir, exist_ok=True)
    config = {
        "scenario": 6, "phi": 1.02, "psi_a": 1.01, "psi_b": 1.01,
        "p": 0.8, "n_steps": n_steps, "sessions": sessions, "seed": seed,
        "sigma_a": [1.0, 1.0], "sigma_b": [1.0], "max_trades": 10,
    }
    cfg_path = os.path.join(out_dir, "config.json")
    with open(cfg_path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
    code = cli(["simulate", "--config", cfg_path, "--out", out_dir])
    if code != 0:
        raise SystemExit(code)

    with open(os.path.join(out_dir, "sessions.csv"), encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    busiest = max(rows, key=lambda row: int(row["n_trades"]))
    k = busiest["session"]
    print(f"tracing session {k} ({busiest['n_trades']} trades)")
    code = cli(["simulate", "--config", cfg_path, "--out", out_dir,
                "--trace-session", k])
    if code != 0:
        raise SystemExit(code)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/session_trace")
    ap.add_argument("--sessions", type=int, default=512)
    ap.add_argument("--n-steps", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1729)
    args = ap.parse_args()
    run(args.out, args.sessions, args.n_steps, args.seed)
