"""Exhaustive round-trip profit scan over buy/sell sign sequences.

Writes OUT/lemma3.csv (index n, sequence, value) for the scatter figure; the
minimum over all sequences stays positive whenever 1 <= psi < phi.
"""

import argparse
import os

from infotrade.cli import main as cli

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/lemma3_scatter")
    ap.add_argument("--max-len", type=int, default=10)
    ap.add_argument("--phi", type=float, default=1.02)
    ap.add_argument("--psi", type=float, default=1.01)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    raise SystemExit(cli(["lemma3", "--max-len", str(args.max_len),
                          "--phi", repr(args.phi), "--psi", repr(args.psi),
                          "--out", args.out]))
