"""Fuzzy-sphere sweep: bounds for spins 1/2..4 on the SU(2) grid, plus a text table.

    python3 scripts/fuzzy_sphere_sweep.py [--config configs/su2_fuzzy_sphere.json] [--out DIR] [--jobs N]
"""
import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from qbridge.sweep import load_config, run_sweep

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(ROOT / "configs" / "su2_fuzzy_sphere.json"))
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    cfg = load_config(args.config, seed=args.seed, out=args.out)
    status = run_sweep(cfg, jobs=args.jobs, log=logging.error)
    rows = list(csv.DictReader(open(os.path.join(cfg.out, "summary.csv"))))
    qs = sorted({int(r["q"]) for r in rows})
    print("m     " + "".join(f"  length(q={q})" for q in qs) + "   gamma_breve_A  delta_tilde_A")
    for m in sorted({float(r["m"]) for r in rows}):
        sel = {int(r["q"]): r for r in rows if float(r["m"]) == m}
        first = sel[qs[0]]
        cells = "".join(f"  {float(sel[q]['length_bound']):11.5f}" for q in qs)
        print(f"{m:<5g} {cells}   {float(first['gamma_breve_A']):13.6f}  {float(first['delta_tilde_A']):13.6f}")
    print(f"outputs in {cfg.out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
