"""Direct matrix-to-matrix bridge against the two-bridge trek through the sphere.

    python3 scripts/trek_compare.py [--config configs/su2_trek.json]
"""
import argparse
from pathlib import Path

from qbridge.sweep import compare_trek, load_config

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(ROOT / "configs" / "su2_trek.json"))
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()
    cfg = load_config(args.config, seed=args.seed)
    print(f"{'m':>4} {'n':>4} {'direct':>10} {'trek':>10} {'alt trek':>10}  smallest")
    for r in compare_trek(cfg):
        print(f"{r['m']:>4g} {r['n']:>4g} {r['direct_length']:>10.5f} {r['length_bound']:>10.5f} "
              f"{r['alt_length']:>10.5f}  {r['smallest']}")


if __name__ == "__main__":
    main()
