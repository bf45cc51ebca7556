"""Command line front end.

    qbridge sweep --config cfg.json --out results --seed 0 --jobs 4
    qbridge trek-compare --config cfg.json
    qbridge oracle-check --config cfg.json

Exit status: 0 success, 2 configuration error, 3 partial failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .groups import GroupError
from .sweep import ConfigError, compare_trek, load_config, run_sweep

log = logging.getLogger("qbridge")


def _parser():
    p = argparse.ArgumentParser(prog="qbridge", description="Bridge length bounds for coherent-state quantum metric spaces.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("sweep", "compute bounds for every cell of a config"),
        ("trek-compare", "compare direct bridge, trek and alternative trek lengths"),
        ("oracle-check", "first-class sweep with brute-force oracles switched on"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default=None)
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--jobs", type=int, default=1)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, out=args.out)
        if args.command == "oracle-check":
            cfg = dataclasses.replace(cfg, oracle=True, experiment="first")
        if args.command == "trek-compare":
            rows = compare_trek(cfg)
            w = sys.stdout
            w.write("m\tn\tdirect\ttrek\talt_trek\tsmallest\n")
            for r in rows:
                w.write(f"{r['m']:g}\t{r['n']:g}\t{r['direct_length']:.6g}\t{r['length_bound']:.6g}\t"
                        f"{r['alt_length']:.6g}\t{r['smallest']}\n")
            return 0
        status = run_sweep(cfg, jobs=args.jobs, log=log.error)
    except (ConfigError, GroupError) as e:
        log.error("config error: %s", e)
        return 2
    if args.command == "oracle-check" and status == 0:
        with open(f"{cfg.out}/records.jsonl") as fh:
            bad = [r for r in map(json.loads, fh) if "oracle" in r
                   and not (r["oracle"]["reach_ok"] and r["oracle"]["height_ok"])]
        if bad:
            log.error("oracle exceeded a bound in %d cell(s)", len(bad))
            return 3
    log.info("wrote %s", cfg.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
