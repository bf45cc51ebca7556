"""Brute-force oracles against the assembled bounds on S3 and Q8.

    python3 scripts/oracle_check.py [--ball-step 0.05] [--dense-step 0.02]
"""
import argparse

import numpy as np

from qbridge.berezin import first_class, phi_composites
from qbridge.bounds import OptimizerSettings, assemble_first_class, first_class_values
from qbridge.catalog import highest_weight_projection, quaternion8, s3_standard_rep, symmetric3
from qbridge.groups import coset_space, spin_representation, stability_subgroup
from qbridge.oracle import hausdorff_reach_oracle, height_oracle, mean_zero_basis, sample_ball, sample_pure_states
from qbridge.seminorms import function_seminorm, operator_seminorm


def bridges():
    g = symmetric3()
    yield "S3", first_class(coset_space(g, stability_subgroup(s3_standard_rep(g), np.diag([0.0, 1.0]))))
    g = quaternion8()
    yield "Q8", first_class(coset_space(g, stability_subgroup(spin_representation(g, 0.5), highest_weight_projection(2))))


def dense(spec, step):
    X = sample_ball(operator_seminorm(spec.proj.rep), 2, step=step, interior=False).members
    P = spec.proj.P
    gB = P @ (np.einsum("ab,nba->n", P, X)[:, None, None] * np.eye(2) - X)
    dB = X - np.array([phi_composites(spec, x) for x in X])
    top = lambda Y: float(np.linalg.svd(Y, compute_uv=False)[:, 0].max())
    return top(gB), top(dB)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ball-step", type=float, default=0.05)
    ap.add_argument("--b-step", type=float, default=0.2)
    ap.add_argument("--state-step", type=float, default=0.4)
    ap.add_argument("--dense-step", type=float, default=0.02)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    settings = OptimizerSettings(args.seed, restarts=16, steps=300)
    for name, spec in bridges():
        vals = first_class_values(spec, settings)
        rep = assemble_first_class(vals, 1)
        c = spec.coset
        ballA = sample_ball(function_seminorm(c), mean_zero_basis(c.npts), step=args.ball_step)
        ballB = sample_ball(operator_seminorm(spec.proj.rep), 2, step=args.b_step)
        reach = hausdorff_reach_oracle(spec, ballA, ballB)
        h = height_oracle(spec, sample_pure_states(2, step=args.state_step))
        gd, dd = dense(spec, args.dense_step)
        print(f"{name}: reach oracle {reach:.10f} <= bound {rep.reach_bound:.10f}: {reach <= rep.reach_bound}")
        print(f"{name}: height oracle {h['height']:.6f} (B side {h['B_side']:.6f}, pushforward {h['pushforward_B']:.6f})"
              f" <= bound {rep.height_bound:.6f}: {h['height'] <= rep.height_bound}")
        print(f"{name}: gamma_B optimizer {vals['gamma_B'].value:.10f}, dense grid {gd:.10f}")
        print(f"{name}: delta_tilde_B optimizer {vals['delta_tilde_B'].value:.10f}, dense grid {dd:.10f}")


if __name__ == "__main__":
    main()
