#!/usr/bin/env python3
"""Mesh refinement study for the physics solver with the true load applied.

Rolls one manufactured solution to its final time on a sequence of uniform
meshes with the time step held fixed, and prints the discrete L2 error
(mass-matrix norm) with the observed convergence order between levels.
"""

import argparse

import numpy as np

from costafem import (ElasticMaterial, assemble_mass, build_grid_mesh,
                      build_operators, get_case)
from costafem.hybrid import MODEL_PBM, build_case_data, rollout
from costafem.manufactured import plane_load


def final_error(label, alpha, n, steps):
    ops = build_operators(build_grid_mesh(n, n), ElasticMaterial(),
                          1.0 / steps)
    case = get_case(label)
    data = build_case_data(ops, case, alpha, steps, plane_load(case))
    traj = rollout(ops, data, MODEL_PBM)
    e = traj.states[-1] - data.exact_at(steps)
    m = assemble_mass(ops.mesh)
    return float(np.sqrt(e @ (m @ e)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--solution", default="e3",
                    help="manufactured solution label (default e3)")
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=2000,
                    help="time steps, fixed across levels (default 2000)")
    ap.add_argument("--levels", type=int, nargs="+", default=[4, 8, 16, 32],
                    help="elements per side (default 4 8 16 32)")
    args = ap.parse_args()

    print(f"solution {args.solution}, alpha {args.alpha}, "
          f"{args.steps} steps to t=1")
    print(f"{'n':>4} {'h':>8} {'L2 error':>12} {'order':>7}")
    prev = None
    for n in args.levels:
        err = final_error(args.solution, args.alpha, n, args.steps)
        order = "" if prev is None else f"{np.log2(prev / err):7.3f}"
        print(f"{n:>4} {1.0 / n:>8.4f} {err:>12.4e} {order:>7}")
        prev = err


if __name__ == "__main__":
    main()
