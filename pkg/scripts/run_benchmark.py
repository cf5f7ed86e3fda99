#!/usr/bin/env python3
"""Run one benchmark experiment end to end and emit its artifacts.

Desk-scale defaults (8x8 mesh, 100 time steps, 3 seeds) finish in minutes
on one core.  Pass --full for the reference configuration (15x15, 1000
steps, 10 seeds), which takes hours.  Artifacts land in the output
directory: records.csv, aggregates.json and per-scenario plot tables.
"""

import argparse
import time

from costafem.harness import (ExperimentSpec, aggregate_stats, emit_results,
                              run_experiment)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("experiment", type=int, choices=(1, 2, 3, 4))
    ap.add_argument("--out", default=None,
                    help="output directory (default results/exp{N})")
    ap.add_argument("--full", action="store_true",
                    help="reference scale instead of desk scale")
    ap.add_argument("--elements", type=int, default=None)
    ap.add_argument("--steps", type=int, default=None)
    ap.add_argument("--seeds", type=int, default=None)
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args()

    overrides = {} if args.full else dict(elements=8, steps=100, seeds=3)
    for key in ("elements", "steps", "seeds"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    spec = ExperimentSpec.for_experiment(args.experiment, **overrides)

    t0 = time.time()
    records, report = run_experiment(spec, verbose=not args.quiet)
    out = args.out or f"results/exp{args.experiment}"
    emit_results(out, records, report)

    agg = aggregate_stats(records)
    print(f"\nexperiment {args.experiment}: {len(records)} records "
          f"in {time.time() - t0:.0f}s -> {out}")
    print(f"{'solution':>10} {'alpha':>6}   "
          + "  ".join(f"{m:>10}" for m in ("PBM", "DDM", "CoSTA"))
          + "   winner")
    for scen in agg["scenarios"]:
        mean = scen["mean"]
        print(f"{scen['solution']:>10} {scen['alpha']:>6} "
              + "  ".join(f"{mean[m]:>10.3e}" for m in ("PBM", "DDM", "CoSTA"))
              + f"   {scen['winner']}" + (" (tie)" if scen["tie"] else ""))


if __name__ == "__main__":
    main()
