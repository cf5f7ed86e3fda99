"""Command-line interface: run experiments, aggregate records, rank by factor.

Every flag can also be supplied through a JSON config file (--config) whose
keys are the flag names with dashes replaced by underscores; explicit flags
win over config values.
"""

import argparse
import json
import sys

from .harness import (DEFAULT_THRESHOLDS, ExperimentSpec, aggregate_stats,
                      emit_results, read_records_csv, run_experiment,
                      significance_curve)
from .manufactured import AlphaSplit, default_alpha_split


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _merge_config(args: argparse.Namespace, parser_defaults: dict) -> dict:
    """Config file < explicit flags; returns the effective option dict."""
    merged = dict(parser_defaults)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(parser_defaults)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    for key, default in parser_defaults.items():
        value = getattr(args, key)
        if value != default:
            merged[key] = value
    return merged


def _build_spec(opts: dict) -> ExperimentSpec:
    overrides = {}
    if opts["solutions"] is not None:
        sols = opts["solutions"]
        if isinstance(sols, str):
            sols = sols.replace(",", " ").split()
        overrides["solutions"] = tuple(sols)
    for key in ("elements", "steps", "seeds", "max_epochs", "workers"):
        if opts[key] is not None:
            overrides[key] = int(opts[key])
    if opts["lr"] is not None:
        overrides["learning_rate"] = float(opts["lr"])

    split = default_alpha_split()
    train = opts["alphas_train"]
    val = opts["alphas_val"]
    test = opts["alphas_test"]
    if train is not None or val is not None or test is not None:
        to_tuple = lambda v, d: d if v is None else tuple(
            _float_list(v) if isinstance(v, str) else [float(x) for x in v])
        split = AlphaSplit(train=to_tuple(train, split.train),
                           val=to_tuple(val, split.val),
                           test=to_tuple(test, split.test))
    overrides["alphas"] = split
    return ExperimentSpec.for_experiment(int(opts["experiment"]), **overrides)


def _cmd_run(args, defaults) -> int:
    opts = _merge_config(args, defaults)
    if opts["experiment"] is None:
        raise ValueError("--experiment is required (flag or config)")
    if opts["out"] is None:
        raise ValueError("--out is required (flag or config)")
    spec = _build_spec(opts)
    records, report = run_experiment(spec, verbose=not opts["quiet"])
    paths = emit_results(opts["out"], records, report)
    print(f"wrote {paths['records']} ({len(records)} records), "
          f"{paths['aggregates']}, {len(paths['plots'])} plot files")
    return 0


def _cmd_aggregate(args, defaults) -> int:
    opts = _merge_config(args, defaults)
    if opts["in_dir"] is None:
        raise ValueError("--in is required (flag or config)")
    records = read_records_csv(f"{opts['in_dir']}/records.csv")
    agg = aggregate_stats(records, group_by=opts["group_by"])
    out_path = f"{opts['in_dir']}/aggregate_{opts['group_by']}.json"
    with open(out_path, "w") as fh:
        json.dump(agg, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"{agg['n_scenarios']} scenarios (group by {opts['group_by']})")
    for gkey in sorted(agg["wins"]):
        row = agg["wins"][gkey]
        cells = "  ".join(f"{m}={row[m]}" for m in ("PBM", "DDM", "CoSTA"))
        print(f"  {gkey}: {cells}")
    totals = agg["totals"]
    print("  total: " + "  ".join(f"{m}={totals[m]}"
                                  for m in ("PBM", "DDM", "CoSTA")))
    print(f"wrote {out_path}")
    return 0


def _cmd_curve(args, defaults) -> int:
    opts = _merge_config(args, defaults)
    if opts["in_dir"] is None:
        raise ValueError("--in is required (flag or config)")
    thresholds = opts["thresholds"]
    if isinstance(thresholds, str):
        thresholds = _float_list(thresholds)
    records = read_records_csv(f"{opts['in_dir']}/records.csv")
    curve = significance_curve(records, thresholds)
    out_path = f"{opts['in_dir']}/significance.json"
    with open(out_path, "w") as fh:
        json.dump(curve, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print("factor " + "  ".join(f"{d:g}" for d in curve["thresholds"]))
    for model in ("PBM", "DDM", "CoSTA"):
        wins = " ".join(str(n) for n in curve["wins"][model])
        losses = " ".join(str(n) for n in curve["losses"][model])
        print(f"  {model}: wins [{wins}]  losses [{losses}]")
    print(f"wrote {out_path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="costafem",
        description="hybrid elasticity benchmark: run, aggregate, rank")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {}

    run_p = sub.add_parser("run", help="run one experiment and emit artifacts")
    run_p.add_argument("--experiment", type=int, choices=(1, 2, 3, 4),
                       default=None, help="modeling-error regime")
    run_p.add_argument("--solutions", default=None,
                       help="comma/space-separated solution labels")
    run_p.add_argument("--elements", type=int, default=None,
                       help="elements per side of the square mesh")
    run_p.add_argument("--steps", type=int, default=None,
                       help="time levels over [0, 1]")
    run_p.add_argument("--seeds", type=int, default=None,
                       help="number of network seeds (0..S-1)")
    run_p.add_argument("--lr", type=float, default=None, help="learning rate")
    run_p.add_argument("--max-epochs", dest="max_epochs", type=int,
                       default=None, help="epoch cap per training")
    run_p.add_argument("--workers", type=int, default=None,
                       help="concurrent training units")
    run_p.add_argument("--alphas-train", dest="alphas_train", default=None)
    run_p.add_argument("--alphas-val", dest="alphas_val", default=None)
    run_p.add_argument("--alphas-test", dest="alphas_test", default=None)
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--config", default=None, help="JSON config file")
    run_p.add_argument("--quiet", action="store_true", default=False)
    run_p.set_defaults(func=_cmd_run)

    agg_p = sub.add_parser("aggregate", help="winner tables from records.csv")
    agg_p.add_argument("--in", dest="in_dir", default=None,
                       help="directory holding records.csv")
    agg_p.add_argument("--group-by", dest="group_by", default="alpha",
                       choices=("alpha", "error", "solution"))
    agg_p.add_argument("--config", default=None, help="JSON config file")
    agg_p.set_defaults(func=_cmd_aggregate)

    curve_p = sub.add_parser("curve", help="win/loss counts by dominance factor")
    curve_p.add_argument("--in", dest="in_dir", default=None,
                         help="directory holding records.csv")
    curve_p.add_argument("--thresholds", default=list(DEFAULT_THRESHOLDS),
                         help="comma-separated factors >= 1")
    curve_p.add_argument("--config", default=None, help="JSON config file")
    curve_p.set_defaults(func=_cmd_curve)

    commands["run"] = run_p
    commands["aggregate"] = agg_p
    commands["curve"] = curve_p
    return parser, commands


def main(argv=None) -> int:
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    sub = commands[args.command]
    defaults = {key: sub.get_default(key)
                for key in vars(args) if key not in ("command", "func")}
    try:
        return args.func(args, defaults)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
