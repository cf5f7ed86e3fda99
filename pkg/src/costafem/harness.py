"""Benchmark harness: run experiments, score them, and emit artifacts.

An experiment rolls three model kinds (PBM, DDM, CoSTA) over held-out test
alphas of a manufactured solution and records the relative error at every
time level.  Four modeling-error regimes are supported:

1. none               -- the physics model sees the true load,
2. zero-load          -- the load term is removed entirely,
3. dimension-reduced  -- 3D solutions restricted to the z=0 plane drive a 2D model,
4. linearized         -- nonlinear-law solutions solved with the constant-E model.

Outputs are a records CSV (one row per model/seed/step), an aggregate JSON,
and per-plot CSVs of mean and mean+std error curves.  Reruns with the same
configuration are byte-identical.
"""

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .fem import ElasticMaterial, build_operators
from .hybrid import (MODEL_COSTA, MODEL_DDM, MODEL_ORDER, MODEL_PBM, CaseData,
                     build_case_data, rollout, samples_from_data)
from .manufactured import (AlphaSplit, default_alpha_split, get_case,
                           plane_load)
from .mesh import build_grid_mesh
from .neural import MlpNetwork, TrainConfig, TrainingDiverged, train

PBM_SEED = -1          # seed column value for the deterministic physics model
DEFAULT_THRESHOLDS = (1.0, 2.0, 5.0, 10.0, 100.0)

MODE_BY_EXPERIMENT = {1: "none", 2: "zero-load", 3: "dimension-reduced",
                      4: "linearized"}
DEFAULT_SOLUTIONS = {1: ("e1", "e2", "e3"), 2: ("e1", "e2", "e3"),
                     3: ("ed1", "ed2", "ed3"), 4: ("n1", "n2", "n3")}
DEFAULT_ELEMENTS = {1: 15, 2: 15, 3: 15, 4: 10}
DEFAULT_STEPS = {1: 1000, 2: 1000, 3: 1000, 4: 500}
DEFAULT_SEEDS = {1: 10, 2: 10, 3: 10, 4: 5}
DEFAULT_LR = {1: 1e-5, 2: 1e-5, 3: 1e-5, 4: 8e-5}

DESIGN_SWITCHES = {
    "strain_norm": "tensor-frobenius",
    "time_scheme": "three-level-central",
    "initial_history": "exact-at-minus-k",
    "load_derivation": "richardson-central-differences",
    "patience_unit": "epoch",
    "pbm_seed": PBM_SEED,
}


@dataclass(frozen=True)
class ExperimentSpec:
    """Complete, reproducible description of one benchmark run."""

    experiment: int
    solutions: tuple = ()
    elements: int = 15
    steps: int = 1000
    seeds: int = 10
    learning_rate: float = 1e-5
    alphas: AlphaSplit = field(default_factory=default_alpha_split)
    hidden_layers: int = 4
    hidden_width: int = 80
    batch_size: int = 128
    patience: int = 20
    max_epochs: int = 5000
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in MODE_BY_EXPERIMENT:
            raise ValueError(f"experiment must be one of {sorted(MODE_BY_EXPERIMENT)}, "
                             f"got {self.experiment}")
        if not self.solutions:
            raise ValueError("at least one solution label is required")
        if self.elements < 2:
            raise ValueError("need at least 2x2 elements for interior DOFs")
        if self.steps < 1 or self.seeds < 1 or self.workers < 1:
            raise ValueError("steps, seeds and workers must be >= 1")
        want_dim = 3 if self.mode == "dimension-reduced" else 2
        for label in self.solutions:
            case = get_case(label)
            if case.dimension != want_dim:
                raise ValueError(f"experiment {self.experiment} ({self.mode}) needs "
                                 f"{want_dim}D solutions, got {label!r}")
            if self.mode == "linearized" and not case.is_nonlinear:
                raise ValueError(f"experiment 4 needs nonlinear-law solutions, "
                                 f"got {label!r}")

    @property
    def mode(self) -> str:
        return MODE_BY_EXPERIMENT[self.experiment]

    @classmethod
    def for_experiment(cls, experiment: int, **overrides) -> "ExperimentSpec":
        """Benchmark defaults for the given experiment id, with overrides."""
        base = dict(solutions=DEFAULT_SOLUTIONS.get(experiment, ()),
                    elements=DEFAULT_ELEMENTS.get(experiment, 15),
                    steps=DEFAULT_STEPS.get(experiment, 1000),
                    seeds=DEFAULT_SEEDS.get(experiment, 10),
                    learning_rate=DEFAULT_LR.get(experiment, 1e-5))
        base.update(overrides)
        return cls(experiment=experiment, **base)


@dataclass(frozen=True)
class RrmseRecord:
    experiment: int
    solution: str
    alpha: float
    model: str
    seed: int
    step: int
    time: float
    rrmse: float

    def __post_init__(self):
        if self.step < 1:
            raise ValueError(f"step must be >= 1, got {self.step}")
        if self.rrmse < 0:
            raise ValueError(f"rrmse must be >= 0, got {self.rrmse}")


def rrmse(u: np.ndarray, u_exact: np.ndarray) -> float:
    """Relative error ||u - u_exact||_2 / ||u_exact||_2 over all DOFs."""
    u = np.asarray(u, dtype=float)
    u_exact = np.asarray(u_exact, dtype=float)
    if u.shape != u_exact.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {u_exact.shape}")
    denom = float(np.linalg.norm(u_exact))
    if denom == 0.0 or not np.isfinite(denom):
        raise ValueError("reference state has zero or non-finite norm")
    num = float(np.linalg.norm(u - u_exact))
    return num / denom if np.isfinite(num) else float("inf")


def _record_trajectory(records: list, spec: ExperimentSpec, data: CaseData,
                       traj, seed: int) -> None:
    k = 1.0 / spec.steps
    for step in range(1, data.n_steps + 1):
        if traj.diverged_at is not None and step >= traj.diverged_at:
            err = float("inf")
        else:
            err = rrmse(traj.states[step], data.exact_at(step))
        records.append(RrmseRecord(experiment=spec.experiment,
                                   solution=data.case_label, alpha=data.alpha,
                                   model=traj.kind, seed=seed, step=step,
                                   time=step * k, rrmse=err))


def _train_unit(spec: ExperimentSpec, kind: str, seed: int, dims, train_set,
                val_set):
    """Train one network; returns (model_or_None, summary_dict)."""
    kind_code = MODEL_ORDER.index(kind)
    rng = np.random.default_rng([seed, kind_code])
    net = MlpNetwork.init(list(dims), rng)
    cfg = TrainConfig(learning_rate=spec.learning_rate,
                      batch_size=spec.batch_size, patience=spec.patience,
                      max_epochs=spec.max_epochs, seed=seed)
    summary = {"kind": kind, "seed": seed}
    try:
        result = train(net, (train_set.inputs, train_set.targets),
                       (val_set.inputs, val_set.targets), cfg)
    except TrainingDiverged as exc:
        summary.update(diverged=True, error=str(exc))
        return None, summary
    summary.update(diverged=False, epochs=int(result.checks),
                   best_epoch=int(result.best_epoch),
                   best_val=float(result.val_history[result.best_epoch]))
    return result.model, summary


def run_experiment(spec: ExperimentSpec, verbose: bool = False):
    """Run one experiment; returns (records, report).

    The report carries the spec, design-decision switches, the package
    version, and one training summary per (case, seed, model kind).  Records
    are sorted canonically so emission is independent of scheduling.
    """
    k = 1.0 / spec.steps
    mesh = build_grid_mesh(spec.elements, spec.elements)
    ops = build_operators(mesh, ElasticMaterial(young=1.0, poisson=0.25), k)
    dims = ([ops.n_dofs] + [spec.hidden_width] * spec.hidden_layers
            + [ops.dofs.interior.size])

    records: list[RrmseRecord] = []
    report = {"spec": _spec_dict(spec), "mode": spec.mode,
              "version": __version__, "design": dict(DESIGN_SWITCHES),
              "n_dofs": ops.n_dofs, "n_interior": int(ops.dofs.interior.size),
              "training": []}

    for label in spec.solutions:
        case = get_case(label)
        load_field = None if spec.mode == "zero-load" else plane_load(case)
        if verbose:
            print(f"[experiment {spec.experiment}] case {label}: "
                  f"building trajectories")

        all_alphas = (list(spec.alphas.train) + list(spec.alphas.val)
                      + list(spec.alphas.test))
        data = {a: build_case_data(ops, case, a, spec.steps, load_field)
                for a in all_alphas}

        res_tr, ddm_tr = samples_from_data(
            ops, [data[a] for a in spec.alphas.train])
        res_va, ddm_va = samples_from_data(
            ops, [data[a] for a in spec.alphas.val])
        train_sets = {MODEL_COSTA: (res_tr, res_va), MODEL_DDM: (ddm_tr, ddm_va)}

        for a in spec.alphas.test:
            _record_trajectory(records, spec, data[a],
                               rollout(ops, data[a], MODEL_PBM), PBM_SEED)

        units = [(kind, seed) for seed in range(spec.seeds)
                 for kind in (MODEL_DDM, MODEL_COSTA)]

        def run_unit(unit):
            kind, seed = unit
            tr, va = train_sets[kind]
            model, summary = _train_unit(spec, kind, seed, dims, tr, va)
            summary["solution"] = label
            out = []
            for a in spec.alphas.test:
                if model is None:
                    traj = None
                else:
                    traj = rollout(ops, data[a], kind, model.predict)
                out.append((a, traj))
            return summary, out

        if spec.workers > 1:
            with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                results = list(pool.map(run_unit, units))
        else:
            results = [run_unit(u) for u in units]

        for (kind, seed), (summary, trajs) in zip(units, results):
            report["training"].append(summary)
            if verbose:
                print(f"[experiment {spec.experiment}] case {label} "
                      f"{kind} seed {seed}: {summary}")
            for a, traj in trajs:
                if traj is None:
                    for step in range(1, spec.steps + 1):
                        records.append(RrmseRecord(
                            experiment=spec.experiment, solution=label,
                            alpha=a, model=kind, seed=seed, step=step,
                            time=step * k, rrmse=float("inf")))
                else:
                    _record_trajectory(records, spec, data[a], traj, seed)

    records.sort(key=_record_key)
    return records, report


def _spec_dict(spec: ExperimentSpec) -> dict:
    d = asdict(spec)
    d["solutions"] = list(spec.solutions)
    d["alphas"] = {"train": list(spec.alphas.train),
                   "val": list(spec.alphas.val),
                   "test": list(spec.alphas.test)}
    d["mode"] = spec.mode
    return d


def _record_key(r: RrmseRecord):
    return (r.experiment, r.solution, r.alpha, MODEL_ORDER.index(r.model),
            r.seed, r.step)


# --- aggregation ---------------------------------------------------------------

def _final_stats(records):
    """Per (experiment, solution, alpha, model): mean/std of final-step rrmse.

    The mean is over seeds; std uses the N-1 convention and is 0 for a single
    seed.  Returns {scenario: {model: (mean, std)}} with scenario =
    (experiment, solution, alpha).
    """
    finals: dict = {}
    last_step: dict = {}
    for r in records:
        key = (r.experiment, r.solution, r.alpha, r.model, r.seed)
        if key not in last_step or r.step > last_step[key]:
            last_step[key] = r.step
            finals[key] = r.rrmse

    stats: dict = {}
    by_group: dict = {}
    for (exp, sol, alpha, model, seed), err in finals.items():
        by_group.setdefault((exp, sol, alpha, model), []).append((seed, err))
    for (exp, sol, alpha, model), pairs in by_group.items():
        errs = np.array([e for _, e in sorted(pairs)])
        mean = float(np.mean(errs))
        std = float(np.std(errs, ddof=1)) if len(errs) > 1 else 0.0
        stats.setdefault((exp, sol, alpha), {})[model] = (mean, std)
    return stats


def _pick_winner(scores: dict) -> tuple:
    """Lowest score wins; ties break in MODEL_ORDER and are flagged."""
    present = [m for m in MODEL_ORDER if m in scores]
    best = min(present, key=lambda m: (scores[m], MODEL_ORDER.index(m)))
    tie = sum(1 for m in present if scores[m] == scores[best]) > 1
    return best, tie


def _pick_loser(scores: dict) -> tuple:
    present = [m for m in MODEL_ORDER if m in scores]
    worst = max(present, key=lambda m: (scores[m], -MODEL_ORDER.index(m)))
    tie = sum(1 for m in present if scores[m] == scores[worst]) > 1
    return worst, tie


def aggregate_stats(records, group_by: str = "alpha") -> dict:
    """Final-error statistics, per-scenario winners, and grouped win counts.

    ``group_by`` is one of "alpha", "solution", "error" (modeling-error
    regime, i.e. experiment id).  The penalized ranking orders models by
    mean + one standard deviation; mean - std is never reported.
    """
    if group_by not in ("alpha", "solution", "error"):
        raise ValueError(f"group_by must be alpha|solution|error, got {group_by!r}")
    stats = _final_stats(records)

    scenarios = []
    wins: dict = {}
    wins_pen: dict = {}
    for (exp, sol, alpha) in sorted(stats):
        per_model = stats[(exp, sol, alpha)]
        means = {m: ms[0] for m, ms in per_model.items()}
        pen = {m: ms[0] + ms[1] for m, ms in per_model.items()}
        winner, tie = _pick_winner(means)
        winner_pen, tie_pen = _pick_winner(pen)
        scenarios.append({
            "experiment": exp, "solution": sol, "alpha": alpha,
            "mean": {m: per_model[m][0] for m in sorted(per_model)},
            "std": {m: per_model[m][1] for m in sorted(per_model)},
            "winner": winner, "tie": tie,
            "winner_penalized": winner_pen, "tie_penalized": tie_pen,
        })
        if group_by == "alpha":
            gkey = repr(float(alpha))
        elif group_by == "solution":
            gkey = sol
        else:
            gkey = f"experiment-{exp}"
        for table, w in ((wins, winner), (wins_pen, winner_pen)):
            row = table.setdefault(gkey, {m: 0 for m in MODEL_ORDER})
            row[w] += 1

    totals = {m: sum(row[m] for row in wins.values()) for m in MODEL_ORDER}
    totals_pen = {m: sum(row[m] for row in wins_pen.values())
                  for m in MODEL_ORDER}
    return {"group_by": group_by, "scenarios": scenarios, "wins": wins,
            "wins_penalized": wins_pen, "totals": totals,
            "totals_penalized": totals_pen,
            "n_scenarios": len(scenarios)}


def significance_curve(records, thresholds=DEFAULT_THRESHOLDS) -> dict:
    """Scenario win/loss counts by dominance factor.

    A model "wins by factor d" in a scenario when it is the scenario winner
    and every other model's mean final error is at least d times its own;
    losses mirror this for the scenario loser.  Counts are non-increasing in
    d and match the aggregate winner counts at d = 1.  The penalized variant
    scores by mean + std.
    """
    thresholds = [float(t) for t in thresholds]
    if any(t < 1.0 for t in thresholds):
        raise ValueError("thresholds must be >= 1")
    stats = _final_stats(records)

    out = {"thresholds": thresholds}
    for tag, penalize in (("", False), ("_penalized", True)):
        wins = {m: [0] * len(thresholds) for m in MODEL_ORDER}
        losses = {m: [0] * len(thresholds) for m in MODEL_ORDER}
        for scen in sorted(stats):
            per_model = stats[scen]
            score = {m: (ms[0] + ms[1] if penalize else ms[0])
                     for m, ms in per_model.items()}
            winner, _ = _pick_winner(score)
            loser, _ = _pick_loser(score)
            others_min = min(v for m, v in score.items() if m != winner)
            others_max = max(v for m, v in score.items() if m != loser)
            for j, d in enumerate(thresholds):
                if others_min >= d * score[winner]:
                    wins[winner][j] += 1
                if score[loser] >= d * others_max:
                    losses[loser][j] += 1
        out["wins" + tag] = wins
        out["losses" + tag] = losses
    out["n_scenarios"] = len(stats)
    return out


# --- emission -------------------------------------------------------------------

CSV_HEADER = ["experiment", "solution", "alpha", "model", "seed", "step",
              "time", "rrmse"]


def _fmt(x) -> str:
    return repr(float(x))


def write_records_csv(path, records) -> None:
    rows = sorted(records, key=_record_key)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.experiment, r.solution, _fmt(r.alpha), r.model,
                        r.seed, r.step, _fmt(r.time), _fmt(r.rrmse)])


def read_records_csv(path) -> list:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected records header {reader.fieldnames}")
        for row in reader:
            records.append(RrmseRecord(
                experiment=int(row["experiment"]), solution=row["solution"],
                alpha=float(row["alpha"]), model=row["model"],
                seed=int(row["seed"]), step=int(row["step"]),
                time=float(row["time"]), rrmse=float(row["rrmse"])))
    return records


def write_plot_csvs(out_dir, records) -> list:
    """Per (solution, alpha): step vs mean and mean+std error for each model."""
    os.makedirs(out_dir, exist_ok=True)
    series: dict = {}
    times: dict = {}
    for r in records:
        series.setdefault((r.experiment, r.solution, r.alpha, r.model),
                          {}).setdefault(r.step, []).append((r.seed, r.rrmse))
        times[(r.experiment, r.solution, r.alpha, r.step)] = r.time

    plots: dict = {}
    for (exp, sol, alpha, model), by_step in series.items():
        plots.setdefault((exp, sol, alpha), {})[model] = by_step

    written = []
    for (exp, sol, alpha) in sorted(plots):
        name = f"rrmse_exp{exp}_{sol}_alpha_{_fmt(alpha)}.csv"
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["model", "step", "time", "mean_rrmse",
                        "mean_plus_std"])
            for model in MODEL_ORDER:
                if model not in plots[(exp, sol, alpha)]:
                    continue
                by_step = plots[(exp, sol, alpha)][model]
                for step in sorted(by_step):
                    errs = np.array([e for _, e in sorted(by_step[step])])
                    mean = float(np.mean(errs))
                    std = float(np.std(errs, ddof=1)) if len(errs) > 1 else 0.0
                    w.writerow([model, step,
                                _fmt(times[(exp, sol, alpha, step)]),
                                _fmt(mean), _fmt(mean + std)])
        written.append(path)
    return written


def emit_results(out_dir, records, report, group_by: str = "alpha",
                 thresholds=DEFAULT_THRESHOLDS) -> dict:
    """Write records.csv, aggregates.json, and plot CSVs under ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {"records": os.path.join(out_dir, "records.csv"),
             "aggregates": os.path.join(out_dir, "aggregates.json")}
    write_records_csv(paths["records"], records)
    payload = {"report": report,
               "aggregates": aggregate_stats(records, group_by=group_by),
               "significance": significance_curve(records, thresholds)}
    with open(paths["aggregates"], "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["plots"] = write_plot_csvs(os.path.join(out_dir, "plots"), records)
    return paths
