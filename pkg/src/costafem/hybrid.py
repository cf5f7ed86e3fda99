"""Hybrid time stepping: corrective source terms and pure data-driven steps.

Three model kinds advance the same discrete system:

* PBM   -- the finite-element step alone.
* CoSTA -- the finite-element step, re-solved with a predicted residual
           source added to the interior right-hand side.  The uncorrected
           prediction is the network input, so the solver runs twice per level.
* DDM   -- a network maps the full previous state to the interior next state;
           boundary values are imposed exactly.

Residual targets are defined against the exact solution: r = L (U_exact -
U_pbm) on interior DOFs, where both states carry the exact boundary data.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fem import (FemOperators, StatePair, apply_dirichlet, compose_full,
                  time_rhs, time_step)
from .manufactured import ManufacturedCase, plane_displacement

MODEL_PBM = "PBM"
MODEL_DDM = "DDM"
MODEL_COSTA = "CoSTA"
MODEL_ORDER = (MODEL_PBM, MODEL_DDM, MODEL_COSTA)

Predictor = Callable[[np.ndarray], np.ndarray]
LoadField = Callable[[float, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class CaseData:
    """Exact states and assembled loads for one (case, alpha) trajectory.

    ``exact[i + 1]`` is the exact nodal state at time level i for
    i = -1 .. n_steps (the pre-initial level seeds the time stepper), with
    t_i = i * k.  ``loads[i]`` is the assembled load vector at level i; what
    it contains (true, restricted, or zero load) is the caller's modeling
    choice.  Index 0 is never read by the steppers.
    """

    case_label: str
    alpha: float
    exact: np.ndarray   # (n_steps + 2, n_dofs)
    loads: np.ndarray   # (n_steps + 1, n_dofs)

    @property
    def n_steps(self) -> int:
        return self.exact.shape[0] - 2

    def exact_at(self, level: int) -> np.ndarray:
        """Exact full-space state at time level ``level`` (>= -1)."""
        return self.exact[level + 1]


def build_case_data(ops: FemOperators, case: ManufacturedCase, alpha: float,
                    n_steps: int, load_field: Optional[LoadField]) -> CaseData:
    """Evaluate exact states at all levels and assemble per-level loads.

    ``load_field(t, points, alpha)`` gives the body load the physics model is
    allowed to see; ``None`` means a zero load vector at every level.
    """
    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps}")
    mesh, k = ops.mesh, ops.k
    disp = plane_displacement(case)

    exact = np.empty((n_steps + 2, ops.n_dofs))
    for level in range(-1, n_steps + 1):
        exact[level + 1] = disp(level * k, mesh.nodes, alpha).reshape(-1)

    loads = np.zeros((n_steps + 1, ops.n_dofs))
    if load_field is not None:
        from .fem import assemble_load
        for level in range(1, n_steps + 1):
            t = level * k
            loads[level] = assemble_load(mesh, lambda pts: load_field(t, pts, alpha))
    return CaseData(case_label=case.label, alpha=alpha, exact=exact, loads=loads)


def pbm_predict(ops: FemOperators, state: StatePair, f_next: np.ndarray,
                g_next: np.ndarray) -> np.ndarray:
    """Uncorrected physics step (alias of the finite-element time step)."""
    return time_step(ops, state, f_next, g_next)


def compute_residual(ops: FemOperators, exact_next: np.ndarray,
                     rhs_next: np.ndarray) -> np.ndarray:
    """Interior residual the corrective source must supply.

    ``rhs_next`` is the full-space right-hand side of the physics solve at
    the next level.  Adding the returned vector to that solve's reduced
    right-hand side makes the exact interior state the solution.
    """
    interior, boundary = ops.dofs.interior, ops.dofs.boundary
    return (ops.lhat_ii @ exact_next[interior]
            + ops.lhat_ib @ exact_next[boundary]
            - rhs_next[interior])


def costa_step(ops: FemOperators, state: StatePair, f_next: np.ndarray,
               g_next: np.ndarray, predictor: Predictor) -> np.ndarray:
    """Corrected step: predict the residual from the uncorrected solve, re-solve."""
    rhs = time_rhs(ops, state, f_next)
    reduced = apply_dirichlet(ops, rhs, g_next)
    u_bar = compose_full(ops, ops.solve_interior(reduced), g_next)
    r = np.asarray(predictor(u_bar), dtype=float)
    if r.shape != (ops.dofs.interior.size,):
        raise ValueError(f"predicted residual has shape {r.shape}, "
                         f"expected {(ops.dofs.interior.size,)}")
    return compose_full(ops, ops.solve_interior(reduced + r), g_next)


def ddm_step(ops: FemOperators, u_prev: np.ndarray, g_next: np.ndarray,
             predictor: Predictor) -> np.ndarray:
    """Purely data-driven step; boundary DOFs come from the Dirichlet data."""
    interior = np.asarray(predictor(u_prev), dtype=float)
    if interior.shape != (ops.dofs.interior.size,):
        raise ValueError(f"predicted state has shape {interior.shape}, "
                         f"expected {(ops.dofs.interior.size,)}")
    return compose_full(ops, interior, g_next)


@dataclass(frozen=True)
class SampleSet:
    """Network samples with their provenance tags."""

    inputs: np.ndarray    # (n, n_dofs)
    targets: np.ndarray   # (n, n_interior)
    alphas: np.ndarray    # (n,)
    steps: np.ndarray     # (n,) target time level
    case_label: str

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def subset(self, mask: np.ndarray) -> "SampleSet":
        return SampleSet(inputs=self.inputs[mask], targets=self.targets[mask],
                         alphas=self.alphas[mask], steps=self.steps[mask],
                         case_label=self.case_label)

    def for_alphas(self, alphas) -> "SampleSet":
        return self.subset(np.isin(self.alphas, np.asarray(list(alphas))))


def samples_from_data(ops: FemOperators, data_list: list[CaseData]):
    """Residual and data-driven samples from precomputed trajectories.

    Every sample is built from the exact previous states (one physics solve
    per level, vectorized over levels).  Returns (residual_set, ddm_set) with
    one sample per (alpha, level) each.
    """
    if not data_list:
        raise ValueError("no case data given")
    interior, boundary = ops.dofs.interior, ops.dofs.boundary
    k2 = ops.k**2
    res_in, res_tg, ddm_in, ddm_tg, tags_a, tags_i = [], [], [], [], [], []

    for data in data_list:
        n = data.n_steps
        if n < 1:
            raise ValueError(f"case data for alpha={data.alpha} has no steps")
        u_curr = data.exact[1:n + 1]          # levels 0 .. n-1
        u_prev = data.exact[0:n]              # levels -1 .. n-2
        u_next = data.exact[2:n + 2]          # levels 1 .. n
        f_next = data.loads[1:n + 1]

        rhs = f_next + (ops.mass @ (2.0 * u_curr - u_prev).T).T / k2
        g = u_next[:, boundary]
        reduced = rhs[:, interior] - (ops.lhat_ib @ g.T).T
        ubar_int = ops.solve_interior(reduced.T).T
        ubar = np.empty_like(u_next)
        ubar[:, interior] = ubar_int
        ubar[:, boundary] = g

        resid = ((ops.lhat_ii @ u_next[:, interior].T).T
                 + (ops.lhat_ib @ g.T).T - rhs[:, interior])

        res_in.append(ubar)
        res_tg.append(resid)
        ddm_in.append(u_curr)
        ddm_tg.append(u_next[:, interior])
        tags_a.append(np.full(n, data.alpha))
        tags_i.append(np.arange(1, n + 1))

    label = data_list[0].case_label
    tags_a = np.concatenate(tags_a)
    tags_i = np.concatenate(tags_i)
    residual_set = SampleSet(inputs=np.concatenate(res_in),
                             targets=np.concatenate(res_tg),
                             alphas=tags_a, steps=tags_i, case_label=label)
    ddm_set = SampleSet(inputs=np.concatenate(ddm_in),
                        targets=np.concatenate(ddm_tg),
                        alphas=tags_a.copy(), steps=tags_i.copy(),
                        case_label=label)
    return residual_set, ddm_set


def build_training_sets(ops: FemOperators, case: ManufacturedCase, alphas,
                        n_steps: int, load_field: Optional[LoadField] = None):
    """Convenience wrapper: build case data for every alpha, then sample."""
    data_list = [build_case_data(ops, case, a, n_steps, load_field) for a in alphas]
    return samples_from_data(ops, data_list)


@dataclass(frozen=True)
class Trajectory:
    """One rollout.  Rows of ``states`` after a divergence are NaN."""

    kind: str
    case_label: str
    alpha: float
    states: np.ndarray            # (n_steps + 1, n_dofs), row i = level i
    diverged_at: Optional[int]    # first non-finite level, or None

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None


def rollout(ops: FemOperators, data: CaseData, kind: str,
            predictor: Optional[Predictor] = None) -> Trajectory:
    """Advance a model from exact initial data, feeding on its own states.

    Boundary DOFs are set to the exact Dirichlet data at every level.  A
    non-finite state marks the trajectory diverged instead of raising.
    """
    if kind not in MODEL_ORDER:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_ORDER}")
    if kind != MODEL_PBM and predictor is None:
        raise ValueError(f"{kind} rollout needs a predictor")

    n = data.n_steps
    boundary = ops.dofs.boundary
    states = np.full((n + 1, ops.n_dofs), np.nan)
    states[0] = data.exact_at(0)
    u_curr = data.exact_at(0)
    u_prev = data.exact_at(-1)
    diverged_at = None

    for i in range(n):
        g = data.exact_at(i + 1)[boundary]
        f = data.loads[i + 1]
        state = StatePair(u_curr=u_curr, u_prev=u_prev, t_index=i)
        if kind == MODEL_PBM:
            nxt = time_step(ops, state, f, g)
        elif kind == MODEL_COSTA:
            nxt = costa_step(ops, state, f, g, predictor)
        else:
            nxt = ddm_step(ops, u_curr, g, predictor)
        if not np.all(np.isfinite(nxt)):
            diverged_at = i + 1
            break
        states[i + 1] = nxt
        u_prev, u_curr = u_curr, nxt

    return Trajectory(kind=kind, case_label=data.case_label, alpha=data.alpha,
                      states=states, diverged_at=diverged_at)


def exact_residual_predictor(ops: FemOperators, data: CaseData) -> Predictor:
    """Diagnostic predictor returning the exact residual at each successive level.

    Stateful: the i-th call answers for time level i+1, mirroring how a
    corrected rollout consumes one prediction per step.  With this predictor
    a corrected rollout must reproduce the exact interior solution to solver
    precision.
    """
    counter = {"level": 0}

    def predict(_ubar: np.ndarray) -> np.ndarray:
        counter["level"] += 1
        level = counter["level"]
        state = StatePair(u_curr=data.exact_at(level - 1),
                          u_prev=data.exact_at(level - 2), t_index=level - 1)
        rhs = time_rhs(ops, state, data.loads[level])
        return compute_residual(ops, data.exact_at(level), rhs)

    return predict
