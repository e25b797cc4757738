"""Centralized exact and relaxation oracles for desk-scale validation.

These implementations are deliberately independent of the
decomposition algorithms: brute force enumerates the feasible set
directly, the global assignment reformulates the linear problem for an
off-the-shelf optimal matcher, and the flow-relaxation bound follows
the centralized Lagrangian scheme with the inner minimization solved as
a linear program over a totally unimodular polytope (hence exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .assign import AssignmentProblem, solve_assignment
from .energy import EnergyModel, LinkingConfig, energy_linear, energy_quadratic
from .errors import SizeError
from .model import ORDINARY, CandidateLinkSet
from .subgradient import StepSchedule

_SRC_COL = "__source__"


def _config_from_predecessors(links: CandidateLinkSet, chosen: dict) -> LinkingConfig:
    """chosen maps observation id -> its active incoming link id; sink
    virtuals are implied for observations not used as a predecessor."""
    active = list(chosen.values())
    used_as_pred = {links.links[lid].src for lid in chosen.values()
                    if links.links[lid].kind == ORDINARY}
    for obs in links.observations:
        if obs.id not in used_as_pred:
            active.append(links.sink_virtual(obs.id))
    config = LinkingConfig.from_active(links, active)
    config.fill_pairs(links)
    return config


def enumerate_feasible(links: CandidateLinkSet, cap: int = 10):
    """Yield every feasible LinkingConfig by assigning each observation a
    predecessor consistent with successor uniqueness."""
    obs_ids = sorted(links.incoming)
    if len(obs_ids) > cap:
        raise SizeError(f"{len(obs_ids)} observations exceed the enumeration cap {cap}")

    chosen = {}
    used = set()

    def recurse(k: int):
        if k == len(obs_ids):
            yield _config_from_predecessors(links, chosen)
            return
        i = obs_ids[k]
        for lid in links.incoming[i]:
            lk = links.links[lid]
            if lk.kind == ORDINARY:
                if lk.src in used:
                    continue
                used.add(lk.src)
            chosen[i] = lid
            yield from recurse(k + 1)
            del chosen[i]
            if lk.kind == ORDINARY:
                used.discard(lk.src)

    yield from recurse(0)


def brute_force_linear(links: CandidateLinkSet, model: EnergyModel, cap: int = 10):
    """Exhaustive minimum of the linear energy over the feasible set."""
    best = None
    best_energy = math.inf
    for config in enumerate_feasible(links, cap):
        e = energy_linear(config, model)
        if e < best_energy:
            best_energy = e
            best = config
    return best, best_energy


def brute_force_quadratic(links: CandidateLinkSet, model: EnergyModel, cap: int = 8):
    """Exhaustive minimum of the quadratic energy over the feasible set."""
    best = None
    best_energy = math.inf
    for config in enumerate_feasible(links, cap):
        e = energy_quadratic(config, model, links)
        if e < best_energy:
            best_energy = e
            best = config
    return best, best_energy


def exact_linear_assignment(links: CandidateLinkSet, model: EnergyModel):
    """Optimal linear-energy configuration via one global assignment.

    Rows pick predecessors; successor uniqueness is the column capacity.
    Sink-virtual costs for unchosen successors are folded into the cell
    costs, so the assignment optimum equals the energy optimum.
    """
    obs_ids = sorted(links.incoming)
    const = sum(model.link_cost(links.sink_virtual(i)) for i in obs_ids)

    cost = {}
    cell_link = {}
    for i in obs_ids:
        for lid in links.incoming[i]:
            lk = links.links[lid]
            if lk.kind == ORDINARY:
                col = lk.src
                cost[(i, col)] = model.link_cost(lid) \
                    - model.link_cost(links.sink_virtual(lk.src))
            else:
                col = _SRC_COL
                cost[(i, col)] = model.link_cost(lid)
            cell_link[(i, col)] = lid

    problem = AssignmentProblem(rows=obs_ids,
                                cols=sorted({c for (_, c) in cost}, key=str),
                                cost=cost,
                                replicable_cols={_SRC_COL})
    assignment, total = solve_assignment(problem)
    chosen = {i: cell_link[(i, col)] for i, col in assignment.items()}
    config = _config_from_predecessors(links, chosen)
    return config, const + total


@dataclass
class LrmcfState:
    """State of the centralized flow-relaxation bound."""

    lam: np.ndarray                         # multiplier per observation
    pair_index: list                        # (obs id, p, q) per flat variable
    costs: np.ndarray                       # c_pq per flat variable
    best_bound: float = -math.inf
    trace: list = field(default_factory=list)


def _build_lrmcf(links: CandidateLinkSet, model: EnergyModel) -> LrmcfState:
    pair_index = []
    costs = []
    for obs in links.observations:
        for p in links.incoming[obs.id]:
            for q in links.outgoing[obs.id]:
                cp = model.link_cost(p)
                cq = model.link_cost(q)
                c = (0.5 * cp if links.is_ordinary(p) else cp) \
                    + (0.5 * cq if links.is_ordinary(q) else cq) \
                    + model.pair_cost(links, obs.id, p, q)
                pair_index.append((obs.id, p, q))
                costs.append(c)
    n_obs = len(links.observations)
    return LrmcfState(lam=np.zeros(n_obs), pair_index=pair_index,
                      costs=np.array(costs))


def lrmcf_lower_bound(links: CandidateLinkSet, model: EnergyModel,
                      schedule: StepSchedule | None = None,
                      iters: int = 500, cap: int = 8) -> float:
    """Best dual bound of the flow relaxation after ``iters`` multiplier
    updates.

    The inner minimization over binary conserved flows is solved as an
    LP; its constraint matrix is totally unimodular, so the LP optimum
    is the integer optimum.
    """
    n_obs = len(links.observations)
    if n_obs > cap:
        raise SizeError(f"{n_obs} observations exceed the relaxation cap {cap}")
    schedule = schedule or StepSchedule()
    state = _build_lrmcf(links, model)

    obs_order = [obs.id for obs in links.observations]
    obs_pos = {oid: k for k, oid in enumerate(obs_order)}
    n_vars = len(state.pair_index)
    obs_of_var = np.array([obs_pos[oid] for (oid, _, _) in state.pair_index])

    # Flow conservation: for each ordinary link q (y_i -> y_j),
    # sum of pairs (*, q) through y_i equals sum of pairs (q, *) through y_j.
    rows = []
    for lk in links.ordinary_links():
        row = np.zeros(n_vars)
        for v, (oid, p, q) in enumerate(state.pair_index):
            if oid == lk.src and q == lk.id:
                row[v] += 1.0
            if oid == lk.dst and p == lk.id:
                row[v] -= 1.0
        rows.append(row)
    a_eq = np.array(rows) if rows else None
    b_eq = np.zeros(len(rows)) if rows else None

    for t in range(1, iters + 1):
        adjusted = state.costs + state.lam[obs_of_var]
        res = linprog(adjusted, A_eq=a_eq, b_eq=b_eq, bounds=(0.0, 1.0),
                      method="highs")
        if not res.success:
            raise RuntimeError(f"flow subproblem failed: {res.message}")
        z = res.x
        bound = float(res.fun - state.lam.sum())
        state.best_bound = max(state.best_bound, bound)
        state.trace.append(bound)
        per_obs = np.bincount(obs_of_var, weights=z, minlength=n_obs)
        state.lam += schedule.alpha(t) * (per_obs - 1.0)
    return state.best_bound
