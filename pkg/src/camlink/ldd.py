"""L-DD: dual decomposition of the linear energy into 2K assignment
slave problems with projected-subgradient coordination.

The link set A is split into per-camera predecessor and successor
subsets.  Every ordinary link lives in exactly two slaves with half its
cost on each side; every virtual link lives in exactly one slave with
full cost.  Each iteration solves all slaves as small assignment
problems, sums their optima into a dual lower bound, extracts a feasible
primal by conflict resolution, and nudges the shared-link weights toward
agreement.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .assign import AssignmentProblem, solve_assignment
from .energy import EnergyModel, LinkingConfig, energy_linear
from .errors import ConfigurationError
from .model import ORDINARY, SINK_VIRTUAL, SOURCE_VIRTUAL, CandidateLinkSet
from .subgradient import (GapTracker, IterationRecord, RunReport, StepSchedule,
                          StoppingRule)

PRED = "-"
SUCC = "+"

_VIRTUAL_COL = "__virtual__"


@dataclass
class SlaveProblem:
    """One per-camera, per-side assignment subproblem."""

    owner_camera: object
    side: str                      # PRED or SUCC
    obs_ids: tuple
    scope: tuple                   # link ids in A-(Y_u) or A+(Y_u)
    weights: dict                  # link id -> current theta^sigma
    initial_weights: dict = field(default_factory=dict)
    last_solution: dict = field(default_factory=dict)
    last_value: float = 0.0

    def key(self):
        return (self.owner_camera, self.side)


def build_slaves(links: CandidateLinkSet, model: EnergyModel, topology) -> list:
    """2K slaves in (camera, side) order, weights split per the half-cost rule."""
    by_camera = {}
    for obs in links.observations:
        by_camera.setdefault(obs.camera, []).append(obs.id)
    for cam in by_camera:
        if cam not in topology.cameras:
            raise ConfigurationError(f"observation camera {cam!r} not in topology")

    slaves = []
    for cam in sorted(topology.cameras):
        obs_ids = tuple(sorted(by_camera.get(cam, ())))
        for side in (PRED, SUCC):
            incidence = links.incoming if side == PRED else links.outgoing
            scope = tuple(sorted(lid for i in obs_ids for lid in incidence[i]))
            weights = {}
            for lid in scope:
                theta = model.link_cost(lid)
                weights[lid] = 0.5 * theta if links.is_ordinary(lid) else theta
            slaves.append(SlaveProblem(owner_camera=cam, side=side,
                                       obs_ids=obs_ids, scope=scope,
                                       weights=weights,
                                       initial_weights=dict(weights)))
    return slaves


def link_owners(links: CandidateLinkSet, slaves: list) -> dict:
    """Map each ordinary link id to its (predecessor-side, successor-side)
    owning slaves."""
    index = {s.key(): s for s in slaves}
    owners = {}
    for lk in links.ordinary_links():
        cam_src = links.obs_index[lk.src].camera
        cam_dst = links.obs_index[lk.dst].camera
        owners[lk.id] = (index[(cam_dst, PRED)], index[(cam_src, SUCC)])
    return owners


def solve_slave(slave: SlaveProblem, links: CandidateLinkSet):
    """Solve the slave's assignment problem at its current weights.

    Rows are the owner's observations; ordinary candidate observations
    are capacity-one columns and the virtual node is replicable.
    Returns (labels: link id -> 0/1, optimal value).
    """
    cost = {}
    cell_link = {}
    cols = set()
    for i in slave.obs_ids:
        incident = links.incoming[i] if slave.side == PRED else links.outgoing[i]
        for lid in incident:
            lk = links.links[lid]
            if lk.kind == ORDINARY:
                col = lk.src if slave.side == PRED else lk.dst
            else:
                col = _VIRTUAL_COL
            cost[(i, col)] = slave.weights[lid]
            cell_link[(i, col)] = lid
            cols.add(col)

    problem = AssignmentProblem(rows=list(slave.obs_ids),
                                cols=sorted(cols, key=str),
                                cost=cost,
                                replicable_cols={_VIRTUAL_COL} & cols)
    assignment, value = solve_assignment(problem)
    labels = {lid: 0 for lid in slave.scope}
    for row, col in assignment.items():
        labels[cell_link[(row, col)]] = 1
    slave.last_solution = labels
    slave.last_value = value
    return labels, value


def update_link_weight(slave: SlaveProblem, link_id: int, alpha: float,
                       own_label: int, other_label: int) -> None:
    """Projected-subgradient weight step for one shared link in one slave."""
    mean = (own_label + other_label) / 2.0
    slave.weights[link_id] += alpha * (own_label - mean)


def update_weights(slaves: list, links: CandidateLinkSet, alpha: float,
                   owners: dict | None = None) -> int:
    """Apply the weight step to every shared ordinary link; virtual-link
    weights never change.  Returns the number of disagreeing links."""
    owners = owners or link_owners(links, slaves)
    conflicts = 0
    for lid in sorted(owners):
        pred_slave, succ_slave = owners[lid]
        lp = pred_slave.last_solution[lid]
        ls = succ_slave.last_solution[lid]
        if lp != ls:
            conflicts += 1
            update_link_weight(pred_slave, lid, alpha, lp, ls)
            update_link_weight(succ_slave, lid, alpha, ls, lp)
    return conflicts


def extract_primal(slaves: list, links: CandidateLinkSet,
                   owners: dict | None = None) -> LinkingConfig:
    """Keep ordinary links both owners agree on; repair uniqueness with
    virtual links.  Always feasible."""
    owners = owners or link_owners(links, slaves)
    active = [lid for lid, (ps, ss) in owners.items()
              if ps.last_solution[lid] == 1 and ss.last_solution[lid] == 1]
    has_in = {links.links[lid].dst for lid in active}
    has_out = {links.links[lid].src for lid in active}
    for obs in links.observations:
        if obs.id not in has_in:
            active.append(links.source_virtual(obs.id))
        if obs.id not in has_out:
            active.append(links.sink_virtual(obs.id))
    return LinkingConfig.from_active(links, active)


def run_ldd(links: CandidateLinkSet, model: EnergyModel, topology,
            schedule: StepSchedule | None = None,
            stop: StoppingRule | None = None):
    """Full L-DD loop.  Returns (best primal LinkingConfig, RunReport)."""
    schedule = schedule or StepSchedule()
    stop = stop or StoppingRule()
    slaves = build_slaves(links, model, topology)
    owners = link_owners(links, slaves)

    report = RunReport()
    tracker = GapTracker(stop)
    started = time.perf_counter()
    for t in range(1, stop.max_iters + 1):
        dual = 0.0
        for slave in slaves:
            _, value = solve_slave(slave, links)
            dual += value
        config = extract_primal(slaves, links, owners)
        primal = energy_linear(config, model)
        conflicts = sum(1 for lid, (ps, ss) in owners.items()
                        if ps.last_solution[lid] != ss.last_solution[lid])
        tracker.update(dual, primal, config, conflicts)
        alpha = schedule.alpha(t)
        report.records.append(IterationRecord(
            t=t, alpha=alpha, dual=dual, best_dual=tracker.best_dual,
            primal=primal, best_primal=tracker.best_primal, conflicts=conflicts))
        if tracker.should_stop():
            report.converged_at = t
            break
        update_weights(slaves, links, alpha, owners)
    else:
        report.hit_max_iters = True
    report.wall_time = time.perf_counter() - started
    return tracker.best_config, report
