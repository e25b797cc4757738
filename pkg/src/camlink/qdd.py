"""Q-DD: dual decomposition of the quadratic energy into N
per-observation slave problems solved by direct search.

Each slave owns one observation's incoming links, outgoing links, and
predecessor-successor pairs.  A slave picks the (p, q) pair minimizing
node weight of p + node weight of q + pair weight; the uniqueness
constraint makes this a search over |B(y_i)| candidates.  Node weights
of shared ordinary links are nudged toward agreement each iteration;
pair weights are never changed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyModel, LinkingConfig, energy_quadratic
from .model import CandidateLinkSet
from .subgradient import (GapTracker, IterationRecord, RunReport, StepSchedule,
                          StoppingRule)


@dataclass
class ObservationSlave:
    owner_observation: int
    owner_camera: object
    inc_ids: tuple                 # A-(y_i), sorted
    out_ids: tuple                 # A+(y_i), sorted
    node_w_in: np.ndarray          # aligned with inc_ids
    node_w_out: np.ndarray         # aligned with out_ids
    pair_w: np.ndarray             # (|A-|, |A+|), never mutated
    inc_pos: dict = field(init=False)
    out_pos: dict = field(init=False)
    last_pair: tuple | None = None
    last_value: float = 0.0

    def __post_init__(self):
        self.inc_pos = {lid: k for k, lid in enumerate(self.inc_ids)}
        self.out_pos = {lid: k for k, lid in enumerate(self.out_ids)}


def build_observation_slaves(links: CandidateLinkSet, model: EnergyModel) -> list:
    """One slave per observation, in observation-id order; ordinary link
    weights halved, virtual weights kept whole."""
    slaves = []
    for obs in links.observations:
        inc = links.incoming[obs.id]
        out = links.outgoing[obs.id]
        w_in = np.array([0.5 * model.link_cost(l) if links.is_ordinary(l)
                         else model.link_cost(l) for l in inc])
        w_out = np.array([0.5 * model.link_cost(l) if links.is_ordinary(l)
                          else model.link_cost(l) for l in out])
        pair_w = model.pair_matrices.get(obs.id)
        if pair_w is None:
            pair_w = np.zeros((len(inc), len(out)))
        slaves.append(ObservationSlave(
            owner_observation=obs.id, owner_camera=obs.camera,
            inc_ids=inc, out_ids=out,
            node_w_in=w_in, node_w_out=w_out, pair_w=pair_w))
    return slaves


def solve_observation_slave(slave: ObservationSlave):
    """argmin over B(y_i) of node weight sums plus pair weight.

    np.argmin takes the first flat minimum, so ties break by (p, q) id
    order (rows and columns are sorted by link id).
    """
    grid = slave.node_w_in[:, None] + slave.node_w_out[None, :] + slave.pair_w
    flat = int(np.argmin(grid))
    r, c = divmod(flat, grid.shape[1])
    slave.last_pair = (slave.inc_ids[r], slave.out_ids[c])
    slave.last_value = float(grid[r, c])
    return slave.last_pair, slave.last_value


def shared_link_owners(links: CandidateLinkSet, slaves: list) -> dict:
    """Ordinary link id -> (successor-side slave of src, predecessor-side
    slave of dst)."""
    by_obs = {s.owner_observation: s for s in slaves}
    return {lk.id: (by_obs[lk.src], by_obs[lk.dst])
            for lk in links.ordinary_links()}


def selected(slave: ObservationSlave, link_id: int) -> int:
    if slave.last_pair is None:
        return 0
    return int(link_id in slave.last_pair)


def update_node_weight(slave: ObservationSlave, link_id: int, alpha: float,
                       own_label: int, other_label: int) -> None:
    mean = (own_label + other_label) / 2.0
    step = alpha * (own_label - mean)
    if link_id in slave.out_pos:
        slave.node_w_out[slave.out_pos[link_id]] += step
    else:
        slave.node_w_in[slave.inc_pos[link_id]] += step


def update_node_weights(slaves: list, links: CandidateLinkSet, alpha: float,
                        owners: dict | None = None) -> int:
    owners = owners or shared_link_owners(links, slaves)
    conflicts = 0
    for lid in sorted(owners):
        src_slave, dst_slave = owners[lid]
        a = selected(src_slave, lid)
        b = selected(dst_slave, lid)
        if a != b:
            conflicts += 1
            update_node_weight(src_slave, lid, alpha, a, b)
            update_node_weight(dst_slave, lid, alpha, b, a)
    return conflicts


def extract_primal_quadratic(slaves: list, links: CandidateLinkSet,
                             owners: dict | None = None) -> LinkingConfig:
    """Agreed ordinary links kept; each side of a conflicted link falls
    back to its virtual link.  Pair variables follow as products."""
    owners = owners or shared_link_owners(links, slaves)
    active = [lid for lid, (ss, ds) in owners.items()
              if selected(ss, lid) == 1 and selected(ds, lid) == 1]
    has_in = {links.links[lid].dst for lid in active}
    has_out = {links.links[lid].src for lid in active}
    for obs in links.observations:
        if obs.id not in has_in:
            active.append(links.source_virtual(obs.id))
        if obs.id not in has_out:
            active.append(links.sink_virtual(obs.id))
    config = LinkingConfig.from_active(links, active)
    config.fill_pairs(links)
    return config


def run_qdd(links: CandidateLinkSet, model: EnergyModel,
            schedule: StepSchedule | None = None,
            stop: StoppingRule | None = None):
    """Full Q-DD loop.  Returns (best primal LinkingConfig, RunReport)."""
    schedule = schedule or StepSchedule()
    stop = stop or StoppingRule()
    slaves = build_observation_slaves(links, model)
    owners = shared_link_owners(links, slaves)

    report = RunReport()
    tracker = GapTracker(stop)
    started = time.perf_counter()
    for t in range(1, stop.max_iters + 1):
        dual = 0.0
        for slave in slaves:
            _, value = solve_observation_slave(slave)
            dual += value
        config = extract_primal_quadratic(slaves, links, owners)
        primal = energy_quadratic(config, model, links)
        conflicts = sum(1 for lid, (ss, ds) in owners.items()
                        if selected(ss, lid) != selected(ds, lid))
        tracker.update(dual, primal, config, conflicts)
        alpha = schedule.alpha(t)
        report.records.append(IterationRecord(
            t=t, alpha=alpha, dual=dual, best_dual=tracker.best_dual,
            primal=primal, best_primal=tracker.best_primal, conflicts=conflicts))
        if tracker.should_stop():
            report.converged_at = t
            break
        update_node_weights(slaves, links, alpha, owners)
    else:
        report.hit_max_iters = True
    report.wall_time = time.perf_counter() - started
    return tracker.best_config, report
