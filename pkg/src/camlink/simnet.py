"""Simulated distributed execution of the decomposition algorithms.

Each camera is an agent owning its slave problems.  The "network" is an
in-process scheduler delivering messages in deterministic
(iteration, sender, receiver, link id) order; messages exist only
between topology neighbors, which :func:`audit_locality` verifies.
Agents perform the same per-slave solves and the same per-link weight
arithmetic as the centralized loops, so the per-iteration reports are
bit-identical to ``run_ldd`` / ``run_qdd``.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from . import ldd as _ldd
from . import qdd as _qdd
from .energy import EnergyModel, energy_linear, energy_quadratic
from .errors import InputError
from .model import CameraTopology, CandidateLinkSet
from .subgradient import (GapTracker, IterationRecord, RunReport, StepSchedule,
                          StoppingRule)

OBSERVATION_SUMMARY = "observation_summary"
SLAVE_LABELS = "slave_labels"
CONVERGENCE_VOTE = "convergence_vote"


@dataclass(frozen=True)
class AgentMessage:
    iteration: int
    sender: object
    receiver: object
    kind: str
    payload: object

    def byte_size(self) -> int:
        return len(json.dumps(self.payload, sort_keys=True, default=str).encode())


@dataclass
class MessageLog:
    messages: list = field(default_factory=list)
    per_edge: dict = field(default_factory=dict)
    total_bytes: int = 0

    def record(self, message: AgentMessage) -> None:
        self.messages.append(message)
        key = (message.sender, message.receiver)
        self.per_edge[key] = self.per_edge.get(key, 0) + 1
        self.total_bytes += message.byte_size()

    def recount(self) -> dict:
        counts = {}
        for m in self.messages:
            key = (m.sender, m.receiver)
            counts[key] = counts.get(key, 0) + 1
        return counts


def audit_locality(log: MessageLog, topology: CameraTopology) -> bool:
    """True iff every message travels along a topology edge (self
    messages require a self-edge and never occur in engine logs)."""
    return all(topology.adjacent(m.sender, m.receiver) for m in log.messages)


def _broadcast_summaries(links: CandidateLinkSet, topology: CameraTopology,
                         log: MessageLog) -> None:
    # Phase 1: summaries flow to neighbors so each camera can compute
    # its local link costs.
    by_camera = {}
    for obs in links.observations:
        by_camera.setdefault(obs.camera, []).append(obs.id)
    for cam in sorted(by_camera, key=str):
        for neighbor in sorted(topology.neighbors(cam) - {cam}, key=str):
            log.record(AgentMessage(
                iteration=0, sender=cam, receiver=neighbor,
                kind=OBSERVATION_SUMMARY,
                payload={"observations": by_camera[cam]}))


def _exchange_labels(iteration: int, shared: list, log: MessageLog) -> None:
    # One message per direction per shared inter-camera link, in
    # deterministic (sender, receiver, link id) order.
    outbox = []
    for lid, cam_a, label_a, cam_b, label_b in shared:
        if cam_a == cam_b:
            continue
        outbox.append((cam_a, cam_b, lid, label_a))
        outbox.append((cam_b, cam_a, lid, label_b))
    outbox.sort(key=lambda m: (str(m[0]), str(m[1]), m[2]))
    for sender, receiver, lid, label in outbox:
        log.record(AgentMessage(iteration=iteration, sender=sender,
                                receiver=receiver, kind=SLAVE_LABELS,
                                payload={"link": lid, "label": label}))


def _vote(iteration: int, topology: CameraTopology, local_conflicts: dict,
          log: MessageLog) -> None:
    for cam in sorted(local_conflicts, key=str):
        for neighbor in sorted(topology.neighbors(cam) - {cam}, key=str):
            log.record(AgentMessage(iteration=iteration, sender=cam,
                                    receiver=neighbor, kind=CONVERGENCE_VOTE,
                                    payload={"conflicts": local_conflicts[cam]}))


def run_distributed(algo: str, topology: CameraTopology,
                    links: CandidateLinkSet, model: EnergyModel,
                    schedule: StepSchedule | None = None,
                    stop: StoppingRule | None = None):
    """Distributed execution of L-DD or Q-DD.

    Returns (LinkingConfig, RunReport, MessageLog); the report matches
    the centralized run exactly.
    """
    if algo == "ldd":
        return _run_distributed_ldd(topology, links, model, schedule, stop)
    if algo == "qdd":
        return _run_distributed_qdd(topology, links, model, schedule, stop)
    raise InputError(f"unknown algorithm {algo!r}")


def _run_distributed_ldd(topology, links, model, schedule, stop):
    schedule = schedule or StepSchedule()
    stop = stop or StoppingRule()
    slaves = _ldd.build_slaves(links, model, topology)
    owners = _ldd.link_owners(links, slaves)
    log = MessageLog()
    _broadcast_summaries(links, topology, log)

    report = RunReport()
    tracker = GapTracker(stop)
    started = time.perf_counter()
    for t in range(1, stop.max_iters + 1):
        # Each agent solves its own slaves; the slave list is already in
        # deterministic (camera, side) order, so summing in list order
        # reproduces the centralized dual bit for bit.
        dual = 0.0
        for slave in slaves:
            _, value = _ldd.solve_slave(slave, links)
            dual += value

        shared = []
        local_conflicts = {cam: 0 for cam in sorted(topology.cameras, key=str)}
        for lid in sorted(owners):
            pred_slave, succ_slave = owners[lid]
            lp = pred_slave.last_solution[lid]
            ls = succ_slave.last_solution[lid]
            shared.append((lid, pred_slave.owner_camera, lp,
                           succ_slave.owner_camera, ls))
            if lp != ls:
                # The predecessor-side camera tallies the conflict.
                local_conflicts[pred_slave.owner_camera] += 1
        _exchange_labels(t, shared, log)

        config = _ldd.extract_primal(slaves, links, owners)
        primal = energy_linear(config, model)
        conflicts = sum(local_conflicts.values())
        tracker.update(dual, primal, config, conflicts)
        alpha = schedule.alpha(t)
        report.records.append(IterationRecord(
            t=t, alpha=alpha, dual=dual, best_dual=tracker.best_dual,
            primal=primal, best_primal=tracker.best_primal, conflicts=conflicts))
        _vote(t, topology, local_conflicts, log)
        if tracker.should_stop():
            report.converged_at = t
            break
        # Each camera updates its own slave's copy using the exchanged label.
        for lid, cam_a, la, cam_b, lb in shared:
            if la != lb:
                pred_slave, succ_slave = owners[lid]
                _ldd.update_link_weight(pred_slave, lid, alpha, la, lb)
                _ldd.update_link_weight(succ_slave, lid, alpha, lb, la)
    else:
        report.hit_max_iters = True
    report.wall_time = time.perf_counter() - started
    return tracker.best_config, report, log


def _run_distributed_qdd(topology, links, model, schedule, stop):
    schedule = schedule or StepSchedule()
    stop = stop or StoppingRule()
    slaves = _qdd.build_observation_slaves(links, model)
    owners = _qdd.shared_link_owners(links, slaves)

    log = MessageLog()
    _broadcast_summaries(links, topology, log)

    report = RunReport()
    tracker = GapTracker(stop)
    started = time.perf_counter()
    for t in range(1, stop.max_iters + 1):
        dual = 0.0
        for slave in slaves:
            _, value = _qdd.solve_observation_slave(slave)
            dual += value

        shared = []
        local_conflicts = {cam: 0 for cam in sorted(topology.cameras, key=str)}
        for lid in sorted(owners):
            src_slave, dst_slave = owners[lid]
            a = _qdd.selected(src_slave, lid)
            b = _qdd.selected(dst_slave, lid)
            shared.append((lid, src_slave.owner_camera, a,
                           dst_slave.owner_camera, b))
            if a != b:
                local_conflicts[src_slave.owner_camera] += 1
        _exchange_labels(t, shared, log)

        config = _qdd.extract_primal_quadratic(slaves, links, owners)
        primal = energy_quadratic(config, model, links)
        conflicts = sum(local_conflicts.values())
        tracker.update(dual, primal, config, conflicts)
        alpha = schedule.alpha(t)
        report.records.append(IterationRecord(
            t=t, alpha=alpha, dual=dual, best_dual=tracker.best_dual,
            primal=primal, best_primal=tracker.best_primal, conflicts=conflicts))
        _vote(t, topology, local_conflicts, log)
        if tracker.should_stop():
            report.converged_at = t
            break
        for lid, cam_a, a, cam_b, b in shared:
            if a != b:
                src_slave, dst_slave = owners[lid]
                _qdd.update_node_weight(src_slave, lid, alpha, a, b)
                _qdd.update_node_weight(dst_slave, lid, alpha, b, a)
    else:
        report.hit_max_iters = True
    report.wall_time = time.perf_counter() - started
    return tracker.best_config, report, log
