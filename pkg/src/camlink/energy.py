"""Energy models, feasibility checks, and partition conversions.

A linking configuration is feasible when every observation has exactly
one active incoming and one active outgoing link (the uniqueness
constraint).  The quadratic form additionally requires every pair
variable to equal the product of its member links.  Evaluation does not
require feasibility: subproblem outputs are scored before consensus.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .affinity import AffinityConfig, CbtfTable, link_cost, pair_cost
from .errors import EncodingError, FeasibilityError, InputError
from .model import ORDINARY, CameraTopology, CandidateLinkSet


@dataclass
class EnergyModel:
    """Costs theta_q for every link and theta_pq for every pair in B.

    Pair costs are stored per observation as an (|A-|, |A+|) matrix
    aligned with the sorted incoming/outgoing link-id tuples; |B| grows
    as sum |A-|*|A+| and a flat map would not scale.
    """

    theta: np.ndarray                 # indexed by link id
    pair_matrices: dict = field(default_factory=dict)  # obs id -> ndarray

    def link_cost(self, link_id: int) -> float:
        return float(self.theta[link_id])

    def pair_cost(self, links: CandidateLinkSet, obs_id: int, p: int, q: int) -> float:
        mat = self.pair_matrices.get(obs_id)
        if mat is None:
            return 0.0
        i = links.incoming[obs_id].index(p)
        j = links.outgoing[obs_id].index(q)
        return float(mat[i, j])


def build_energy_model(links: CandidateLinkSet, topology: CameraTopology,
                       config: AffinityConfig | None = None,
                       table: CbtfTable | None = None,
                       with_pairs: bool = True) -> EnergyModel:
    """Populate theta over A (and theta_pq over B) from the affinity models."""
    config = config or AffinityConfig()
    theta = np.empty(links.n_links)
    for lk in links.links:
        theta[lk.id] = link_cost(lk, links, topology, config, table)

    pair_matrices = {}
    if with_pairs:
        for obs in links.observations:
            inc = links.incoming[obs.id]
            out = links.outgoing[obs.id]
            mat = np.zeros((len(inc), len(out)))
            for a, p in enumerate(inc):
                for b, q in enumerate(out):
                    mat[a, b] = pair_cost(links.links[p], links.links[q], obs,
                                          links, topology, config, table)
            pair_matrices[obs.id] = mat
    return EnergyModel(theta=theta, pair_matrices=pair_matrices)


@dataclass
class LinkingConfig:
    """Binary state of all links; pair variables stored sparsely.

    ``x`` is a 0/1 vector indexed by link id.  ``active_pairs`` maps an
    observation id to its active (p, q) pair; absent entries read as 0.
    """

    x: np.ndarray
    active_pairs: dict = field(default_factory=dict)

    @classmethod
    def from_active(cls, links: CandidateLinkSet, active_ids) -> "LinkingConfig":
        x = np.zeros(links.n_links, dtype=np.int8)
        for lid in active_ids:
            if lid < 0 or lid >= links.n_links:
                raise InputError(f"unknown link id {lid}")
            x[lid] = 1
        return cls(x=x)

    def active(self):
        return [int(i) for i in np.flatnonzero(self.x)]

    def fill_pairs(self, links: CandidateLinkSet) -> None:
        """Set x_pq = x_p * x_q for the (at most one) active pair per observation."""
        self.active_pairs = {}
        for obs in links.observations:
            act_in = [p for p in links.incoming[obs.id] if self.x[p]]
            act_out = [q for q in links.outgoing[obs.id] if self.x[q]]
            if len(act_in) == 1 and len(act_out) == 1:
                self.active_pairs[obs.id] = (act_in[0], act_out[0])


@dataclass
class Partition:
    """Tracks as time-ordered observation-id sequences."""

    tracks: list

    @property
    def n_tracks(self) -> int:
        return len(self.tracks)


def is_feasible_linear(config: LinkingConfig, links: CandidateLinkSet) -> bool:
    if len(config.x) != links.n_links:
        raise InputError("configuration does not cover the link set")
    for obs in links.observations:
        if sum(int(config.x[p]) for p in links.incoming[obs.id]) != 1:
            return False
        if sum(int(config.x[q]) for q in links.outgoing[obs.id]) != 1:
            return False
    return True


def is_feasible_quadratic(config: LinkingConfig, links: CandidateLinkSet) -> bool:
    if not is_feasible_linear(config, links):
        return False
    for obs in links.observations:
        for p in links.incoming[obs.id]:
            for q in links.outgoing[obs.id]:
                x_pq = 1 if config.active_pairs.get(obs.id) == (p, q) else 0
                if x_pq != int(config.x[p]) * int(config.x[q]):
                    return False
    return True


def energy_linear(config: LinkingConfig, model: EnergyModel) -> float:
    return float(model.theta @ config.x)


def energy_quadratic(config: LinkingConfig, model: EnergyModel,
                     links: CandidateLinkSet) -> float:
    total = energy_linear(config, model)
    for obs_id, (p, q) in config.active_pairs.items():
        total += model.pair_cost(links, obs_id, p, q)
    return total


def linking_to_partition(config: LinkingConfig, links: CandidateLinkSet) -> Partition:
    """Follow active ordinary links from each track head to its tail."""
    if not is_feasible_linear(config, links):
        raise FeasibilityError("configuration violates the uniqueness constraint")
    successor = {}
    heads = []
    for obs in links.observations:
        p = next(p for p in links.incoming[obs.id] if config.x[p])
        if links.links[p].kind != ORDINARY:
            heads.append(obs.id)
        q = next(q for q in links.outgoing[obs.id] if config.x[q])
        lk = links.links[q]
        if lk.kind == ORDINARY:
            successor[obs.id] = lk.dst
    tracks = []
    for head in heads:
        track = [head]
        while track[-1] in successor:
            track.append(successor[track[-1]])
        tracks.append(track)
    return Partition(tracks=tracks)


def partition_to_linking(partition: Partition, links: CandidateLinkSet) -> LinkingConfig:
    """Inverse of linking_to_partition; requires every consecutive pair
    in every track to be a candidate ordinary link."""
    link_by_endpoints = {(lk.src, lk.dst): lk.id for lk in links.links
                         if lk.kind == ORDINARY}
    active = []
    covered = set()
    for track in partition.tracks:
        if not track:
            raise InputError("partition contains an empty track")
        covered.update(track)
        active.append(links.source_virtual(track[0]))
        active.append(links.sink_virtual(track[-1]))
        for a, b in zip(track, track[1:]):
            try:
                active.append(link_by_endpoints[(a, b)])
            except KeyError:
                raise EncodingError(f"no candidate link {a} -> {b}; "
                                    "partition is not representable")
    if covered != set(links.incoming):
        raise InputError("partition does not cover the observation set exactly")
    config = LinkingConfig.from_active(links, active)
    config.fill_pairs(links)
    return config
