"""Similarity factors and their conversion to link / link-pair costs.

Appearance similarity is based on the Bhattacharyya coefficient between
normalized color histograms, optionally after mapping one camera's
histograms onto another through learned cumulative brightness transfer
functions (CBTF).  Spatio-temporal similarity combines the hard travel
window with a discrete direction-transition probability.  All costs are
negative log similarities, clamped away from zero by a floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError, LearningError
from .model import (DIRECTIONS, ORDINARY, AppearanceHistogram, CameraTopology,
                    CandidateLinkSet, Link, Observation)


@dataclass
class AffinityConfig:
    appearance_mode: str = "direct"          # "direct" or "cbtf"
    floor_epsilon: float = 1e-6              # lower clamp on phi before the log
    virtual_link_cost: float = 25.0
    use_markov2: bool = False                # default: appearance-only pair costs
    direction_fallback: str = "lenient"      # "lenient": uniform prob, "strict": 0
    directions: tuple = DIRECTIONS

    def __post_init__(self):
        if not (0.0 < self.floor_epsilon < 1.0):
            raise ConfigurationError("floor_epsilon must lie in (0, 1)")
        if self.appearance_mode not in ("direct", "cbtf"):
            raise ConfigurationError(f"unknown appearance mode {self.appearance_mode!r}")


def bhattacharyya_coefficient(h1, h2) -> float:
    """BC = sum_b sqrt(h1[b] * h2[b]) for two normalized slices."""
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    if h1.shape != h2.shape:
        raise InputError(f"histogram bin counts differ: {h1.shape} vs {h2.shape}")
    return float(np.sqrt(h1 * h2).sum())


def _slice_distance(h1, h2) -> float:
    # Hellinger-style distance in [0, 1]; keeps 1 - distance a similarity.
    bc = min(bhattacharyya_coefficient(h1, h2), 1.0)
    return math.sqrt(max(1.0 - bc, 0.0))


def _mean_distance(o_i: AppearanceHistogram, o_j: AppearanceHistogram) -> float:
    if o_i.bins != o_j.bins:
        raise InputError("histogram bin counts differ")
    total = 0.0
    for r in range(2):
        for c in range(3):
            total += _slice_distance(o_i.mass[r, c], o_j.mass[r, c])
    return total / 6.0


def appearance_similarity_direct(o_i: AppearanceHistogram, o_j: AppearanceHistogram) -> float:
    """Similarity in [0, 1]: one minus the mean per-slice distance."""
    return 1.0 - _mean_distance(o_i, o_j)


@dataclass
class CbtfTable:
    """Monotone bin-to-bin maps per ordered camera pair, region, channel.

    ``maps[(u, v)]`` is an int array of shape (2, 3, bins) sending source
    bin b on camera u to a target bin on camera v.
    """

    bins: int
    maps: dict = field(default_factory=dict)

    def entry(self, u, v) -> np.ndarray:
        try:
            return self.maps[(u, v)]
        except KeyError:
            raise ConfigurationError(f"no CBTF entry for camera pair ({u!r}, {v!r})")

    def set_entry(self, u, v, mapping: np.ndarray) -> None:
        mapping = np.asarray(mapping, dtype=int)
        if mapping.shape != (2, 3, self.bins):
            raise InputError(f"CBTF mapping must have shape (2, 3, {self.bins})")
        if (np.diff(mapping, axis=2) < 0).any():
            raise InputError("CBTF mapping must be monotone non-decreasing")
        self.maps[(u, v)] = mapping

    @classmethod
    def identity(cls, bins: int, camera_pairs) -> "CbtfTable":
        table = cls(bins=bins)
        ident = np.broadcast_to(np.arange(bins), (2, 3, bins)).copy()
        for (u, v) in camera_pairs:
            table.set_entry(u, v, ident)
        return table


def learn_cbtf(pairs) -> np.ndarray:
    """Learn one (2, 3, bins) cumulative brightness transfer mapping.

    ``pairs`` is a sequence of (histogram on camera u, histogram on
    camera v) for the same person.  Mean histograms are accumulated per
    region/channel, and f(b) = min{b' : C_v(b') >= C_u(b)} on the
    cumulative sums.
    """
    pairs = list(pairs)
    if not pairs:
        raise LearningError("CBTF learning requires at least one training pair")
    bins = pairs[0][0].bins
    mean_u = np.zeros((2, 3, bins))
    mean_v = np.zeros((2, 3, bins))
    for hu, hv in pairs:
        if hu.bins != bins or hv.bins != bins:
            raise InputError("training histograms must share a bin count")
        mean_u += hu.mass
        mean_v += hv.mass
    mean_u /= len(pairs)
    mean_v /= len(pairs)

    mapping = np.zeros((2, 3, bins), dtype=int)
    for r in range(2):
        for c in range(3):
            cu = np.cumsum(mean_u[r, c])
            cv = np.cumsum(mean_v[r, c])
            # Guard against float drift at the top of the cumulative sums.
            cv[-1] = max(cv[-1], cu[-1])
            mapping[r, c] = np.searchsorted(cv, cu - 1e-12, side="left")
    return np.minimum(mapping, bins - 1)


def learn_cbtf_table(topology: CameraTopology, observations, truth: dict) -> CbtfTable:
    """Learn CBTF entries for every ordered camera pair from same-person
    observation pairs; both directions learned independently.

    Pair costs compare observations two cameras apart, so the table
    covers all pairs, not only adjacent ones; pairs without training
    data (and every camera with itself) get the identity mapping.
    """
    observations = list(observations)
    if not observations:
        raise LearningError("no observations to learn from")
    bins = observations[0].appearance.bins
    by_person = {}
    for o in observations:
        by_person.setdefault(truth[o.id], []).append(o)

    table = CbtfTable(bins=bins)
    ident = np.broadcast_to(np.arange(bins), (2, 3, bins)).copy()
    for u in sorted(topology.cameras, key=str):
        for v in sorted(topology.cameras, key=str):
            if v == u:
                table.set_entry(u, u, ident)
                continue
            pairs = []
            for group in by_person.values():
                on_u = [o for o in group if o.camera == u]
                on_v = [o for o in group if o.camera == v]
                pairs.extend((a.appearance, b.appearance)
                             for a in on_u for b in on_v)
            mapping = learn_cbtf(pairs) if pairs else ident
            table.set_entry(u, v, mapping)
    return table


def apply_cbtf(hist: AppearanceHistogram, mapping: np.ndarray) -> AppearanceHistogram:
    """Push histogram mass through a bin mapping and renormalize."""
    bins = hist.bins
    out = np.zeros_like(hist.mass)
    for r in range(2):
        for c in range(3):
            np.add.at(out[r, c], mapping[r, c], hist.mass[r, c])
    sums = out.sum(axis=2, keepdims=True)
    sums[sums == 0] = 1.0
    return AppearanceHistogram(out / sums * hist.mass.sum(axis=2, keepdims=True))


def appearance_similarity_cbtf(o_i: Observation, o_j: Observation, table: CbtfTable) -> float:
    """Symmetric mapped similarity: 1 - (Bhatt(o_i, o^_j) + Bhatt(o^_i, o_j)) / 2.

    o^_j is o_j mapped from camera j onto camera i, and o^_i the reverse;
    both directions use independently learned tables.
    """
    mapped_j = apply_cbtf(o_j.appearance, table.entry(o_j.camera, o_i.camera))
    mapped_i = apply_cbtf(o_i.appearance, table.entry(o_i.camera, o_j.camera))
    phi = 1.0 - 0.5 * _mean_distance(o_i.appearance, mapped_j) \
              - 0.5 * _mean_distance(mapped_i, o_j.appearance)
    return min(max(phi, 0.0), 1.0)


def travel_time_factor(topology: CameraTopology, from_obs: Observation,
                       to_obs: Observation) -> int:
    lo, hi = topology.window(from_obs.camera, to_obs.camera)
    gap = to_obs.t_enter - from_obs.t_leave
    return 1 if lo <= gap <= hi else 0


def direction_probability(topology: CameraTopology, from_obs: Observation,
                          to_obs: Observation, config: AffinityConfig) -> float:
    key = (from_obs.camera, from_obs.dir_leave, to_obs.camera, to_obs.dir_enter)
    if key in topology.direction_model:
        return topology.direction_model[key]
    if config.direction_fallback == "lenient":
        return 1.0 / len(config.directions)
    return 0.0


def spatio_temporal_factor(topology: CameraTopology, from_obs: Observation,
                           to_obs: Observation,
                           config: AffinityConfig | None = None) -> float:
    config = config or AffinityConfig()
    if not travel_time_factor(topology, from_obs, to_obs):
        return 0.0
    return direction_probability(topology, from_obs, to_obs, config)


def _appearance_similarity(o_i: Observation, o_j: Observation,
                           config: AffinityConfig, table: CbtfTable | None) -> float:
    if config.appearance_mode == "cbtf":
        if table is None:
            raise ConfigurationError("appearance_mode 'cbtf' requires a CbtfTable")
        return appearance_similarity_cbtf(o_i, o_j, table)
    return appearance_similarity_direct(o_i.appearance, o_j.appearance)


def link_cost(link: Link, links: CandidateLinkSet, topology: CameraTopology,
              config: AffinityConfig, table: CbtfTable | None = None) -> float:
    """theta_q = -ln(max(phi_ap * phi_st, floor)) for ordinary links,
    the configured constant for virtual links."""
    if link.kind != ORDINARY:
        return config.virtual_link_cost
    o_i = links.obs_index[link.src]
    o_j = links.obs_index[link.dst]
    phi = _appearance_similarity(o_i, o_j, config, table) \
        * spatio_temporal_factor(topology, o_i, o_j, config)
    return -math.log(max(phi, config.floor_epsilon))


def pair_cost(p: Link, q: Link, mid_obs: Observation, links: CandidateLinkSet,
              topology: CameraTopology, config: AffinityConfig,
              table: CbtfTable | None = None) -> float:
    """theta_pq for a predecessor-successor pair through ``mid_obs``.

    Pairs touching a virtual link carry no higher-order evidence and
    cost 0.
    """
    if p.kind != ORDINARY or q.kind != ORDINARY:
        return 0.0
    outer_i = links.obs_index[p.src]
    outer_j = links.obs_index[q.dst]
    phi = _appearance_similarity(outer_i, outer_j, config, table)
    if config.use_markov2:
        phi *= topology.markov2.get((outer_i.camera, mid_obs.camera, outer_j.camera), 0.0)
    return -math.log(max(phi, config.floor_epsilon))
