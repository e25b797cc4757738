"""Cameras, observations, and the candidate-link universe.

The candidate links between observations are induced by the camera
adjacency graph and by per-edge travel-time windows.  Every observation
additionally gets one virtual link from the synthetic source (track head)
and one to the synthetic sink (track tail).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError

# Sentinel endpoints for virtual links.  SINK sorts after every real id.
SOURCE = -1
SINK = 10**9

ORDINARY = "ordinary"
SOURCE_VIRTUAL = "source_virtual"
SINK_VIRTUAL = "sink_virtual"

DIRECTIONS = ("N", "S", "E", "W")


@dataclass
class CameraTopology:
    """Adjacency graph plus travel-time windows and motion models.

    ``edges`` holds unordered camera pairs (self-pairs permitted).
    ``travel_window`` is keyed by *ordered* pairs: windows need not be
    symmetric.  ``direction_model`` maps
    (camera_from, dir_leave, camera_to, dir_enter) -> probability, and
    ``markov2`` maps a camera-id triple (l_i, l_k, l_j) -> probability.
    """

    cameras: frozenset
    edges: frozenset
    travel_window: dict
    direction_model: dict = field(default_factory=dict)
    markov2: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cameras = frozenset(self.cameras)
        self.edges = frozenset(frozenset(e) if len(set(e)) == 2 else frozenset([next(iter(e))])
                               for e in self.edges)
        for e in self.edges:
            for cam in e:
                if cam not in self.cameras:
                    raise ConfigurationError(f"edge references unknown camera {cam!r}")
        for (u, v), (lo, hi) in self.travel_window.items():
            if lo < 0 or lo > hi:
                raise ConfigurationError(
                    f"travel window for ({u!r}, {v!r}) must satisfy 0 <= min <= max")
            if not self.adjacent(u, v):
                raise ConfigurationError(
                    f"travel window for non-adjacent cameras ({u!r}, {v!r})")

    def adjacent(self, u, v) -> bool:
        if u == v:
            return frozenset([u]) in self.edges
        return frozenset([u, v]) in self.edges

    def neighbors(self, camera) -> set:
        """All cameras reachable in one unobserved move, per the edge set.

        Includes ``camera`` itself only when a self-edge exists.
        """
        if camera not in self.cameras:
            raise ConfigurationError(f"unknown camera {camera!r}")
        out = set()
        for e in self.edges:
            if camera in e:
                if len(e) == 1:
                    out.add(camera)
                else:
                    out.update(c for c in e if c != camera)
        return out

    def window(self, u, v):
        try:
            return self.travel_window[(u, v)]
        except KeyError:
            raise ConfigurationError(f"no travel window for camera pair ({u!r}, {v!r})")

    def check_direction_model_normalized(self, atol: float = 1e-9) -> None:
        """Verify each (camera_from, dir_leave) row of the table sums to 1."""
        sums = {}
        for (cf, dl, _ct, _de), p in self.direction_model.items():
            sums[(cf, dl)] = sums.get((cf, dl), 0.0) + p
        for key, s in sums.items():
            if abs(s - 1.0) > atol:
                raise ConfigurationError(
                    f"direction model rows for {key!r} sum to {s}, expected 1")


def neighbors(topology: CameraTopology, camera) -> set:
    return topology.neighbors(camera)


@dataclass
class AppearanceHistogram:
    """Normalized RGB histograms over the lower and upper body regions.

    ``mass`` has shape (2 regions, 3 channels, bins); each
    (region, channel) slice sums to one.
    """

    mass: np.ndarray

    def __post_init__(self):
        self.mass = np.asarray(self.mass, dtype=float)
        if self.mass.ndim != 3 or self.mass.shape[:2] != (2, 3):
            raise InputError(f"histogram must have shape (2, 3, bins), got {self.mass.shape}")
        if (self.mass < 0).any():
            raise InputError("histogram mass must be non-negative")

    @property
    def bins(self) -> int:
        return self.mass.shape[2]

    def validate_normalized(self, atol: float = 1e-9) -> None:
        sums = self.mass.sum(axis=2)
        if not np.allclose(sums, 1.0, atol=atol):
            raise InputError("each (region, channel) histogram slice must sum to 1")

    @classmethod
    def normalized(cls, mass) -> "AppearanceHistogram":
        mass = np.asarray(mass, dtype=float)
        sums = mass.sum(axis=2, keepdims=True)
        if (sums <= 0).any():
            raise InputError("cannot normalize a histogram slice with zero mass")
        return cls(mass / sums)


@dataclass
class Observation:
    """One object transit through one camera's field of view."""

    id: int
    camera: object
    appearance: AppearanceHistogram
    t_enter: float
    t_leave: float
    dir_enter: str = "N"
    dir_leave: str = "N"

    def __post_init__(self):
        if self.t_enter > self.t_leave:
            raise InputError(f"observation {self.id}: t_enter > t_leave")


@dataclass(frozen=True)
class Link:
    id: int
    kind: str
    src: int  # observation id, or SOURCE
    dst: int  # observation id, or SINK


@dataclass
class CandidateLinkSet:
    """The link universe A with per-observation incidence and pair sets."""

    links: list            # Link records indexed by link id
    incoming: dict         # observation id -> tuple of link ids (A-)
    outgoing: dict         # observation id -> tuple of link ids (A+)
    observations: list     # the Observation sequence the set was built from
    obs_index: dict = field(init=False)

    def __post_init__(self):
        self.obs_index = {o.id: o for o in self.observations}

    @property
    def n_links(self) -> int:
        return len(self.links)

    def pairs(self, obs_id: int) -> list:
        """B(y_i): the full cross-product A-(y_i) x A+(y_i)."""
        return [(p, q) for p in self.incoming[obs_id] for q in self.outgoing[obs_id]]

    def is_ordinary(self, link_id: int) -> bool:
        return self.links[link_id].kind == ORDINARY

    def source_virtual(self, obs_id: int) -> int:
        for lid in self.incoming[obs_id]:
            if self.links[lid].kind == SOURCE_VIRTUAL:
                return lid
        raise InputError(f"observation {obs_id} has no source-virtual link")

    def sink_virtual(self, obs_id: int) -> int:
        for lid in self.outgoing[obs_id]:
            if self.links[lid].kind == SINK_VIRTUAL:
                return lid
        raise InputError(f"observation {obs_id} has no sink-virtual link")

    def ordinary_links(self):
        return [lk for lk in self.links if lk.kind == ORDINARY]


def build_candidate_links(topology: CameraTopology, observations) -> CandidateLinkSet:
    """Construct the set A from topology adjacency and travel windows.

    An ordinary link i -> j exists iff the cameras are adjacent (or
    self-adjacent) and the gap t_j^enter - t_i^leave lies inside the
    ordered pair's travel window, bounds inclusive.  Link ids are
    assigned in (src, dst) lexicographic order so identical inputs give
    identical ids.
    """
    observations = list(observations)
    seen = set()
    prev = None
    for o in observations:
        if o.id in seen:
            raise InputError(f"duplicate observation id {o.id}")
        seen.add(o.id)
        if prev is not None and (o.id <= prev.id or o.t_enter < prev.t_enter):
            raise InputError("observations must be sorted by id, in enter-time order")
        prev = o
        if o.camera not in topology.cameras:
            raise ConfigurationError(f"observation {o.id} on unknown camera {o.camera!r}")

    raw = []
    for oi in observations:
        raw.append((SOURCE, oi.id, SOURCE_VIRTUAL))
        raw.append((oi.id, SINK, SINK_VIRTUAL))
        for oj in observations:
            if oj.id == oi.id or oj.t_enter <= oi.t_leave:
                continue
            if not topology.adjacent(oi.camera, oj.camera):
                continue
            lo, hi = topology.window(oi.camera, oj.camera)
            gap = oj.t_enter - oi.t_leave
            if lo <= gap <= hi:
                raw.append((oi.id, oj.id, ORDINARY))

    raw.sort(key=lambda r: (r[0], r[1]))
    links = [Link(i, kind, src, dst) for i, (src, dst, kind) in enumerate(raw)]

    incoming = {o.id: [] for o in observations}
    outgoing = {o.id: [] for o in observations}
    for lk in links:
        if lk.kind == SOURCE_VIRTUAL:
            incoming[lk.dst].append(lk.id)
        elif lk.kind == SINK_VIRTUAL:
            outgoing[lk.src].append(lk.id)
        else:
            outgoing[lk.src].append(lk.id)
            incoming[lk.dst].append(lk.id)
    return CandidateLinkSet(
        links=links,
        incoming={k: tuple(sorted(v)) for k, v in incoming.items()},
        outgoing={k: tuple(sorted(v)) for k, v in outgoing.items()},
        observations=observations,
    )
