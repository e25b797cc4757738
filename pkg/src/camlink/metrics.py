"""Association-quality scoring: precision, recall, F-measure, track counts."""

from __future__ import annotations

from dataclasses import dataclass

from .energy import Partition
from .errors import InputError


@dataclass
class Evaluation:
    precision: float
    recall: float
    f_measure: float
    estimated_tracks: int
    true_tracks: int


def evaluate(partition: Partition, truth: dict) -> Evaluation:
    """Score an estimated partition against observation -> person truth.

    Precision averages, over estimated tracks, the largest fraction of a
    track covered by one true identity; recall averages, over true
    identities, the largest fraction of an identity covered by one
    track.
    """
    covered = {oid for track in partition.tracks for oid in track}
    if covered != set(truth):
        raise InputError("partition does not cover exactly the observations in truth")

    true_groups = {}
    for oid, person in truth.items():
        true_groups.setdefault(person, set()).add(oid)

    est = [set(track) for track in partition.tracks]
    k = len(est)
    k_star = len(true_groups)

    precision = sum(max(len(y & g) for g in true_groups.values()) / len(y)
                    for y in est) / k if k else 0.0
    recall = sum(max((len(y & g) for y in est), default=0) / len(g)
                 for g in true_groups.values()) / k_star if k_star else 0.0
    denom = precision + recall
    f_measure = 2.0 * precision * recall / denom if denom > 0 else 0.0
    return Evaluation(precision=precision, recall=recall, f_measure=f_measure,
                      estimated_tracks=k, true_tracks=k_star)
