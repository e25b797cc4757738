"""File formats: dataset, CBTF tables, result records, iteration
reports, and message logs.

Datasets and results are JSON with named fields; reports and message
logs are comma-separated tables suitable for any external plotter.
Floats pass through ``json``/``repr`` at full precision, and all writes
are deterministic for identical inputs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .affinity import CbtfTable
from .energy import LinkingConfig, Partition
from .errors import InputError
from .model import AppearanceHistogram, CameraTopology, CandidateLinkSet, Observation
from .simnet import AgentMessage, MessageLog
from .subgradient import IterationRecord, RunReport

REPORT_COLUMNS = ("t", "alpha", "dual", "best_dual", "primal", "best_primal",
                  "conflicts")
MESSAGE_COLUMNS = ("iteration", "sender", "receiver", "kind", "bytes")


def topology_to_json(topology: CameraTopology) -> dict:
    return {
        "cameras": sorted(topology.cameras, key=str),
        "edges": sorted((sorted(e, key=str) if len(e) == 2
                         else [next(iter(e))] * 2) for e in topology.edges),
        "travel_window": [
            {"from": u, "to": v, "min": lo, "max": hi}
            for (u, v), (lo, hi) in sorted(topology.travel_window.items(),
                                           key=lambda kv: (str(kv[0][0]), str(kv[0][1])))],
        "direction_model": [
            {"camera_from": cf, "dir_leave": dl, "camera_to": ct,
             "dir_enter": de, "p": p}
            for (cf, dl, ct, de), p in sorted(topology.direction_model.items(),
                                              key=lambda kv: tuple(map(str, kv[0])))],
        "markov2": [
            {"first": a, "mid": b, "last": c, "p": p}
            for (a, b, c), p in sorted(topology.markov2.items(),
                                       key=lambda kv: tuple(map(str, kv[0])))],
    }


def topology_from_json(data: dict) -> CameraTopology:
    return CameraTopology(
        cameras=frozenset(data["cameras"]),
        edges=frozenset(frozenset(e) for e in data["edges"]),
        travel_window={(w["from"], w["to"]): (w["min"], w["max"])
                       for w in data.get("travel_window", [])},
        direction_model={(d["camera_from"], d["dir_leave"], d["camera_to"],
                          d["dir_enter"]): d["p"]
                         for d in data.get("direction_model", [])},
        markov2={(m["first"], m["mid"], m["last"]): m["p"]
                 for m in data.get("markov2", [])},
    )


def write_dataset(path, topology: CameraTopology, observations,
                  truth: dict | None = None) -> None:
    doc = {
        "topology": topology_to_json(topology),
        "observations": [
            {"id": o.id, "camera": o.camera, "t_enter": o.t_enter,
             "t_leave": o.t_leave, "dir_enter": o.dir_enter,
             "dir_leave": o.dir_leave, "histogram": o.appearance.mass.tolist()}
            for o in observations],
    }
    if truth is not None:
        doc["truth"] = [{"observation": oid, "person": truth[oid]}
                        for oid in sorted(truth)]
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def read_dataset(path):
    doc = json.loads(Path(path).read_text())
    topology = topology_from_json(doc["topology"])
    observations = [
        Observation(id=o["id"], camera=o["camera"],
                    appearance=AppearanceHistogram(np.array(o["histogram"])),
                    t_enter=o["t_enter"], t_leave=o["t_leave"],
                    dir_enter=o["dir_enter"], dir_leave=o["dir_leave"])
        for o in sorted(doc["observations"], key=lambda o: o["id"])]
    truth = None
    if "truth" in doc:
        truth = {r["observation"]: r["person"] for r in doc["truth"]}
    return topology, observations, truth


def write_cbtf(path, table: CbtfTable) -> None:
    doc = {
        "bins": table.bins,
        "pairs": [{"from": u, "to": v, "mapping": m.tolist()}
                  for (u, v), m in sorted(table.maps.items(),
                                          key=lambda kv: (str(kv[0][0]), str(kv[0][1])))],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def read_cbtf(path) -> CbtfTable:
    doc = json.loads(Path(path).read_text())
    table = CbtfTable(bins=doc["bins"])
    for rec in doc["pairs"]:
        table.set_entry(rec["from"], rec["to"], np.array(rec["mapping"]))
    return table


def write_result(path, config: LinkingConfig, partition: Partition,
                 energies: dict, metadata: dict) -> None:
    doc = {
        "active_links": config.active(),
        "active_pairs": [{"observation": oid, "pair": list(pq)}
                         for oid, pq in sorted(config.active_pairs.items())],
        "partition": partition.tracks,
        "energies": energies,
        "metadata": metadata,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def read_result(path) -> dict:
    return json.loads(Path(path).read_text())


def append_evaluation(path, evaluation) -> None:
    doc = read_result(path)
    doc["evaluation"] = {
        "precision": evaluation.precision,
        "recall": evaluation.recall,
        "f_measure": evaluation.f_measure,
        "estimated_tracks": evaluation.estimated_tracks,
        "true_tracks": evaluation.true_tracks,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def write_report(path, report: RunReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for rec in report.records:
            writer.writerow([rec.t, repr(rec.alpha), repr(rec.dual),
                             repr(rec.best_dual), repr(rec.primal),
                             repr(rec.best_primal), rec.conflicts])


def read_report(path) -> RunReport:
    report = RunReport()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != REPORT_COLUMNS:
            raise InputError(f"{path} is not an iteration report")
        for row in reader:
            report.records.append(IterationRecord(
                t=int(row["t"]), alpha=float(row["alpha"]),
                dual=float(row["dual"]), best_dual=float(row["best_dual"]),
                primal=float(row["primal"]),
                best_primal=float(row["best_primal"]),
                conflicts=int(row["conflicts"])))
    return report


def write_message_log(path, log: MessageLog) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MESSAGE_COLUMNS)
        for m in log.messages:
            writer.writerow([m.iteration, m.sender, m.receiver, m.kind,
                             m.byte_size()])
