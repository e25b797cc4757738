import numpy as np
import pytest

from camlink import dataio
from camlink.affinity import learn_cbtf_table
from camlink.energy import Partition, linking_to_partition
from camlink.errors import InputError
from camlink.ldd import run_ldd
from camlink.metrics import evaluate
from camlink.model import build_candidate_links
from camlink.scenario import ScenarioSpec, generate, make_topology
from camlink.simnet import run_distributed

from instances import random_instance


def small_dataset(tmp_path, name="data.json"):
    topology = make_topology([0, 1], [(0, 1)], {(0, 1): 30.0})
    spec = ScenarioSpec(topology=topology, persons=2, duration=500.0,
                        seed=3, bins=8)
    observations, truth = generate(spec)
    path = tmp_path / name
    dataio.write_dataset(path, topology, observations, truth)
    return path, topology, observations, truth


class TestDatasetRoundTrip:
    def test_round_trip(self, tmp_path):
        path, topology, observations, truth = small_dataset(tmp_path)
        topo2, obs2, truth2 = dataio.read_dataset(path)
        assert topo2.cameras == topology.cameras
        assert topo2.edges == topology.edges
        assert topo2.travel_window == topology.travel_window
        assert truth2 == truth
        assert len(obs2) == len(observations)
        for a, b in zip(observations, obs2):
            assert (a.id, a.camera, a.t_enter, a.t_leave,
                    a.dir_enter, a.dir_leave) \
                == (b.id, b.camera, b.t_enter, b.t_leave,
                    b.dir_enter, b.dir_leave)
            assert np.array_equal(a.appearance.mass, b.appearance.mass)

    def test_truth_optional(self, tmp_path):
        path, topology, observations, _ = small_dataset(tmp_path)
        bare = tmp_path / "bare.json"
        dataio.write_dataset(bare, topology, observations, truth=None)
        _, _, truth = dataio.read_dataset(bare)
        assert truth is None

    def test_writes_deterministic(self, tmp_path):
        p1, topology, observations, truth = small_dataset(tmp_path, "a.json")
        p2 = tmp_path / "b.json"
        dataio.write_dataset(p2, topology, observations, truth)
        assert p1.read_text() == p2.read_text()


class TestCbtfRoundTrip:
    def test_round_trip(self, tmp_path):
        _, topology, observations, truth = small_dataset(tmp_path)
        table = learn_cbtf_table(topology, observations, truth)
        path = tmp_path / "cbtf.json"
        dataio.write_cbtf(path, table)
        table2 = dataio.read_cbtf(path)
        assert table2.bins == table.bins
        assert set(table2.maps) == set(table.maps)
        for key in table.maps:
            assert np.array_equal(table2.maps[key], table.maps[key])


class TestResultAndReport:
    def test_result_round_trip(self, tmp_path):
        topology, links, model = random_instance(0)
        config, report = run_ldd(links, model, topology)
        config.fill_pairs(links)
        partition = linking_to_partition(config, links)
        path = tmp_path / "out.result.json"
        dataio.write_result(path, config, partition,
                            energies={"linear": 1.5}, metadata={"algo": "ldd"})
        doc = dataio.read_result(path)
        assert doc["active_links"] == config.active()
        assert doc["partition"] == partition.tracks
        assert doc["energies"]["linear"] == 1.5
        assert doc["metadata"]["algo"] == "ldd"

    def test_append_evaluation(self, tmp_path):
        path = tmp_path / "out.result.json"
        topology, links, model = random_instance(0)
        config, _ = run_ldd(links, model, topology)
        partition = linking_to_partition(config, links)
        dataio.write_result(path, config, partition, {}, {})
        truth = {o.id: 0 for o in links.observations}
        ev = evaluate(Partition(tracks=partition.tracks), truth)
        dataio.append_evaluation(path, ev)
        doc = dataio.read_result(path)
        assert doc["evaluation"]["precision"] == ev.precision
        assert doc["evaluation"]["true_tracks"] == 1

    def test_report_round_trip_exact(self, tmp_path):
        topology, links, model = random_instance(1)
        _, report = run_ldd(links, model, topology)
        path = tmp_path / "run.report.csv"
        dataio.write_report(path, report)
        back = dataio.read_report(path)
        assert len(back.records) == len(report.records)
        for a, b in zip(report.records, back.records):
            # repr round trip keeps floats bit-exact
            assert (a.t, a.alpha, a.dual, a.best_dual, a.primal,
                    a.best_primal, a.conflicts) \
                == (b.t, b.alpha, b.dual, b.best_dual, b.primal,
                    b.best_primal, b.conflicts)

    def test_report_header_validated(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n1,2\n")
        with pytest.raises(InputError):
            dataio.read_report(bad)

    def test_message_log_rows(self, tmp_path):
        topology, links, model = random_instance(2)
        _, _, log = run_distributed("ldd", topology, links, model)
        path = tmp_path / "messages.csv"
        dataio.write_message_log(path, log)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == ",".join(dataio.MESSAGE_COLUMNS)
        assert len(lines) == len(log.messages) + 1
