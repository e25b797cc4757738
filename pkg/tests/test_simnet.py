import pytest

from camlink.errors import InputError
from camlink.ldd import run_ldd
from camlink.qdd import run_qdd
from camlink.simnet import (CONVERGENCE_VOTE, OBSERVATION_SUMMARY,
                            SLAVE_LABELS, audit_locality, run_distributed)

from instances import random_instance


def records_tuple(report):
    return [(r.t, r.alpha, r.dual, r.best_dual, r.primal, r.best_primal,
             r.conflicts) for r in report.records]


class TestEquivalence:
    def test_ldd_bitwise_equal(self):
        for seed in range(8):
            topology, links, model = random_instance(seed)
            c_config, c_report = run_ldd(links, model, topology)
            d_config, d_report, _ = run_distributed("ldd", topology, links, model)
            assert records_tuple(c_report) == records_tuple(d_report)
            assert (c_config.x == d_config.x).all()

    def test_qdd_bitwise_equal(self):
        for seed in range(8):
            topology, links, model = random_instance(seed, pair_cost_scale=3.0)
            c_config, c_report = run_qdd(links, model)
            d_config, d_report, _ = run_distributed("qdd", topology, links, model)
            assert records_tuple(c_report) == records_tuple(d_report)
            assert (c_config.x == d_config.x).all()
            assert c_config.active_pairs == d_config.active_pairs

    def test_unknown_algorithm(self):
        topology, links, model = random_instance(0)
        with pytest.raises(InputError):
            run_distributed("simplex", topology, links, model)


class TestMessageTraffic:
    def test_locality_holds(self):
        for seed in range(6):
            topology, links, model = random_instance(seed)
            _, _, log = run_distributed("ldd", topology, links, model)
            assert audit_locality(log, topology)
            _, _, log = run_distributed("qdd", topology, links, model)
            assert audit_locality(log, topology)

    def test_summary_phase_before_iterations(self):
        topology, links, model = random_instance(1)
        _, _, log = run_distributed("ldd", topology, links, model)
        summaries = [m for m in log.messages if m.kind == OBSERVATION_SUMMARY]
        assert summaries
        assert all(m.iteration == 0 for m in summaries)
        assert all(m.kind != OBSERVATION_SUMMARY
                   for m in log.messages if m.iteration > 0)

    def test_label_exchange_counts(self):
        topology, links, model = random_instance(2)
        _, report, log = run_distributed("ldd", topology, links, model)
        inter = [lk for lk in links.ordinary_links()
                 if links.obs_index[lk.src].camera != links.obs_index[lk.dst].camera]
        labels = [m for m in log.messages if m.kind == SLAVE_LABELS]
        # two directed messages per inter-camera link per iteration
        assert len(labels) == 2 * len(inter) * report.iterations

    def test_vote_messages_each_iteration(self):
        topology, links, model = random_instance(3)
        _, report, log = run_distributed("ldd", topology, links, model)
        votes = [m for m in log.messages if m.kind == CONVERGENCE_VOTE]
        by_iter = {}
        for m in votes:
            by_iter.setdefault(m.iteration, 0)
            by_iter[m.iteration] += 1
        assert set(by_iter) == set(range(1, report.iterations + 1))

    def test_log_bookkeeping_consistent(self):
        topology, links, model = random_instance(4)
        _, _, log = run_distributed("qdd", topology, links, model)
        assert log.per_edge == log.recount()
        assert log.total_bytes == sum(m.byte_size() for m in log.messages)

    def test_deterministic_log(self):
        topology, links, model = random_instance(5)
        _, _, log1 = run_distributed("ldd", topology, links, model)
        _, _, log2 = run_distributed("ldd", topology, links, model)
        assert [(m.iteration, m.sender, m.receiver, m.kind, str(m.payload))
                for m in log1.messages] \
            == [(m.iteration, m.sender, m.receiver, m.kind, str(m.payload))
                for m in log2.messages]
