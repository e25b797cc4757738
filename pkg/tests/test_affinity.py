import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from camlink.affinity import (AffinityConfig, CbtfTable, apply_cbtf,
                              appearance_similarity_cbtf,
                              appearance_similarity_direct,
                              bhattacharyya_coefficient, direction_probability,
                              learn_cbtf, learn_cbtf_table, link_cost,
                              pair_cost, spatio_temporal_factor,
                              travel_time_factor)
from camlink.errors import ConfigurationError, InputError, LearningError
from camlink.model import (AppearanceHistogram, CameraTopology, Link,
                           build_candidate_links)

from instances import flat_histogram, make_observation


def histogram_strategy(bins=4):
    slot = st.floats(min_value=0.01, max_value=1.0)
    return st.lists(slot, min_size=6 * bins, max_size=6 * bins).map(
        lambda vals: AppearanceHistogram.normalized(
            np.asarray(vals).reshape(2, 3, bins)))


def shifted_histogram(hist, offset):
    out = np.zeros_like(hist.mass)
    bins = hist.bins
    for b in range(bins):
        out[:, :, min(max(b + offset, 0), bins - 1)] += hist.mass[:, :, b]
    return AppearanceHistogram(out)


def bump_histogram(center, bins=8, width=1.0):
    x = np.arange(bins)
    slab = np.exp(-0.5 * ((x - center) / width) ** 2)
    return AppearanceHistogram.normalized(np.broadcast_to(slab, (2, 3, bins)).copy())


class TestBhattacharyya:
    def test_identical(self):
        h = np.array([0.25, 0.25, 0.25, 0.25])
        assert bhattacharyya_coefficient(h, h) == pytest.approx(1.0)

    def test_disjoint(self):
        assert bhattacharyya_coefficient([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_known_value(self):
        got = bhattacharyya_coefficient([0.5, 0.5], [0.9, 0.1])
        assert got == pytest.approx(math.sqrt(0.45) + math.sqrt(0.05), abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            bhattacharyya_coefficient([0.5, 0.5], [1.0])

    @given(histogram_strategy(), histogram_strategy())
    @settings(max_examples=50, deadline=None)
    def test_symmetric_and_bounded(self, h1, h2):
        per_slice = [bhattacharyya_coefficient(h1.mass[r, c], h2.mass[r, c])
                     for r in range(2) for c in range(3)]
        rev = [bhattacharyya_coefficient(h2.mass[r, c], h1.mass[r, c])
               for r in range(2) for c in range(3)]
        assert per_slice == pytest.approx(rev)
        assert all(0.0 <= bc <= 1.0 + 1e-9 for bc in per_slice)


class TestDirectSimilarity:
    def test_identical_is_one(self):
        h = flat_histogram()
        assert appearance_similarity_direct(h, h) == pytest.approx(1.0)

    def test_disjoint_is_zero(self):
        h1 = AppearanceHistogram(np.stack(
            [np.tile([1.0, 0.0], (3, 1)), np.tile([1.0, 0.0], (3, 1))]))
        h2 = AppearanceHistogram(np.stack(
            [np.tile([0.0, 1.0], (3, 1)), np.tile([0.0, 1.0], (3, 1))]))
        assert appearance_similarity_direct(h1, h2) == pytest.approx(0.0)

    def test_known_value(self):
        # every slice [0.5, 0.5] vs [0.9, 0.1]
        h1 = AppearanceHistogram(np.full((2, 3, 2), 0.5))
        h2 = AppearanceHistogram(np.broadcast_to([0.9, 0.1], (2, 3, 2)).copy())
        bc = math.sqrt(0.45) + math.sqrt(0.05)
        expected = 1.0 - math.sqrt(1.0 - bc)
        assert appearance_similarity_direct(h1, h2) == pytest.approx(expected, abs=1e-12)

    @given(histogram_strategy(), histogram_strategy())
    @settings(max_examples=50, deadline=None)
    def test_symmetric_bounded(self, h1, h2):
        s = appearance_similarity_direct(h1, h2)
        assert s == pytest.approx(appearance_similarity_direct(h2, h1))
        assert -1e-9 <= s <= 1.0 + 1e-9

    def test_bin_mismatch(self):
        with pytest.raises(InputError):
            appearance_similarity_direct(flat_histogram(4), flat_histogram(8))


class TestCbtfLearning:
    def test_identity_when_distributions_match(self):
        h = bump_histogram(3.0)
        mapping = learn_cbtf([(h, h)])
        assert (mapping == np.arange(8)).all()

    def test_recovers_constant_shift(self):
        h = bump_histogram(2.0, bins=8)
        shifted = shifted_histogram(h, 2)
        mapping = learn_cbtf([(h, shifted)])
        # interior source bins map two bins up
        assert (mapping[:, :, 1:5] == np.arange(1, 5) + 2).all()
        assert (np.diff(mapping, axis=2) >= 0).all()

    def test_empty_training_set(self):
        with pytest.raises(LearningError):
            learn_cbtf([])

    @given(histogram_strategy(bins=8), histogram_strategy(bins=8))
    @settings(max_examples=50, deadline=None)
    def test_mapping_monotone_and_in_range(self, hu, hv):
        mapping = learn_cbtf([(hu, hv)])
        assert (np.diff(mapping, axis=2) >= 0).all()
        assert mapping.min() >= 0 and mapping.max() <= 7

    def test_apply_cbtf_inverts_shift(self):
        h = bump_histogram(2.0, bins=8)
        shifted = shifted_histogram(h, 2)
        mapping = learn_cbtf([(shifted, h)])
        back = apply_cbtf(shifted, mapping)
        # mass clamped at the top edge cannot be recovered exactly
        assert appearance_similarity_direct(back, h) \
            > appearance_similarity_direct(shifted, h)
        assert appearance_similarity_direct(back, h) > 0.9

    def test_table_entry_validation(self):
        table = CbtfTable(bins=4)
        with pytest.raises(InputError):
            table.set_entry(1, 2, np.array([[[3, 2, 1, 0]] * 3] * 2))
        with pytest.raises(ConfigurationError):
            table.entry(1, 2)


class TestCbtfSimilarity:
    def topo(self):
        return CameraTopology(cameras={1, 2},
                              edges={frozenset({1, 2})},
                              travel_window={(1, 2): (0.0, 50.0),
                                             (2, 1): (0.0, 50.0)})

    @given(histogram_strategy(bins=8), histogram_strategy(bins=8))
    @settings(max_examples=30, deadline=None)
    def test_identity_table_matches_direct(self, h1, h2):
        table = CbtfTable.identity(8, [(1, 2), (2, 1)])
        o1 = make_observation(0, 1, 0.0, 1.0, hist=h1)
        o2 = make_observation(1, 2, 2.0, 3.0, hist=h2)
        assert appearance_similarity_cbtf(o1, o2, table) == pytest.approx(
            appearance_similarity_direct(h1, h2), abs=1e-9)

    def test_shift_compensation_beats_direct(self):
        h = bump_histogram(6.0, bins=16)
        shifted = shifted_histogram(h, 3)
        o1 = make_observation(0, 1, 0.0, 1.0, hist=h)
        o2 = make_observation(1, 2, 2.0, 3.0, hist=shifted)
        table = CbtfTable(bins=16)
        table.set_entry(1, 2, learn_cbtf([(h, shifted)]))
        table.set_entry(2, 1, learn_cbtf([(shifted, h)]))
        direct = appearance_similarity_direct(h, shifted)
        mapped = appearance_similarity_cbtf(o1, o2, table)
        assert mapped > direct
        assert mapped > 0.99

    def test_learn_table_covers_both_directions(self):
        topo = self.topo()
        h = bump_histogram(2.0, bins=8)
        shifted = shifted_histogram(h, 2)
        obs = [make_observation(0, 1, 0.0, 1.0, hist=h),
               make_observation(1, 2, 5.0, 6.0, hist=shifted)]
        table = learn_cbtf_table(topo, obs, truth={0: "a", 1: "a"})
        assert (1, 2) in table.maps and (2, 1) in table.maps
        assert not (table.maps[(1, 2)] == table.maps[(2, 1)]).all()

    def test_learn_table_identity_without_pairs(self):
        topo = self.topo()
        obs = [make_observation(0, 1, 0.0, 1.0)]
        table = learn_cbtf_table(topo, obs, truth={0: "a"})
        assert (table.maps[(1, 2)] == np.arange(4)).all()


class TestSpatioTemporal:
    def topo(self):
        return CameraTopology(cameras={1, 2},
                              edges={frozenset({1, 2})},
                              travel_window={(1, 2): (2.0, 6.0),
                                             (2, 1): (2.0, 6.0)})

    def obs_pair(self, gap):
        return (make_observation(0, 1, 0.0, 1.0),
                make_observation(1, 2, 1.0 + gap, 2.0 + gap))

    def test_window_inclusive(self):
        topo = self.topo()
        for gap, ok in ((2.0, 1), (6.0, 1), (4.0, 1), (1.99, 0), (6.01, 0)):
            a, b = self.obs_pair(gap)
            assert travel_time_factor(topo, a, b) == ok

    def test_lenient_fallback_uniform(self):
        topo = self.topo()
        a, b = self.obs_pair(3.0)
        config = AffinityConfig()
        assert direction_probability(topo, a, b, config) == pytest.approx(0.25)
        assert spatio_temporal_factor(topo, a, b, config) == pytest.approx(0.25)

    def test_strict_fallback_zero(self):
        topo = self.topo()
        a, b = self.obs_pair(3.0)
        config = AffinityConfig(direction_fallback="strict")
        assert spatio_temporal_factor(topo, a, b, config) == 0.0

    def test_learned_direction_entry(self):
        topo = self.topo()
        a, b = self.obs_pair(3.0)
        topo.direction_model[(1, a.dir_leave, 2, b.dir_enter)] = 0.7
        assert spatio_temporal_factor(topo, a, b, AffinityConfig()) == pytest.approx(0.7)

    def test_outside_window_zero_regardless(self):
        topo = self.topo()
        a, b = self.obs_pair(10.0)
        assert spatio_temporal_factor(topo, a, b, AffinityConfig()) == 0.0


class TestCosts:
    def build(self):
        topo = CameraTopology(cameras={1, 2},
                              edges={frozenset({1, 2})},
                              travel_window={(1, 2): (0.0, 50.0),
                                             (2, 1): (0.0, 50.0)})
        obs = [make_observation(0, 1, 0.0, 1.0),
               make_observation(1, 2, 4.0, 5.0)]
        return topo, build_candidate_links(topo, obs)

    def test_virtual_link_default_cost(self):
        topo, links = self.build()
        config = AffinityConfig()
        for lk in links.links:
            if lk.kind != "ordinary":
                assert link_cost(lk, links, topo, config) == 25.0

    def test_virtual_cost_configurable(self):
        topo, links = self.build()
        config = AffinityConfig(virtual_link_cost=7.5)
        lk = links.links[links.source_virtual(0)]
        assert link_cost(lk, links, topo, config) == 7.5

    def test_ordinary_cost_value(self):
        topo, links = self.build()
        (lk,) = links.ordinary_links()
        # identical flat histograms: phi_ap = 1; lenient direction: 1/4
        assert link_cost(lk, links, topo, AffinityConfig()) == pytest.approx(
            -math.log(0.25), abs=1e-12)

    def test_floor_applies(self):
        topo, links = self.build()
        (lk,) = links.ordinary_links()
        config = AffinityConfig(direction_fallback="strict")  # phi_st = 0
        assert link_cost(lk, links, topo, config) == pytest.approx(
            -math.log(1e-6), abs=1e-9)
        tighter = AffinityConfig(direction_fallback="strict", floor_epsilon=1e-3)
        assert link_cost(lk, links, topo, tighter) == pytest.approx(-math.log(1e-3))

    def test_bad_floor_rejected(self):
        with pytest.raises(ConfigurationError):
            AffinityConfig(floor_epsilon=0.0)
        with pytest.raises(ConfigurationError):
            AffinityConfig(floor_epsilon=1.0)

    def test_pair_cost_virtual_member_zero(self):
        topo, links = self.build()
        mid = links.obs_index[0]
        src_virt = links.links[links.source_virtual(0)]
        sink_virt = links.links[links.sink_virtual(0)]
        assert pair_cost(src_virt, sink_virt, mid, links, topo, AffinityConfig()) == 0.0

    def test_pair_cost_ordinary_appearance_only(self):
        topo = CameraTopology(
            cameras={1, 2, 3},
            edges={frozenset({1, 2}), frozenset({2, 3})},
            travel_window={(1, 2): (0.0, 50.0), (2, 1): (0.0, 50.0),
                           (2, 3): (0.0, 50.0), (3, 2): (0.0, 50.0)})
        obs = [make_observation(0, 1, 0.0, 1.0),
               make_observation(1, 2, 4.0, 5.0),
               make_observation(2, 3, 8.0, 9.0)]
        links = build_candidate_links(topo, obs)
        p = next(lk for lk in links.ordinary_links() if lk.dst == 1)
        q = next(lk for lk in links.ordinary_links() if lk.src == 1)
        got = pair_cost(p, q, links.obs_index[1], links, topo, AffinityConfig())
        # flat outer histograms are identical: phi_ap = 1, cost 0
        assert got == pytest.approx(0.0, abs=1e-12)
        with_m2 = AffinityConfig(use_markov2=True)
        topo.markov2[(1, 2, 3)] = 0.5
        assert pair_cost(p, q, links.obs_index[1], links, topo, with_m2) \
            == pytest.approx(-math.log(0.5))

    def test_cbtf_mode_requires_table(self):
        topo, links = self.build()
        (lk,) = links.ordinary_links()
        with pytest.raises(ConfigurationError):
            link_cost(lk, links, topo, AffinityConfig(appearance_mode="cbtf"))
