import unittest
import os
import sys
import itertools
import math

import numpy as np
import networkx as nx
from hypothesis import given, settings, strategies as st

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from graphs import (
    build_projective_plane,
    build_random_regular_graph,
    clique_expansion,
    complete_graph,
    cycle_graph,
    parse_graph,
    path_graph,
)
from route_valiant import (
    PathOracle,
    Schedule,
    SigmaStrategy,
    apply_schedule,
    as_permutation,
    canonical_paths,
    derandomized_sigma,
    format_schedule,
    optimal_routing_depth,
    parse_schedule,
    partial_matching_route,
    route,
    schedule_paths,
    valiant_paths,
)
from routing_errors import DisconnectedGraphError, ParameterError


class TestPathOracle(unittest.TestCase):

    def test_lengths_match_networkx(self):
        g = build_random_regular_graph(40, 3, seed=1)
        oracle = PathOracle(g)
        nxg = nx.from_scipy_sparse_array(g.adjacency)
        lengths = dict(nx.all_pairs_shortest_path_length(nxg))
        for s in range(0, 40, 7):
            for t in range(40):
                path = oracle.path(s, t)
                self.assertEqual(len(path) - 1, lengths[s][t])
                self.assertEqual(path[0], s)
                self.assertEqual(path[-1], t)
                for a, b in zip(path, path[1:]):
                    self.assertTrue(g.has_edge(a, b))

    def test_lowest_index_next_hop(self):
        # 0 reaches 3 through 1 or 2; the canonical path takes 1
        g = parse_graph("G 4\n0 1 1\n0 2 1\n1 3 1\n2 3 1\n")
        self.assertEqual(canonical_paths(g).path(0, 3), [0, 1, 3])

    def test_path_to_self(self):
        self.assertEqual(PathOracle(complete_graph(5)).path(3, 3), [3])

    def test_disconnected(self):
        with self.assertRaises(DisconnectedGraphError):
            PathOracle(parse_graph("G 4\n0 1 1\n2 3 1\n"))

    def test_arc_congestion(self):
        oracle = PathOracle(path_graph(4))
        # 0->3 and 1->3 share arcs 1->2 and 2->3
        self.assertEqual(oracle.arc_congestion(np.array([0, 1]), np.array([3, 3])), 2)
        # opposite directions do not share a directed arc
        self.assertEqual(oracle.arc_congestion(np.array([0, 3]), np.array([3, 0])), 1)


class TestPathSets(unittest.TestCase):

    def test_complete_graph_congestion_one(self):
        g = complete_graph(7)
        pi = np.random.default_rng(0).permutation(7)
        ps = valiant_paths(g, pi, SigmaStrategy.UNIFORM, seed=3)
        self.assertLessEqual(ps.congestion, 1)
        self.assertLessEqual(ps.dilation, 2)

    def test_identity_strategy_single_phase(self):
        g = cycle_graph(6)
        ps = valiant_paths(g, [3, 4, 5, 0, 1, 2], SigmaStrategy.IDENTITY)
        self.assertEqual(len(ps.phases), 1)
        self.assertIsNone(ps.sigma)
        self.assertEqual(ps.dilation, 3)

    def test_congestion_lower_bound(self):
        g = build_random_regular_graph(64, 4, seed=2)
        pi = np.random.default_rng(5).permutation(64)
        ps = valiant_paths(g, pi, SigmaStrategy.UNIFORM, seed=8)
        for phase, C in zip(ps.phases, ps.phase_congestion):
            arcs = sum(len(p) - 1 for p in phase)
            self.assertGreaterEqual(C, math.ceil(arcs / (2 * g.num_edges)))

    def test_affine_needs_sigma(self):
        with self.assertRaises(ParameterError):
            valiant_paths(complete_graph(4), [1, 0, 3, 2], SigmaStrategy.AFFINE)

    def test_not_a_permutation(self):
        with self.assertRaises(ParameterError):
            as_permutation([0, 0, 1], 3)
        with self.assertRaises(ParameterError):
            as_permutation([0, 1], 3)


class TestRouting(unittest.TestCase):

    def test_identity_zero_steps(self):
        result = route(build_random_regular_graph(16, 3, seed=0), list(range(16)))
        self.assertEqual(result.depth, 0)
        self.assertTrue(result.realized)

    def test_two_vertex_swap(self):
        result = route(complete_graph(2), [1, 0], SigmaStrategy.IDENTITY)
        self.assertEqual(result.depth, 1)
        self.assertEqual(result.measured_C, 1)
        self.assertEqual(result.schedule.steps, [[(0, 1)]])

    def test_k5_exhaustive_against_optimum(self):
        g = complete_graph(5)
        oracle = PathOracle(g)
        for perm in itertools.permutations(range(5)):
            result = route(g, perm, SigmaStrategy.UNIFORM, seed=1, oracle=oracle)
            result.schedule.validate(g)
            self.assertTrue(result.realized)
            self.assertGreaterEqual(result.depth, optimal_routing_depth(g, perm))

    def test_fano_routes(self):
        g = clique_expansion(build_projective_plane(2))
        for seed in range(20):
            pi = np.random.default_rng(seed).permutation(7)
            result = route(g, pi, SigmaStrategy.UNIFORM, seed)
            self.assertTrue(result.realized)
            self.assertLessEqual(result.depth, 4)

    def test_three_cycle_optimum(self):
        self.assertEqual(optimal_routing_depth(complete_graph(5), [1, 2, 0, 3, 4]), 2)
        self.assertEqual(optimal_routing_depth(complete_graph(5), [1, 0, 2, 3, 4]), 1)
        with self.assertRaises(ParameterError):
            optimal_routing_depth(complete_graph(9), list(range(9)))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31), st.sampled_from([8, 12, 20]))
    def test_random_hosts_realize(self, seed, N):
        g = build_random_regular_graph(N, 3, seed=seed)
        if not g.is_connected():
            return
        pi = np.random.default_rng(seed).permutation(N)
        result = route(g, pi, SigmaStrategy.UNIFORM, seed)
        result.schedule.validate(g)
        self.assertTrue(result.schedule.realizes(pi))

    def test_cycle_host(self):
        g = cycle_graph(9)
        pi = np.roll(np.arange(9), 4)
        result = route(g, pi, SigmaStrategy.IDENTITY)
        result.schedule.validate(g)
        self.assertTrue(result.realized)

    def test_derandomized(self):
        g = build_random_regular_graph(32, 4, seed=4)
        pi = np.random.default_rng(2).permutation(32)
        a = derandomized_sigma(g, pi)
        b = derandomized_sigma(g, pi)
        np.testing.assert_array_equal(a, b)
        self.assertEqual(sorted(a.tolist()), list(range(32)))
        result = route(g, pi, SigmaStrategy.DERANDOMIZED)
        self.assertTrue(result.realized)
        self.assertEqual(result.strategy, "derandomized")

    def test_explicit_sigma(self):
        g = complete_graph(6)
        result = route(g, [1, 2, 3, 4, 5, 0], SigmaStrategy.AFFINE, sigma=[5, 4, 3, 2, 1, 0])
        np.testing.assert_array_equal(result.sigma, [5, 4, 3, 2, 1, 0])
        self.assertTrue(result.realized)


class TestScheduler(unittest.TestCase):

    def test_end_exchange_on_path(self):
        # odd-even rounds on a 4-hop path: five steps, middle pebbles unmoved
        result = route(path_graph(5), [4, 1, 2, 3, 0], SigmaStrategy.IDENTITY)
        self.assertTrue(result.realized)
        self.assertEqual(result.depth, 5)

    def test_rotation_beats_congestion_times_dilation(self):
        # every pebble moves one hop on its own arc, so C = D = 1, yet a
        # 4-cycle rotation is no involution and needs at least two steps
        g = cycle_graph(4)
        pi = [1, 2, 3, 0]
        result = route(g, pi, SigmaStrategy.IDENTITY)
        self.assertTrue(result.realized)
        self.assertEqual((result.measured_C, result.measured_D), (1, 1))
        self.assertGreaterEqual(optimal_routing_depth(g, pi), 2)
        self.assertIn("depth_exceeds_CD", result.flags)

    def _check_regular(self, N, seed, limit):
        g = build_random_regular_graph(N, 8, seed=seed)
        pi = np.random.default_rng(seed).permutation(N)
        result = route(g, pi, SigmaStrategy.UNIFORM, seed)
        result.schedule.validate(g)
        self.assertTrue(result.realized)
        C, D = result.measured_C, result.measured_D
        self.assertLessEqual(result.depth, 6 * C * D)
        self.assertLessEqual(result.depth, limit)
        # many pebbles move in the same step
        self.assertGreaterEqual(result.schedule.num_swaps / result.depth, N / 16)
        return result

    def test_random_regular_64(self):
        for seed in range(3):
            self._check_regular(64, seed, 80)

    def test_random_regular_256(self):
        result = self._check_regular(256, 11, 160)
        self.assertEqual(len(result.phase_depths), 2)

    def test_clique_phases_take_two_steps(self):
        g = complete_graph(9)
        for seed in range(10):
            pi = np.random.default_rng(seed).permutation(9)
            result = route(g, pi, SigmaStrategy.UNIFORM, seed)
            self.assertTrue(all(depth <= 2 for depth in result.phase_depths))


class TestCapacity(unittest.TestCase):

    def test_capacity_one(self):
        g = build_random_regular_graph(16, 4, seed=3)
        pi = np.random.default_rng(1).permutation(16)
        result = partial_matching_route(g, pi, 1, seed=2)
        self.assertTrue(result.realized)
        self.assertTrue(all(len(step) <= 1 for step in result.schedule.steps))
        self.assertEqual(result.depth, result.schedule.num_swaps)

    def test_capacity_caps_step_width(self):
        g = build_random_regular_graph(32, 4, seed=5)
        pi = np.random.default_rng(6).permutation(32)
        result = partial_matching_route(g, pi, 3, seed=1)
        self.assertTrue(result.realized)
        self.assertTrue(all(len(step) <= 3 for step in result.schedule.steps))
        self.assertGreaterEqual(result.depth, math.ceil(result.schedule.num_swaps / 3))

    def test_bad_capacity(self):
        with self.assertRaises(ParameterError):
            partial_matching_route(complete_graph(4), [1, 0, 3, 2], 0)
        ps = valiant_paths(complete_graph(4), [1, 0, 3, 2], seed=0)
        with self.assertRaises(ParameterError):
            schedule_paths(ps, capacity=0)


class TestScheduleText(unittest.TestCase):

    def test_format_and_apply(self):
        g = build_random_regular_graph(12, 3, seed=7)
        pi = np.random.default_rng(7).permutation(12)
        result = route(g, pi, SigmaStrategy.UNIFORM, 7)
        text = format_schedule(result.schedule)
        self.assertEqual(len(text.splitlines()), result.depth)
        self.assertTrue(parse_schedule(text).realizes(pi))

    def test_apply_schedule_text(self):
        g = cycle_graph(4)
        occ = apply_schedule(g, "0:1 2:3\n", pi=[1, 0, 3, 2])
        self.assertEqual(occ.tolist(), [1, 0, 3, 2])
        with self.assertRaises(ParameterError):
            apply_schedule(g, "0:1\n", pi=[1, 0, 3, 2])
        with self.assertRaises(ParameterError):
            apply_schedule(g, "0:2\n")

    def test_bad_token(self):
        with self.assertRaises(ParameterError):
            parse_schedule("0:1 2-3\n")

    def test_validate_rejects_overlap(self):
        with self.assertRaises(ParameterError):
            Schedule([[(0, 1), (1, 2)]]).validate()
        with self.assertRaises(ParameterError):
            Schedule([[(0, 2)]]).validate(path_graph(3))

    def test_extend(self):
        s = Schedule([[(0, 1)]]).extend(Schedule([[(1, 2)]]))
        self.assertEqual(s.depth, 2)
        np.testing.assert_array_equal(s.apply(3), [1, 2, 0])


if __name__ == '__main__':
    unittest.main()
