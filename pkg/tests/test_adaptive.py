import unittest
import os
import sys
import math
from unittest import mock

import numpy as np
from hypothesis import given, settings, strategies as st

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import adaptive
from adaptive import DisplacementMetric, DisplacementState, OverlayFamily
from graphs import complete_graph, cycle_graph, parse_graph
from routing_errors import DisconnectedGraphError, ParameterError


class TestDisplacementState(unittest.TestCase):

    def test_grid_distances(self):
        np.testing.assert_array_equal(adaptive.grid_distance_matrix(2),
                                      [[0, 1, 1, 2], [1, 0, 2, 1], [1, 2, 0, 1], [2, 1, 1, 0]])

    def test_identity_is_placed(self):
        state = DisplacementState(3, np.arange(9))
        self.assertEqual(state.phi, 0)
        self.assertTrue(state.placed())

    def test_single_swap(self):
        state = DisplacementState(2, [1, 0, 2, 3])
        self.assertEqual(state.phi, 2)
        step = adaptive.greedy_matching_step(state, complete_graph(4))
        self.assertEqual(step.matching, [(0, 1)])
        self.assertEqual(step.delta_phi, 2)
        self.assertTrue(state.placed())

    def test_overlay_metric(self):
        with self.assertRaises(ParameterError):
            DisplacementState(2, [1, 0, 2, 3], DisplacementMetric.OVERLAY_BFS)
        with self.assertRaises(DisconnectedGraphError):
            DisplacementState(2, [1, 0, 2, 3], "overlay_bfs", parse_graph("G 4\n0 1 1\n2 3 1\n"))
        state = DisplacementState(2, [2, 1, 0, 3], "overlay_bfs", cycle_graph(4))
        # 0 and 2 are opposite on the 4-cycle
        self.assertEqual(state.phi, 8)

    def test_residual_permutation(self):
        n = 4
        targets = np.random.default_rng(2).permutation(16)
        state = DisplacementState(n, targets)
        adaptive.greedy_matching_step(state, complete_graph(16))
        residual = state.residual_permutation()
        np.testing.assert_array_equal(residual[state.pos], targets)


class TestGreedy(unittest.TestCase):

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31), st.sampled_from([3, 4, 5]))
    def test_incremental_phi_matches_recompute(self, seed, n):
        result = adaptive.run_greedy_until_stall(n, d=4, seed=seed)
        state = result.state
        self.assertEqual(state.phi, state.recompute_phi())
        self.assertEqual(result.violations, 0)
        self.assertTrue(all(a > b for a, b in zip(result.history, result.history[1:])))
        self.assertEqual(len(result.history), result.T_stall + 1)

    def test_matching_is_disjoint(self):
        state = DisplacementState(4, np.random.default_rng(7).permutation(16))
        step = adaptive.greedy_matching_step(state, adaptive.random_overlay(16, 6, seed=1))
        touched = [v for swap in step.matching for v in swap]
        self.assertEqual(len(touched), len(set(touched)))
        self.assertGreater(step.delta_phi, 0)

    def test_max_steps(self):
        state = DisplacementState(6, np.random.default_rng(3).permutation(36))
        result = adaptive.run_greedy(state, adaptive.random_overlay(36, 4, seed=3), max_steps=1)
        self.assertLessEqual(result.T_stall, 1)

    def test_identity_has_no_fraction(self):
        result = adaptive.run_greedy_until_stall(3, d=4, seed=0, pi=np.arange(9))
        self.assertEqual(result.T_stall, 0)
        self.assertIsNone(result.stall_fraction)
        self.assertIsNone(result.first_step_reduction)

    def test_greedy_table(self):
        rows = adaptive.greedy_table((4,), d=4, trials=3, seed=0)
        self.assertEqual(rows[0]["N"], 16)
        self.assertEqual(rows[0]["violations"], 0)
        self.assertGreater(rows[0]["steps"], 0)
        self.assertLessEqual(rows[0]["stall_fraction"], 1.0)

    def test_stall_scaling(self):
        result = adaptive.stall_scaling((4, 6), d=4, trials=2, seed=0)
        self.assertEqual(len(result["rows"]), 2)
        self.assertTrue(math.isfinite(result["slope"]))

    def test_phi_drift_is_counted(self):
        state = DisplacementState(4, np.random.default_rng(8).permutation(16))
        apply = DisplacementState.apply

        def drifting(self, matching, gains):
            apply(self, matching, gains)
            if matching:
                self.phi -= 1

        with mock.patch.object(DisplacementState, "apply", drifting):
            result = adaptive.run_greedy(state, complete_graph(16), max_steps=50)
        self.assertGreater(result.violations, 0)
        self.assertEqual(result.violations, result.T_stall)
        self.assertEqual(state.phi, state.recompute_phi())


class TestConcentration(unittest.TestCase):

    def test_tail_fraction(self):
        self.assertEqual(adaptive.tail_fraction(np.array([]), np.array([])), (0.0, 0))
        phis = np.arange(12, dtype=float)
        alpha, bins = adaptive.tail_fraction(phis, np.full(12, 0.3), bins=10)
        self.assertEqual(bins, 2)
        self.assertEqual(alpha, 0.0)
        reductions = np.array([0.4] * 11 + [0.01])
        alpha, _ = adaptive.tail_fraction(phis, reductions, bins=1)
        self.assertAlmostEqual(alpha, 1 / 12)

    def test_needs_twenty_trials(self):
        with self.assertRaises(ParameterError):
            adaptive.concentration_check(4, trials=19)

    def test_concentration_small(self):
        result = adaptive.concentration_check(4, d=4, trials=20, seed=1)
        self.assertGreater(result.samples, 0)
        self.assertGreaterEqual(result.alpha, 0.0)
        self.assertLessEqual(result.alpha, 1.0)
        self.assertLessEqual(result.bins, 10)


class TestHybrid(unittest.TestCase):

    def test_hybrid_totals(self):
        result = adaptive.hybrid_greedy_valiant(4, d=4, seed=2)
        self.assertEqual(result.T_total, result.T_stall + result.T_residual)
        self.assertEqual(result.to_dict()["T_total"], result.T_total)
        self.assertAlmostEqual(result.T_pure_model, 2 * 4 / (1 - result.beta))
        self.assertAlmostEqual(result.T_hybrid_model,
                               result.T_stall + result.stall_fraction * result.T_pure_model)

    def test_hybrid_identity(self):
        result = adaptive.hybrid_greedy_valiant(4, d=4, seed=0, pi=np.arange(16))
        self.assertEqual((result.T_stall, result.T_residual, result.T_pure), (0, 0, 0))
        self.assertEqual(result.speedup, 1.0)
        self.assertEqual(result.T_hybrid_model, 0.0)
        self.assertEqual(result.model_ratio, 0.0)

    def test_residual_keeps_placed_atoms(self):
        state = DisplacementState(3, np.arange(9))
        self.assertEqual(adaptive.route_residual(complete_graph(9), state, 0), 0)
        state = DisplacementState(3, [1, 0, 2, 3, 4, 5, 6, 7, 8])
        self.assertEqual(adaptive.route_residual(complete_graph(9), state, 0), 1)

    def test_hybrid_beats_pure_routing(self):
        result = adaptive.hybrid_greedy_valiant(16, d=8, seed=3)
        self.assertLess(result.T_total, result.T_pure)
        self.assertLessEqual(result.model_ratio, 0.5)
        self.assertGreater(result.speedup, 1.0)


class TestMultiplicativeWeights(unittest.TestCase):

    def test_family_validation(self):
        with self.assertRaises(ParameterError):
            OverlayFamily([], [])
        with self.assertRaises(ParameterError):
            OverlayFamily(["a", "b"], [complete_graph(4), complete_graph(9)])
        with self.assertRaises(ParameterError):
            OverlayFamily(["a"], [complete_graph(4)], weights=[0.0])
        family = OverlayFamily(["a", "b"], [complete_graph(4), cycle_graph(4)])
        np.testing.assert_allclose(family.probabilities(), [0.5, 0.5])

    def test_single_member_ratio_one(self):
        family = OverlayFamily(["complete"], [complete_graph(16)])
        pi = np.random.default_rng(4).permutation(16)
        result = adaptive.mw_overlay_selection(family, pi, seed=0)
        self.assertEqual(result.competitive_ratio, 1.0)
        self.assertEqual(result.baselines["complete"], result.T_MW)

    def test_weights_grow(self):
        family = OverlayFamily(["complete", "cycle"], [complete_graph(16), cycle_graph(16)])
        pi = np.random.default_rng(5).permutation(16)
        result = adaptive.mw_overlay_selection(family, pi, eta=0.5, seed=1)
        self.assertTrue(np.all(result.weights >= 1.0))
        self.assertGreater(result.competitive_ratio, 0.0)
        self.assertEqual(set(result.baselines), {"complete", "cycle"})

    def test_stalled_run_routes_the_rest(self):
        # greedy has no improving swap on the 4-cycle for the diagonal exchange
        family = OverlayFamily(["cycle"], [cycle_graph(4)])
        result = adaptive.mw_overlay_selection(family, [2, 1, 0, 3], seed=0)
        self.assertTrue(result.flagged)
        self.assertEqual(result.T_greedy, 0)
        self.assertEqual(result.finished_on, "cycle")
        self.assertGreaterEqual(result.T_MW, 2)
        self.assertEqual(result.baselines["cycle"], result.T_MW)
        self.assertEqual(result.competitive_ratio, 1.0)

    def test_depths_are_not_capped(self):
        family = adaptive.default_family(4, seed=1, eta=0.5)
        cap = math.ceil(50 * math.log2(16))
        for t in range(3):
            pi = np.random.default_rng(t).permutation(16)
            result = adaptive.mw_overlay_selection(family, pi, seed=t)
            self.assertLess(result.T_MW, cap)
            self.assertTrue(all(0 < depth < cap for depth in result.baselines.values()))
            self.assertEqual(result.T_best, min(result.baselines.values()))
            if result.flagged:
                self.assertGreater(result.T_MW, result.T_greedy)

    def test_non_square(self):
        family = OverlayFamily(["k5"], [complete_graph(5)])
        with self.assertRaises(ParameterError):
            adaptive.mw_overlay_selection(family, np.arange(5))

    def test_experiment_summary(self):
        summary = adaptive.mw_experiment(4, trials=2, seed=0)
        self.assertEqual(summary["N"], 16)
        self.assertLessEqual(summary["min_CR"], summary["mean_CR"])
        self.assertLessEqual(summary["mean_CR"], summary["max_CR"])
        self.assertGreater(summary["mean_T_best"], 0)
        self.assertAlmostEqual(summary["ratio_of_means"], summary["mean_T_MW"] / summary["mean_T_best"], places=2)


if __name__ == '__main__':
    unittest.main()
