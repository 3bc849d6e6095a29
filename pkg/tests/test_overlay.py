import unittest
import os
import sys

import numpy as np
from pydantic import ValidationError

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import overlay
from overlay import CapacityRegime, OverlayConfig
from routing_errors import ParameterError


class TestCapacityModel(unittest.TestCase):

    def test_overlay_depth(self):
        self.assertEqual(overlay.overlay_depth(10, 64, 32), 10)
        self.assertEqual(overlay.overlay_depth(10, 64, 1), 320)
        self.assertEqual(overlay.overlay_depth(0, 64, 4), 0)
        with self.assertRaises(ParameterError):
            overlay.overlay_depth(10, 64, 0)

    def test_regimes(self):
        N = 1024
        self.assertEqual(overlay.capacity_regime(512, N), CapacityRegime.OPTIMAL.value)
        self.assertEqual(overlay.capacity_regime(256, N), CapacityRegime.NEAR_OPTIMAL.value)
        self.assertEqual(overlay.capacity_regime(32, N), CapacityRegime.GRID_AOD.value)
        self.assertEqual(overlay.capacity_regime(1, N), "Worse than grid")

    def test_effective_capacity(self):
        self.assertEqual(overlay.effective_capacity(4, 32, 0.0).effective, 128)
        est = overlay.effective_capacity(2, 10, 0.25)
        self.assertAlmostEqual(est.direct, 20 / 1.25)
        self.assertIsNone(est.checkerboard)
        # Single layer has no crosstalk partner
        self.assertEqual(overlay.effective_capacity(1, 10, 1.0).direct, 10)

    def test_checkerboard_above_half(self):
        est = overlay.effective_capacity(8, 32, 0.6)
        self.assertEqual(est.checkerboard, 128)
        self.assertEqual(est.effective, max(est.direct, 128))

    def test_invalid_gamma(self):
        with self.assertRaises(ParameterError):
            overlay.effective_capacity(2, 10, 1.5)

    def test_crosstalk_table(self):
        rows = overlay.crosstalk_table([1, 4], 32, [0.0, 0.6])
        self.assertEqual(len(rows), 4)
        self.assertEqual(rows[0]["retention"], 1.0)
        self.assertTrue(all(0 < row["retention"] <= 1.0 for row in rows))

    def test_config(self):
        config = OverlayConfig(N=1024, k0=64, L=4, gamma=0.0)
        self.assertEqual(config.effective().effective, 256)
        self.assertEqual(config.regime(), CapacityRegime.NEAR_OPTIMAL.value)
        with self.assertRaises(ValidationError):
            OverlayConfig(N=1024, gamma=2.0)


class TestLayeredOverlay(unittest.TestCase):

    def test_layered_degree(self):
        g = overlay.build_layered_overlay(64, 4, 3, seed=1)
        self.assertTrue(np.all(g.degrees() == 12))

    def test_layered_deterministic(self):
        a = overlay.build_layered_overlay(32, 4, 2, seed=9)
        b = overlay.build_layered_overlay(32, 4, 2, seed=9)
        np.testing.assert_array_equal(a.dense(), b.dense())

    def test_beta_falls_with_layers(self):
        rows = overlay.multilayer_beta_experiment(128, 4, [1, 4], trials=2, seed=0)
        self.assertEqual([r["L"] for r in rows], [1, 4])
        self.assertLess(rows[1]["beta"], rows[0]["beta"])
        self.assertEqual(rows[0]["ratio"], 1.0)
        self.assertIsInstance(rows[1]["ramanujan_all"], bool)

    def test_ratio_without_l1_column(self):
        rows = overlay.multilayer_beta_experiment(64, 4, [2], trials=2, seed=0)
        self.assertIsNotNone(rows[0]["ratio"])


class TestOverlayRouting(unittest.TestCase):

    def test_speedup_positive(self):
        row = overlay.end_to_end_overlay_speedup(8, L=2, d0=4, trials=3, seed=0)
        self.assertEqual(row["N"], 64)
        self.assertGreater(row["T_grid"], 0)
        self.assertGreater(row["speedup"], 1.0)

    def test_speedup_overlay_size(self):
        with self.assertRaises(ParameterError):
            overlay.end_to_end_overlay_speedup(8, overlay=overlay.build_layered_overlay(36, 4, 1, seed=0))

    def test_grid_expansion(self):
        g = overlay.grid_expansion(6)
        self.assertEqual(g.num_vertices, 36)
        self.assertTrue(g.is_connected())

    def test_sparse_dense(self):
        rows = overlay.sparse_dense_comparison(36, 4, 8, ["N/2", "sqrtN"], trials=2, seed=0)
        self.assertEqual([r["k"] for r in rows], [18, 6])
        self.assertGreaterEqual(rows[1]["T_d4"], rows[0]["T_d4"])
        with self.assertRaises(ParameterError):
            overlay.sparse_dense_comparison(36, 4, 8, ["half"], trials=1)


if __name__ == '__main__':
    unittest.main()
