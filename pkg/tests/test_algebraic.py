import unittest
import os
import sys

import numpy as np

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import algebraic
from algebraic import FamilyName, GeneratorFamily
from graphs import build_random_regular_graph
from route_valiant import PathOracle
from routing_errors import ParameterError
from spectral import spectrum


class TestGeneratorFamilies(unittest.TestCase):

    def test_qr_generators(self):
        fam = GeneratorFamily("qr", 7, 8)
        self.assertEqual(fam.generators()[:2], ((1, 1), (2, 4)))
        self.assertTrue(np.all(fam.graph().degrees() == 8))

    def test_margulis_generators(self):
        g = GeneratorFamily(FamilyName.MARGULIS, 5, 8).graph()
        self.assertEqual(g.num_vertices, 25)
        self.assertTrue(np.all(g.support_degrees() == 8))

    def test_random_family_deterministic(self):
        a = GeneratorFamily("random", 11, 6, seed=3).generators()
        b = GeneratorFamily("random", 11, 6, seed=3).generators()
        self.assertEqual(a, b)
        self.assertEqual(len(a), 3)

    def test_invalid_families(self):
        with self.assertRaises(ParameterError):
            GeneratorFamily("qr", 9, 8)
        with self.assertRaises(ParameterError):
            GeneratorFamily("margulis", 7, 7)
        with self.assertRaises(ParameterError):
            GeneratorFamily("margulis", 7, 20).generators()
        with self.assertRaises(ValueError):
            GeneratorFamily("lubotzky", 7, 8)

    def test_is_prime(self):
        self.assertEqual([n for n in range(20) if algebraic.is_prime(n)], [2, 3, 5, 7, 11, 13, 17, 19])


class TestCharacterSpectrum(unittest.TestCase):

    def test_matches_dense_eigensolve(self):
        for fam in (GeneratorFamily("qr", 7, 8), GeneratorFamily("margulis", 5, 8)):
            characters = algebraic.cayley_spectrum_characters(fam.n, fam.generators())
            dense = spectrum(fam.graph())
            np.testing.assert_allclose(np.sort(characters.eigenvalues), np.sort(dense.eigenvalues), atol=1e-8)
            self.assertAlmostEqual(characters.lambda1, 8.0, places=9)

    def test_barrier_scan(self):
        rows = algebraic.abelian_barrier_scan(8, (7, 11, 17), "qr")
        self.assertEqual([r["n"] for r in rows], [7, 11, 17])
        for row in rows:
            self.assertGreater(row["beta"], 0.0)
            self.assertLessEqual(row["beta"], 1.0)
            self.assertEqual(row["ramanujan"], row["ratio"] <= 1.0 + 1e-9)
        self.assertTrue(rows[0]["monotone"])

    def test_trend_only_asserted_for_structured_families(self):
        for family in ("qr", "margulis"):
            rows = algebraic.abelian_barrier_scan(8, (7, 11), family)
            self.assertEqual({r["trend"] for r in rows}, {"asserted"})
        rows = algebraic.abelian_barrier_scan(8, (7, 11, 17), "random", seed=3)
        self.assertEqual({r["trend"] for r in rows}, {"reported"})
        self.assertEqual(algebraic.TREND_FAMILIES, (algebraic.FamilyName.QR, algebraic.FamilyName.MARGULIS))


class TestAffineSearch(unittest.TestCase):

    def setUp(self):
        self.fam = GeneratorFamily("qr", 7, 8)
        self.g = self.fam.graph()
        self.oracle = PathOracle(self.g)

    def test_affine_map_identity(self):
        np.testing.assert_array_equal(algebraic.affine_map(7, ((1, 0), (0, 1)), (0, 0)), np.arange(49))
        shifted = algebraic.affine_map(7, ((1, 0), (0, 1)), (0, 1))
        self.assertEqual(int(shifted[6]), 0)

    def test_translation_lengths_constant(self):
        for c in [(1, 1), (3, 5), (0, 4)]:
            lengths = algebraic.translation_lengths(self.g, c, self.oracle)
            self.assertEqual(len(set(lengths.tolist())), 1)
        self.assertTrue(np.all(algebraic.translation_lengths(self.g, (0, 0), self.oracle) == 0))

    def test_identity_prefers_zero_shift(self):
        best = algebraic.affine_sigma_search(self.g, np.arange(49), "translation", oracle=self.oracle)
        self.assertEqual(best.c, (0, 0))
        self.assertEqual(best.cost, (0, 0))
        self.assertEqual(best.candidates, 49)

    def test_affine_mode_samples(self):
        pi = np.random.default_rng(4).permutation(49)
        best = algebraic.affine_sigma_search(self.g, pi, "affine", samples=12, seed=1, oracle=self.oracle)
        self.assertEqual(best.candidates, 12)
        self.assertEqual(sorted(best.sigma.tolist()), list(range(49)))
        det = best.A[0][0] * best.A[1][1] - best.A[0][1] * best.A[1][0]
        self.assertNotEqual(det % 7, 0)

    def test_search_errors(self):
        with self.assertRaises(ParameterError):
            algebraic.affine_sigma_search(build_random_regular_graph(16, 3, seed=0), np.arange(16))
        with self.assertRaises(ParameterError):
            algebraic.affine_sigma_search(self.g, np.arange(49), "shear")

    def test_two_phase_cost(self):
        pi = np.roll(np.arange(49), 1)
        cost = algebraic.two_phase_cost(self.oracle, pi, np.arange(49))
        self.assertGreaterEqual(cost.C, 1)
        self.assertEqual(cost.total, cost.C + cost.D)

    def test_comparison_row(self):
        row = algebraic.affine_comparison(5, trials=3, seed=0, family="margulis", samples=5)
        self.assertEqual(row["n"], 5)
        self.assertAlmostEqual(row["improvement"], round(1 - row["best_translation"] / row["random"], 4))


if __name__ == '__main__':
    unittest.main()
