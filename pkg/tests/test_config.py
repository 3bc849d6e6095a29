import unittest
import os
import sys
import tempfile
from unittest import mock

import numpy as np

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import routing_config
from routing_config import RoutingSettings, load_settings, parse_config_text
from routing_errors import ConfigError, ParameterError, RoutingError
from seeding import derive_seed, make_rng, map_trials, random_permutation

CLEAN_ENV = {name: "" for name in routing_config.ENV_FIELDS}


class TestConfigParsing(unittest.TestCase):

    def test_key_value_lines(self):
        text = "# defaults\nseed = 7\n--output-dir = out  # trailing\n\nLOG_LEVEL=debug\n"
        self.assertEqual(parse_config_text(text), {"seed": "7", "output_dir": "out", "log_level": "debug"})

    def test_missing_equals(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config_text("seed 7\n", source="cfg.txt")
        self.assertIn("cfg.txt:1", str(ctx.exception))

    def test_empty_key(self):
        with self.assertRaises(ConfigError):
            parse_config_text("= 3\n")


class TestLoadSettings(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "hyperroute.txt")
        with open(self.path, "w", encoding="utf-8") as f:
            f.write("seed = 11\noutput_format = md\nworkers = 2\nmystery = 1\n")

    def tearDown(self):
        routing_config.reset_settings()
        self.tmp.cleanup()

    def test_file_values(self):
        with mock.patch.dict(os.environ, CLEAN_ENV):
            with self.assertLogs("RoutingConfig", level="WARNING"):
                settings = load_settings(self.path)
        self.assertEqual(settings.seed, 11)
        self.assertEqual(settings.output_format, "markdown")
        self.assertEqual(settings.workers, 2)

    def test_precedence(self):
        with mock.patch.dict(os.environ, {**CLEAN_ENV, "HYPERROUTE_SEED": "5", "HYPERROUTE_WORKERS": "3"}):
            settings = load_settings(self.path, {"workers": 4, "output_dir": None})
        self.assertEqual(settings.seed, 5)
        self.assertEqual(settings.workers, 4)
        self.assertEqual(settings.output_dir, "results")

    def test_missing_explicit_file(self):
        with self.assertRaises(ConfigError):
            load_settings(os.path.join(self.tmp.name, "absent.txt"))

    def test_invalid_value(self):
        with mock.patch.dict(os.environ, {**CLEAN_ENV, "HYPERROUTE_OUTPUT_FORMAT": "xml"}):
            with self.assertRaises(ConfigError):
                load_settings(self.path)

    def test_singleton(self):
        custom = RoutingSettings(seed=99, workers=1)
        routing_config.set_settings(custom)
        self.assertIs(routing_config.get_settings(), custom)
        routing_config.reset_settings()
        self.assertIsNot(routing_config.get_settings(), custom)

    def test_environment_report(self):
        report = routing_config.environment_report()
        self.assertGreaterEqual(report["workers"], 1)
        self.assertIn("numpy", report)

    def test_errors_share_base(self):
        self.assertTrue(issubclass(ConfigError, RoutingError))
        self.assertTrue(issubclass(ParameterError, ValueError))


class TestSeeding(unittest.TestCase):

    def test_streams_reproducible(self):
        a = make_rng(3, "exp", 1).integers(0, 1000, 5)
        b = make_rng(3, "exp", 1).integers(0, 1000, 5)
        c = make_rng(3, "exp", 2).integers(0, 1000, 5)
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, c))

    def test_generator_passthrough(self):
        rng = np.random.default_rng(0)
        self.assertIs(make_rng(rng), rng)

    def test_negative_inputs(self):
        with self.assertRaises(ParameterError):
            make_rng(-1)
        with self.assertRaises(ParameterError):
            make_rng(0, -5)
        with self.assertRaises(ParameterError):
            map_trials(lambda t, rng: t, -1, 0, "x", workers=1)

    def test_map_trials_independent_of_workers(self):
        def draw(t, rng):
            return (t, int(rng.integers(0, 10**9)))

        serial = map_trials(draw, 8, 4, "demo", workers=1)
        threaded = map_trials(draw, 8, 4, "demo", workers=4)
        self.assertEqual(serial, threaded)
        self.assertEqual([t for t, _ in serial], list(range(8)))

    def test_helpers(self):
        self.assertEqual(derive_seed(1, "a"), derive_seed(1, "a"))
        perm = random_permutation(10, 2, "p")
        self.assertEqual(sorted(perm.tolist()), list(range(10)))


if __name__ == '__main__':
    unittest.main()
