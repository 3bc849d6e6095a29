import unittest
import os
import sys
import json
import tempfile

from pydantic import ValidationError

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import harness
from harness import ExperimentConfig
from routing_config import RoutingSettings, reset_settings, set_settings
from routing_errors import ParameterError, UnknownExperimentError
import table_writer


def _without_timestamp(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if "timestamp" not in line)


class TestRegistry(unittest.TestCase):

    def test_list_experiments(self):
        ids = [e["id"] for e in harness.list_experiments()]
        self.assertIn("appendix_a_spectral_gain", ids)
        self.assertIn("appendix_d_fano", ids)
        self.assertIn("decision_table", ids)
        self.assertEqual(len(ids), len(set(ids)))

    def test_unknown_experiment(self):
        with self.assertRaises(UnknownExperimentError) as ctx:
            harness.get_experiment("appendix_z")
        self.assertIn("decision_table", str(ctx.exception))

    def test_parse_override(self):
        self.assertEqual(harness.parse_override("8"), 8)
        self.assertEqual(harness.parse_override("[1, 2]"), [1, 2])
        self.assertEqual(harness.parse_override("1,2,4"), [1, 2, 4])
        self.assertEqual(harness.parse_override("N/2,sqrtN"), ["N/2", "sqrtN"])
        self.assertEqual(harness.parse_override("qr"), "qr")

    def test_config_format(self):
        self.assertEqual(ExperimentConfig(id="x", output_format="MD").output_format, "markdown")
        with self.assertRaises(ValidationError):
            ExperimentConfig(id="x", output_format="xlsx")
        with self.assertRaises(ValidationError):
            ExperimentConfig(id="x", seed=-1)


class TestRunExperiment(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        set_settings(RoutingSettings(output_dir=self.tmp.name, workers=1))

    def tearDown(self):
        reset_settings()
        self.tmp.cleanup()

    def test_writes_table(self):
        artifact = harness.run_experiment(ExperimentConfig(id="appendix_a_crosstalk", seed=3))
        self.assertEqual(artifact.path.name, "appendix_a_crosstalk.csv")
        self.assertTrue(artifact.path.exists())
        self.assertEqual(len(artifact.rows), 25)
        self.assertEqual(artifact.header["seed"], 3)
        self.assertTrue(artifact.text.startswith("# experiment:"))

    def test_deterministic_apart_from_timestamp(self):
        config = ExperimentConfig(id="appendix_c_barrier", seed=1, output_format="json",
                                  overrides={"n_list": [7, 11], "families": ["qr", "random"]})
        first = harness.run_experiment(config, write=False)
        second = harness.run_experiment(config, write=False)
        self.assertEqual(_without_timestamp(first.text), _without_timestamp(second.text))
        self.assertEqual(first.header["run_id"], second.header["run_id"])

    def test_unknown_override(self):
        with self.assertRaises(ParameterError):
            harness.run_experiment(ExperimentConfig(id="explicit_bounds", overrides={"degree": 3}))

    def test_overrides_reach_experiment(self):
        artifact = harness.run_experiment(
            ExperimentConfig(id="explicit_bounds", overrides={"pairs": [[3, 3]]}, output_format="markdown"),
            write=False)
        self.assertEqual(len(artifact.rows), 1)
        self.assertIsNone(artifact.path)
        self.assertIn("| ", artifact.text)

    def test_random_regular_beta(self):
        artifact = harness.run_experiment(
            ExperimentConfig(id="random_regular_beta", seed=2, overrides={"degrees": [4, 8], "N": 64}),
            write=False)
        self.assertEqual([row["d"] for row in artifact.rows], [4, 8])
        for row in artifact.rows:
            self.assertLess(abs(row["beta"] - row["ramanujan_beta"]), 0.15)

    def test_unwritable_path(self):
        blocker = os.path.join(self.tmp.name, "file")
        with open(blocker, "w") as f:
            f.write("x")
        with self.assertRaises(ParameterError):
            harness.run_experiment(ExperimentConfig(id="decision_table", output_path=os.path.join(blocker, "t.csv")))


class TestRecommend(unittest.TestCase):

    def test_multi_layer_row(self):
        report = harness.recommend(256, 10, 1024)
        self.assertTrue(report.strategy.startswith("Multi-layer overlay (L = 2)"))
        self.assertAlmostEqual(report.predicted_depth, 20.0)
        self.assertEqual(len(report.advice), 1)

    def test_rows_in_order(self):
        self.assertTrue(harness.recommend(512, 1, 1024).strategy.startswith("Single Ramanujan overlay"))
        self.assertTrue(harness.recommend(32, 1, 1024).strategy.startswith("Hierarchical block routing (b = 5)"))
        self.assertEqual(harness.recommend(1, 1, 1024).strategy, "Grid routing (no overlay), O(√N)")
        self.assertEqual(harness.recommend(1, 1, 1024).predicted_depth, 48)

    def test_advice_thresholds(self):
        self.assertEqual(harness.recommend(512, 3, 1024).advice, [])
        self.assertEqual(len(harness.recommend(512, 4, 1024).advice), 1)
        advice = harness.recommend(512, 1, 1024, pi_known=False).advice
        self.assertIn("greedy", advice[0])

    def test_invalid(self):
        with self.assertRaises(ParameterError):
            harness.recommend(0, 1, 1024)
        with self.assertRaises(ParameterError):
            harness.recommend(1, -1, 1024)
        with self.assertRaises(ParameterError):
            harness.recommend(1, 1, 2)

    def test_decision_table_rows(self):
        rows = harness._decisions(0, 1, 1024, [512, 1], 10)
        self.assertEqual([r["k0"] for r in rows], [512, 1])


class TestTableWriter(unittest.TestCase):

    ROWS = [{"N": 7, "beta": 0.16666666666666666}, {"N": 13, "extra": [1, 2], "beta": None}]

    def test_csv(self):
        header = table_writer.provenance("demo", 0, {"a": 1})
        text = table_writer.format_csv(self.ROWS, header)
        lines = text.splitlines()
        self.assertEqual(lines[len(header)], "N,beta,extra")
        self.assertEqual(lines[-1], '13,,"[1, 2]"')

    def test_json_and_markdown(self):
        header = {"experiment": "demo"}
        payload = json.loads(table_writer.format_json(self.ROWS, header))
        self.assertEqual(payload["rows"][0]["N"], 7)
        markdown = table_writer.format_markdown(self.ROWS, header)
        self.assertIn("| N | beta | extra |", markdown)

    def test_run_id_stable(self):
        a = table_writer.run_id("demo", 1, {"x": [1, 2]})
        self.assertEqual(a, table_writer.run_id("demo", 1, {"x": [1, 2]}))
        self.assertNotEqual(a, table_writer.run_id("demo", 2, {"x": [1, 2]}))

    def test_unknown_format(self):
        with self.assertRaises(ParameterError):
            table_writer.render_table(self.ROWS, {}, "xlsx")

    def test_write_to_dir(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = table_writer.write_table(self.ROWS, {"experiment": "demo"}, "markdown", output_dir=tmp)
            self.assertEqual(path.name, "demo.md")
            self.assertTrue(path.read_text(encoding="utf-8").startswith("<!-- experiment"))


if __name__ == '__main__':
    unittest.main()
