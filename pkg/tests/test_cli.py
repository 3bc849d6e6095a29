import unittest
import os
import sys
import json
import tempfile

from click.testing import CliRunner

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cli import cli
from graphs import build_projective_plane, format_hypergraph
from routing_config import reset_settings
import mcp_stdio
import server


class TestCli(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        reset_settings()
        self.tmp.cleanup()

    def invoke(self, *args):
        return self.runner.invoke(cli, ["--workers", "1", "--log-level", "ERROR", *args])

    def test_recommend(self):
        result = self.invoke("recommend", "--k0", "256", "--N", "1024", "--R", "10")
        self.assertEqual(result.exit_code, 0, result.output)
        report = json.loads(result.output)
        self.assertEqual(report["predicted_depth"], 20.0)
        self.assertEqual(len(report["advice"]), 1)

    def test_build_and_spectrum(self):
        path = os.path.join(self.tmp.name, "fano.txt")
        result = self.invoke("build", "projective", "-o", path)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("✅", result.output)
        result = self.invoke("spectrum", path)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertAlmostEqual(json.loads(result.output)["beta"], 1 / 6, places=9)

    def test_build_prints_text(self):
        result = self.invoke("build", "projective")
        self.assertTrue(result.output.startswith("H 7 3 3"))
        result = self.invoke("build", "grid", "--n", "4", "--expand")
        self.assertTrue(result.output.startswith("G 16"))

    def test_library_error_exits_two(self):
        result = self.invoke("build", "projective", "--q", "4")
        self.assertEqual(result.exit_code, 2)
        self.assertIn("ParameterError", result.output)

    def test_route_identity(self):
        path = os.path.join(self.tmp.name, "k7.txt")
        self.invoke("build", "complete", "--N", "7", "-o", path)
        result = self.invoke("route", "--graph", path, "--perm", "identity")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(json.loads(result.output)["T"], 0)

    def test_route_writes_schedule(self):
        path = os.path.join(self.tmp.name, "fano.txt")
        schedule = os.path.join(self.tmp.name, "schedule.txt")
        self.invoke("build", "projective", "-o", path)
        result = self.invoke("route", "--graph", path, "--perm", "random:3", "--schedule-out", schedule)
        self.assertEqual(result.exit_code, 0, result.output)
        report = json.loads(result.output)
        self.assertTrue(report["realized"])
        with open(schedule, encoding="utf-8") as f:
            self.assertEqual(len(f.read().splitlines()), report["T"])

    def test_list(self):
        result = self.invoke("list")
        self.assertIn("appendix_d_fano", result.output)

    def test_run_writes_table(self):
        out = os.path.join(self.tmp.name, "bounds.json")
        result = self.invoke("run", "explicit_bounds", "--set", "pairs=[[3,3],[5,3]]", "--out", "json", "-o", out)
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out, encoding="utf-8") as f:
            payload = json.load(f)
        self.assertEqual(len(payload["rows"]), 2)
        self.assertEqual(payload["experiment"], "explicit_bounds")

    def test_run_errors(self):
        self.assertEqual(self.invoke("run", "no_such_table").exit_code, 2)
        self.assertEqual(self.invoke("run", "explicit_bounds", "--set", "pairs").exit_code, 2)

    def test_table_command(self):
        result = self.invoke("overlay-experiment", "--report", "crosstalk", "--layers", "1,2", "--out", "md")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("| gamma | L |", result.output)


class TestServerLogic(unittest.TestCase):

    def test_stdio_launcher_rejects_missing_config(self):
        result = CliRunner().invoke(mcp_stdio.main, ["--config", "/nonexistent/hyperroute.txt"])
        self.assertEqual(result.exit_code, 2)
        reset_settings()

    def test_fano(self):
        payload = json.loads(server.fano_logic())
        self.assertTrue(payload["success"])
        self.assertAlmostEqual(payload["beta"], 1 / 6, places=9)
        self.assertTrue(payload["ramanujan"])

    def test_spectrum_of_hypergraph_text(self):
        payload = json.loads(server.spectrum_logic(format_hypergraph(build_projective_plane(3))))
        self.assertEqual(payload["N"], 13)
        self.assertTrue(payload["ramanujan_hypergraph"])

    def test_route(self):
        text = "G 4\n0 1 1\n1 2 1\n2 3 1\n0 3 1\n"
        payload = json.loads(server.route_logic(text, [1, 0, 3, 2], "identity", include_schedule=True))
        self.assertTrue(payload["realized"])
        self.assertEqual(payload["T"], 1)
        self.assertEqual(payload["schedule"].strip().count(" "), 1)

    def test_recommend(self):
        payload = json.loads(server.recommend_logic(1, 1, 1024))
        self.assertTrue(payload["strategy"].startswith("Grid routing"))

    def test_experiment_rows(self):
        payload = json.loads(server.experiment_logic("explicit_bounds", {"pairs": [[3, 3]]}))
        self.assertEqual(payload["provenance"]["experiment"], "explicit_bounds")
        self.assertEqual(len(payload["rows"]), 1)

    def test_failure_payload(self):
        try:
            server.experiment_logic("no_such_table")
        except Exception as e:
            payload = json.loads(server._failure(e))
        self.assertFalse(payload["success"])
        self.assertIn("UnknownExperimentError", payload["error"])


if __name__ == '__main__':
    unittest.main()
