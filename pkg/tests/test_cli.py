"""
Unit tests for the command-line interface
"""

import unittest
import io
import json
import os
import sys
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from unittest.mock import patch

import pandas as pd

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from src.cache import reset_cache
from src.cli import build_parser, inject_config, main
from src.config import get_config, reset_config
from src.exceptions import NumericError

class TestCLI(unittest.TestCase):
    """End-to-end runs of the svct commands"""

    def setUp(self):
        reset_config()
        reset_cache()
        self.temp_dir = tempfile.TemporaryDirectory()
        get_config().set("cache", "dir", self.temp_dir.name)

    def tearDown(self):
        self.temp_dir.cleanup()
        reset_config()
        reset_cache()

    def path(self, name):
        return os.path.join(self.temp_dir.name, name)

    def run_main(self, argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(stderr):
            code = main(argv)
        return code, stdout.getvalue(), stderr.getvalue()

    def simulate_sample(self, name="sample.csv", n=1000):
        out = self.path(name)
        code, stdout, _ = self.run_main(["simulate", "--example", "ex4.1", "--n", str(n), "--lambda", "0.5",
                                         "--seed", "3", "--out", out])
        self.assertEqual(code, 0)
        return out, stdout

    def test_simulate(self):
        out, stdout = self.simulate_sample()
        frame = pd.read_csv(out)
        self.assertEqual(frame.shape, (1000, 4))
        self.assertIn("Wrote 1000 observations", stdout)
        self.assertTrue(((frame > 0.0) & (frame < 1.0)).all().all())

    def test_single_edge(self):
        data, _ = self.simulate_sample()
        code, stdout, _ = self.run_main(["test", "--data", data, "--families", "clayton", "--edge", "1,3",
                                         "--cov-mode", "oracle", "--min-leaf", "50"])
        self.assertEqual(code, 0)
        document = json.loads(stdout)
        self.assertEqual(document["edge"], [1, 3])
        for key in ("statistic", "p_value", "df", "partition", "fixed", "gamma_max", "penalty"):
            self.assertIn(key, document)
        self.assertGreaterEqual(document["statistic"], document["fixed"]["statistic"])

    def test_hierarchical_table(self):
        data, _ = self.simulate_sample(n=600)
        out = self.path("hier.json")
        code, stdout, _ = self.run_main(["test", "--data", data, "--families", "clayton", "--format", "table",
                                         "--cov-mode", "oracle", "--min-leaf", "50", "--out", out])
        self.assertEqual(code, 0)
        self.assertIn("Tree 2", stdout)
        with open(out) as f:
            self.assertEqual(json.load(f)["tests"], 3)

    def test_untestable_edge(self):
        data, _ = self.simulate_sample(n=200)
        code, _, stderr = self.run_main(["test", "--data", data, "--families", "clayton", "--edge", "1,1"])
        self.assertEqual(code, 1)
        self.assertIn("Error:", stderr)

    def test_missing_data_file(self):
        code, _, _ = self.run_main(["test", "--data", self.path("absent.csv"), "--families", "clayton"])
        self.assertEqual(code, 1)

    def test_power(self):
        out = self.path("power.csv")
        code, stdout, _ = self.run_main(["power", "--study", "ex4.1", "--n", "300", "--reps", "2",
                                         "--min-leaf", "50", "--cov-mode", "oracle", "--out", out])
        self.assertEqual(code, 0)
        frame = pd.read_csv(out)
        self.assertEqual(len(frame), 6)
        self.assertEqual(list(frame["lambda"]), [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
        self.assertIn("Wrote 6 rows", stdout)

    def test_usage_errors(self):
        self.assertEqual(self.run_main([])[0], 1)
        self.assertEqual(self.run_main(["power", "--study", "ex4.1"])[0], 1)
        self.assertEqual(self.run_main(["simulate", "--bogus"])[0], 1)
        self.assertEqual(self.run_main(["cache"])[0], 1)

    def test_version(self):
        self.assertEqual(self.run_main(["--version"])[0], 0)

    def test_numeric_failure_exit_code(self):
        with patch("src.cli.simulate", side_effect=NumericError("h-inverse diverged", operation="hinv")):
            code, _, stderr = self.run_main(["simulate", "--example", "ex4.1", "--n", "10",
                                             "--out", self.path("x.csv")])
        self.assertEqual(code, 2)
        self.assertIn("Numerical failure", stderr)

    def test_flat_config(self):
        config_path = self.path("study.conf")
        with open(config_path, "w") as f:
            f.write("reps=2\nmin_leaf=50\ncov_mode=oracle\nlambdas=0\nlog_level=WARNING\n")
        out = self.path("power.csv")
        code, _, _ = self.run_main(["--config", config_path, "power", "--study", "ex4.1", "--n", "300",
                                    "--out", out, "--reps", "3"])
        self.assertEqual(code, 0)
        frame = pd.read_csv(out)
        self.assertEqual(len(frame), 1)
        self.assertEqual(frame.loc[0, "reps"], 3)
        self.assertEqual(get_config().get("test", "min_leaf"), 50)

    def test_inject_config_positions(self):
        config_path = self.path("flags.conf")
        with open(config_path, "w") as f:
            f.write("log_level=DEBUG\nhierarchical=true\nunknown_key=1\n")
        argv, structured = inject_config(build_parser(), ["--config", config_path, "power", "--study", "ex4.1"])
        self.assertIsNone(structured)
        self.assertEqual(argv, ["--config", config_path, "--log-level", "DEBUG", "power", "--hierarchical",
                                "--study", "ex4.1"])

    def test_structured_config(self):
        config_path = self.path("svct.yaml")
        argv, structured = inject_config(build_parser(), ["--config", config_path, "cache", "stats"])
        self.assertEqual(structured, config_path)
        self.assertEqual(argv, ["--config", config_path, "cache", "stats"])

    def test_cache_stats(self):
        code, stdout, _ = self.run_main(["cache", "stats"])
        self.assertEqual(code, 0)
        self.assertIn("Cache Statistics:", stdout)
        self.assertIn(self.temp_dir.name, stdout)

if __name__ == "__main__":
    unittest.main()
