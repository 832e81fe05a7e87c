"""
Unit tests for the Monte Carlo studies and their writers
"""

import unittest
import os
import sys
import json
import math
import tempfile
from unittest.mock import patch

import pandas as pd

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from src.cache import reset_cache
from src.ccc import CovMode
from src.config import get_config, reset_config
from src.constants import CSV_COLUMNS
from src.exceptions import ValidationError
from src.harness import StudyConfig, run_penalty_probe, run_power_study, write_csv, write_json
from src.harness.studies import _workers

def small_study(**overrides):
    settings = dict(study="ex4.1", ns=(300,), lambdas=(0.0, 1.0), reps=2, min_leaf=50,
                    cov=CovMode.oracle(), workers=1)
    settings.update(overrides)
    return StudyConfig(**settings)

class TestStudyConfig(unittest.TestCase):
    """Study grids and validation"""

    def setUp(self):
        reset_config()

    def tearDown(self):
        reset_config()

    def test_default_grid(self):
        cells = StudyConfig().cells()
        self.assertEqual(len(cells), 6)
        self.assertEqual([c["lambda"] for c in cells], [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
        self.assertTrue(all(c["d"] == 4 and c["tau"] == 0.4 for c in cells))

    def test_study_grids(self):
        self.assertEqual(len(StudyConfig(study="ex5.1", lambdas=(1.0,)).cells()), 3)
        self.assertEqual(len(StudyConfig(study="functional", lambdas=(1.0,)).cells()), 3)
        self.assertEqual(len(StudyConfig(study="misspec", lambdas=(1.0,)).cells()), 16)
        families = StudyConfig(study="misspec").grid_fit_families()
        self.assertEqual(families, ("clayton", "survival-gumbel", "gumbel", "frank"))

    def test_full_scale(self):
        self.assertEqual(StudyConfig(full_scale=True).replications, 1000)

    def test_full_scale_from_config(self):
        get_config().set("study", "full_scale_reps", 7)
        cfg = StudyConfig(study="ex4.1", ns=(300,), lambdas=(0.0,), full_scale=True)
        self.assertEqual(cfg.replications, 7)
        self.assertEqual(StudyConfig(reps=5).replications, 5)

    def test_invalid_values(self):
        with self.assertRaises(ValidationError):
            StudyConfig(study="unknown")
        with self.assertRaises(ValidationError):
            StudyConfig(lambdas=(1.5,))
        with self.assertRaises(ValidationError):
            StudyConfig(ns=(1,))
        with self.assertRaises(ValidationError):
            StudyConfig(functionals=("cubic",))

class TestStudies(unittest.TestCase):
    """Running studies"""

    def setUp(self):
        reset_config()
        reset_cache()
        self.temp_dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.temp_dir.cleanup()
        reset_config()
        reset_cache()

    def test_power_study(self):
        result = run_power_study(small_study())
        self.assertEqual(len(result.cells), 2)
        for cell in result.cells:
            self.assertEqual(cell.reps, 2)
            self.assertEqual(cell.failures, 0)
            self.assertEqual(cell.variant, "")
            self.assertTrue(0.0 <= cell.power <= 1.0)
        frame = result.to_frame()
        self.assertEqual(list(frame.columns), CSV_COLUMNS + ["variant", "fit_family", "failures"])

    def test_deterministic(self):
        first = run_power_study(small_study(lambdas=(1.0,)))
        second = run_power_study(small_study(lambdas=(1.0,)))
        self.assertEqual(first.cells[0].mean_stat, second.cells[0].mean_stat)
        self.assertEqual(first.cells[0].rejections, second.cells[0].rejections)

    def test_workers_do_not_change_results(self):
        serial = run_power_study(small_study(lambdas=(1.0,), reps=4, workers=1))
        get_config().set("study", "max_threads", 0)
        parallel = run_power_study(small_study(lambdas=(1.0,), reps=4, workers=2))
        self.assertEqual(_workers(small_study(workers=2)), 2)
        self.assertEqual(serial.cells[0].reps, parallel.cells[0].reps)
        self.assertEqual(serial.cells[0].mean_stat, parallel.cells[0].mean_stat)
        self.assertEqual(serial.cells[0].rejections, parallel.cells[0].rejections)

    def test_functional_variants(self):
        result = run_power_study(small_study(study="functional", functionals=("sum",), lambdas=(1.0,)))
        self.assertEqual([cell.variant for cell in result.cells], ["theta", "gamma0"])

    def test_pseudo_obs_variants(self):
        result = run_power_study(small_study(study="pseudo-obs", lambdas=(0.0,)))
        self.assertEqual([cell.variant for cell in result.cells], ["estimated", "oracle"])

    def test_probe_is_separate(self):
        with self.assertRaises(ValidationError):
            run_power_study(small_study(study="penalty-probe"))

    def test_failures_are_recorded(self):
        with patch("src.harness.studies.simulate", side_effect=RuntimeError("boom")):
            result = run_power_study(small_study(lambdas=(0.0,)))
        cell = result.cells[0]
        self.assertEqual(cell.reps, 0)
        self.assertEqual(cell.failures, 2)
        self.assertTrue(math.isnan(cell.power))

    def test_penalty_probe(self):
        result = run_penalty_probe(small_study(study="penalty-probe", lambdas=(0.0,), reps=1))
        self.assertEqual(len(result.cells), 3)
        for row in result.cells:
            self.assertEqual(row.extra["max_b_n"], row.extra["mean_b_n"])
            self.assertAlmostEqual(row.extra["lambda_n"], row.extra["c"] * 300 ** -row.extra["beta"])
            self.assertEqual(row.extra["mismatches"], 0)
        frame = result.to_frame()
        self.assertIn("max_b_n", frame.columns)

    def test_cache_reuse(self):
        get_config().set("cache", "dir", self.temp_dir.name)
        cfg = small_study(lambdas=(0.0,), use_cache=True)
        first = run_power_study(cfg)
        with patch("src.harness.studies.simulate", side_effect=RuntimeError("not cached")):
            second = run_power_study(cfg)
        self.assertEqual(second.cells[0].failures, 0)
        self.assertEqual(second.cells[0].mean_stat, first.cells[0].mean_stat)

    def test_workers_capped(self):
        get_config().set("study", "max_threads", 2)
        self.assertEqual(_workers(small_study(workers=8)), 2)
        get_config().set("study", "threads", 3)
        self.assertEqual(_workers(small_study(workers=0)), 2)
        get_config().set("study", "max_threads", 0)
        self.assertEqual(_workers(small_study(workers=0)), 3)

    def test_writers(self):
        result = run_power_study(small_study(lambdas=(1.0,)))
        csv_path = write_csv(result, os.path.join(self.temp_dir.name, "out", "power.csv"))
        frame = pd.read_csv(csv_path)
        self.assertEqual(len(frame), 1)
        self.assertEqual(frame.loc[0, "reps"], 2)
        self.assertEqual(frame.loc[0, "lambda"], 1.0)

        json_path = write_json(result.to_dict(), os.path.join(self.temp_dir.name, "power.json"))
        with open(json_path) as f:
            document = json.load(f)
        self.assertEqual(document["study"], "ex4.1")
        self.assertEqual(len(document["cells"]), 1)

if __name__ == "__main__":
    unittest.main()
