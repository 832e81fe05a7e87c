"""
Unit tests for configuration loading and the flat config helpers
"""

import unittest
import argparse
import os
import sys
import tempfile
from unittest.mock import patch

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from src.config import Config, get_config, reset_config
from src.exceptions import ConfigurationError, ValidationError
from src.utils import (
    config_to_argv, load_key_value_file, parse_edge, parse_float_list, parse_penalty_grid, parse_str_list
)

class TestConfig(unittest.TestCase):
    """Test cases for the Config class"""

    def setUp(self):
        reset_config()
        self.temp_dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.temp_dir.cleanup()
        reset_config()

    def test_defaults(self):
        config = Config()
        self.assertEqual(config.get("test", "alpha"), 0.05)
        self.assertEqual(config.get("test", "min_leaf"), 100)
        self.assertEqual(config.get("test", "cov_mode"), "sandwich")
        self.assertEqual(config.get("study", "reps"), 200)
        self.assertFalse(config.get_cache_config()["enabled"])
        self.assertEqual(config.get("missing", "key", "fallback"), "fallback")

    def test_singleton(self):
        self.assertIs(get_config(), get_config())

    def test_yaml_file(self):
        path = os.path.join(self.temp_dir.name, "svct.yaml")
        with open(path, "w") as f:
            f.write("test:\n  alpha: 0.1\n  j_max: 3\nstudy:\n  seed: 7\n")
        config = Config()
        self.assertTrue(config.load(path))
        self.assertEqual(config.get("test", "alpha"), 0.1)
        self.assertEqual(config.get("test", "j_max"), 3)
        self.assertEqual(config.get("test", "min_leaf"), 100)
        self.assertEqual(config.get("study", "seed"), 7)

    def test_save_round_trip(self):
        path = os.path.join(self.temp_dir.name, "saved.yaml")
        config = Config()
        config.set("test", "min_leaf", 60)
        config.set("study", "reps", 25)
        self.assertTrue(config.save(path))

        reloaded = Config()
        self.assertTrue(reloaded.load(path))
        self.assertEqual(reloaded.get("test", "min_leaf"), 60)
        self.assertEqual(reloaded.get("study", "reps"), 25)
        self.assertEqual(reloaded.get("test", "cov_mode"), "sandwich")

    def test_missing_file(self):
        self.assertFalse(Config().load(os.path.join(self.temp_dir.name, "absent.yaml")))

    def test_environment(self):
        config = Config()
        with patch.dict(os.environ, {"SVCT_TEST_MIN_LEAF": "50", "SVCT_THREADS": "4",
                                     "SVCT_TEST_ALPHA": "0.01", "SVCT_CACHE_ENABLED": "yes"}):
            config.load_from_env()
        self.assertEqual(config.get("test", "min_leaf"), 50)
        self.assertEqual(config.get("study", "max_threads"), 4)
        self.assertEqual(config.get("test", "alpha"), 0.01)
        self.assertTrue(config.get("cache", "enabled"))

    def test_environment_type_error(self):
        config = Config()
        with patch.dict(os.environ, {"SVCT_TEST_MIN_LEAF": "many"}):
            with self.assertRaises(ConfigurationError):
                config.load_from_env()

    def test_arguments(self):
        config = Config()
        args = argparse.Namespace(alpha=0.1, min_leaf=None, workers=3, cov_mode="oracle", cache=None)
        config.load_from_args(args)
        self.assertEqual(config.get("test", "alpha"), 0.1)
        self.assertEqual(config.get("test", "min_leaf"), 100)
        self.assertEqual(config.get("study", "threads"), 3)
        self.assertEqual(config.get("test", "cov_mode"), "oracle")

    def test_validation(self):
        config = Config()
        with self.assertRaises(ConfigurationError):
            config.load_from_args(argparse.Namespace(alpha=1.5))
        config = Config()
        config.set("test", "cov_mode", "jackknife")
        with self.assertRaises(ConfigurationError):
            config.validate()
        config = Config()
        config.set("study", "full_scale_reps", 0)
        with self.assertRaises(ConfigurationError):
            config.validate()

class TestFlatConfig(unittest.TestCase):
    """Flat key=value files and list parsing"""

    def test_key_value_file(self):
        with tempfile.NamedTemporaryFile("w", suffix=".conf", delete=False) as f:
            f.write("# study settings\nreps = 50\nlambdas=0,0.5  # two values\n\nhierarchical=true\n")
            path = f.name
        try:
            values = load_key_value_file(path)
        finally:
            os.remove(path)
        self.assertEqual(values, {"reps": "50", "lambdas": "0,0.5", "hierarchical": "true"})

    def test_malformed_line(self):
        with tempfile.NamedTemporaryFile("w", suffix=".conf", delete=False) as f:
            f.write("reps 50\n")
            path = f.name
        try:
            with self.assertRaises(ValidationError):
                load_key_value_file(path)
        finally:
            os.remove(path)

    def test_config_to_argv(self):
        argv = config_to_argv({"reps": "50", "min_leaf": 60, "hierarchical": "true", "cache": False,
                               "lambdas": [0.0, 1.0]}, ["hierarchical", "cache"])
        self.assertEqual(argv, ["--reps", "50", "--min-leaf", "60", "--hierarchical", "--lambdas", "0.0,1.0"])
        with self.assertRaises(ValidationError):
            config_to_argv({"cache": "sometimes"}, ["cache"])

    def test_list_parsing(self):
        self.assertEqual(parse_float_list("0, 0.5,1"), [0.0, 0.5, 1.0])
        self.assertEqual(parse_str_list("Clayton, frank"), ["clayton", "frank"])
        self.assertEqual(parse_edge("1,3"), (1, 3))
        self.assertEqual(parse_penalty_grid("1:0.5,0.5:0.4"), [(1.0, 0.5), (0.5, 0.4)])
        with self.assertRaises(ValidationError):
            parse_edge("1,2,3")
        with self.assertRaises(ValidationError):
            parse_float_list("a,b")

if __name__ == "__main__":
    unittest.main()
