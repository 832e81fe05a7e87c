"""
Unit tests for the edge test and the hierarchical procedure
"""

import unittest
import os
import sys
import json
from unittest.mock import patch

import numpy as np

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from src import hier
from src.ccc import CovMode, EdgeSandwich
from src.dvine import PseudoSample, build_example_spec, clayton_dvine, rank_pseudo_obs, simulate, stepwise_fit
from src.exceptions import DomainError
from src.hier import HierConfig, ccc_tree_test, hierarchical_test

def oracle_config(**overrides):
    settings = dict(families="clayton", min_leaf=50, cov=CovMode.oracle())
    settings.update(overrides)
    return HierConfig(**settings)

class TestHierConfig(unittest.TestCase):
    """Settings validation"""

    def test_invalid_values(self):
        with self.assertRaises(DomainError):
            HierConfig(alpha=1.5)
        with self.assertRaises(DomainError):
            HierConfig(j_max=0)
        with self.assertRaises(DomainError):
            HierConfig(min_leaf=1)

    def test_penalty(self):
        self.assertAlmostEqual(HierConfig().penalty(400), 0.05, places=12)
        self.assertEqual(HierConfig(lambda_n=0.3).penalty(400), 0.3)

    def test_from_config(self):
        config = HierConfig.from_config({"alpha": 0.1, "cov_mode": "oracle", "min_leaf": 40}, "frank")
        self.assertEqual(config.alpha, 0.1)
        self.assertEqual(config.min_leaf, 40)
        self.assertEqual(config.cov.kind, "oracle")
        self.assertEqual(config.families, "frank")

class TestEdgeTest(unittest.TestCase):
    """Decision-tree test of a single edge"""

    @classmethod
    def setUpClass(cls):
        cls.sample = rank_pseudo_obs(simulate(clayton_dvine(4, 0.4), 600, seed=31).values)
        cls.fit = stepwise_fit(cls.sample, "clayton", up_to_tree=1)

    def test_penalized_statistic_dominates_fixed(self):
        result = hier.test_edge(self.fit, (1, 2), oracle_config())
        self.assertEqual(result.edge, (1, 2))
        self.assertGreaterEqual(result.penalized.statistic, result.fixed.statistic)
        self.assertEqual(result.penalized.df, result.fixed.df)
        self.assertEqual(result.fixed.partition.L, 2)

    def test_sandwich_mode(self):
        result = hier.test_edge(self.fit, (2, 2), oracle_config(cov=CovMode.sandwich()))
        self.assertTrue(0.0 <= result.penalized.p_value <= 1.0)
        document = result.to_dict()
        self.assertEqual(document["edge"], [2, 2])
        self.assertIn("fixed", document)
        self.assertEqual(document["mode"], "sandwich")

    def test_partitions_share_one_sandwich(self):
        with patch("src.hier.EdgeSandwich", wraps=EdgeSandwich) as built:
            result = hier.test_edge(self.fit, (2, 2), oracle_config(cov=CovMode.known_margins()))
        self.assertIsNotNone(result.gamma_max)
        built.assert_called_once_with(self.fit, (2, 2))

        with patch("src.hier.EdgeSandwich", wraps=EdgeSandwich) as built:
            hier.test_edge(self.fit, (2, 2), oracle_config())
        built.assert_not_called()

    def test_on_raw_columns(self):
        rng = np.random.default_rng(32)
        cond = rng.uniform(size=(500, 1))
        x, y = rng.normal(size=500), rng.normal(size=500)
        result = ccc_tree_test(x, y, cond, oracle_config())
        self.assertIsNone(result.edge)
        self.assertIsNotNone(result.gamma_max)

class TestHierarchicalTest(unittest.TestCase):
    """Tree-by-tree procedure with Bonferroni level"""

    def test_three_dimensions(self):
        sample = rank_pseudo_obs(simulate(clayton_dvine(3, 0.4), 500, seed=33).values)
        outcome = hierarchical_test(sample, oracle_config())
        self.assertEqual(outcome.tests, 1)
        self.assertEqual(outcome.level, 0.05)
        self.assertEqual([(r.i, r.j) for r in outcome.records], [(1, 2)])

    def test_four_dimensions(self):
        sample = rank_pseudo_obs(simulate(clayton_dvine(4, 0.4), 500, seed=34).values)
        outcome = hierarchical_test(sample, oracle_config())
        self.assertEqual(outcome.tests, 3)
        self.assertAlmostEqual(outcome.level, 0.05 / 3, places=15)

        if outcome.stop_tree is None:
            self.assertFalse(outcome.rejected)
            self.assertEqual([(r.i, r.j) for r in outcome.records], [(1, 2), (2, 2), (1, 3)])
        else:
            self.assertTrue(outcome.rejected)
            self.assertTrue(all(r.j <= outcome.stop_tree for r in outcome.records))
            self.assertTrue(any(r.rejected for r in outcome.records if r.j == outcome.stop_tree))
        for record in outcome.records:
            self.assertGreaterEqual(record.statistic, record.t_gamma0)
            self.assertEqual(record.rejected, record.p_value < outcome.level)

        self.assertIn("Tree 2", outcome.render_table())
        document = json.loads(outcome.to_json())
        self.assertEqual(document["tests"], 3)
        self.assertEqual(len(document["records"]), len(outcome.records))

    def test_needs_three_variables(self):
        sample = PseudoSample(np.array([[0.2, 0.3], [0.5, 0.6], [0.7, 0.1]]))
        with self.assertRaises(DomainError):
            hierarchical_test(sample, oracle_config())

    @unittest.skipUnless(os.environ.get("SVCT_SLOW_TESTS") == "1", "set SVCT_SLOW_TESTS=1 to run")
    def test_detects_non_simplified_top_edge(self):
        spec = build_example_spec("ex4.1", 0.4, 1.0)
        sample = rank_pseudo_obs(simulate(spec, 3000, seed=35).values)
        outcome = hierarchical_test(sample, HierConfig(families="clayton"))
        self.assertEqual(outcome.stop_tree, 3)

if __name__ == "__main__":
    unittest.main()
