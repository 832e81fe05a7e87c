"""
Unit tests for the greedy partition search
"""

import unittest
import os
import sys

import numpy as np

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from src.ccc import median_partition, whole_support
from src.exceptions import DomainError
from src.tree import Leaf, best_split, grow, partition_statistic, split_candidates, two_group_statistic

def varying_data(n, seed):
    """Correlation of (x, y) grows with the first conditioning column"""
    rng = np.random.default_rng(seed)
    cond = rng.uniform(size=(n, 2))
    z = rng.normal(size=n)
    x = z + rng.normal(size=n)
    y = 2.0 * cond[:, 0] * z + rng.normal(size=n)
    return x, y, cond

class TestCandidates(unittest.TestCase):
    """Split candidates"""

    def test_quartiles_on_every_axis(self):
        _, _, cond = varying_data(1000, 1)
        candidates = split_candidates(Leaf.root(1000), cond, min_leaf=50)
        self.assertEqual(len(candidates), 9)
        self.assertEqual({c.axis for c in candidates}, {0, 1, "mean"})

    def test_single_column(self):
        _, _, cond = varying_data(1000, 2)
        candidates = split_candidates(Leaf.root(1000), cond[:, 0], min_leaf=50)
        self.assertEqual(len(candidates), 3)
        self.assertEqual([c.quantile for c in candidates], [0.25, 0.5, 0.75])

    def test_small_leaf_tries_median_only(self):
        _, _, cond = varying_data(300, 3)
        candidates = split_candidates(Leaf.root(300), cond, min_leaf=100)
        self.assertEqual([c.quantile for c in candidates], [0.5, 0.5, 0.5])

    def test_no_candidate_respects_min_leaf(self):
        _, _, cond = varying_data(150, 4)
        self.assertEqual(split_candidates(Leaf.root(150), cond, min_leaf=100), [])

class TestBestSplit(unittest.TestCase):
    """Choosing a split"""

    def test_finds_informative_axis(self):
        x, y, cond = varying_data(2000, 5)
        leaf = Leaf.root(2000)
        candidate, value = best_split(leaf, x, y, cond, split_candidates(leaf, cond, min_leaf=100))
        self.assertIn(candidate.axis, (0, "mean"))
        self.assertGreater(value, 0.0)
        self.assertAlmostEqual(value, two_group_statistic(x, y, cond, candidate.condition()), places=10)

    def test_deterministic(self):
        x, y, cond = varying_data(1000, 6)
        leaf = Leaf.root(1000)
        candidates = split_candidates(leaf, cond, min_leaf=50)
        first = best_split(leaf, x, y, cond, candidates)
        second = best_split(leaf, x, y, cond, list(reversed(candidates)))
        self.assertEqual(first[0], second[0])
        self.assertEqual(first[1], second[1])

    def test_no_candidates(self):
        x, y, cond = varying_data(100, 7)
        self.assertIsNone(best_split(Leaf.root(100), x, y, cond, []))

class TestGrow(unittest.TestCase):
    """Breadth-first growth"""

    def test_falls_back_to_null_partition(self):
        x, y, cond = varying_data(150, 8)
        null = whole_support()
        self.assertIs(grow(x, y, cond, 2, 100, null_partition=null), null)
        self.assertIsNone(grow(x, y, cond, 2, 100))

    def test_depth_one(self):
        x, y, cond = varying_data(1000, 9)
        part = grow(x, y, cond, j_max=1, min_leaf=100)
        self.assertEqual(part.L, 2)

    def test_grown_partition_is_exact(self):
        x, y, cond = varying_data(2000, 10)
        part = grow(x, y, cond, j_max=3, min_leaf=100)
        masks = part.masks(cond)
        np.testing.assert_array_equal(masks.sum(axis=1), np.ones(2000))
        self.assertGreaterEqual(int(masks.sum(axis=0).min()), 100)
        self.assertLessEqual(part.L, 8)

    def test_statistic_never_below_median_split(self):
        for seed in (11, 12, 13):
            x, y, cond = varying_data(1500, seed)
            grown = grow(x, y, cond, j_max=2, min_leaf=100)
            root_only = grow(x, y, cond, j_max=1, min_leaf=100)
            grown_stat = partition_statistic(x, y, cond, grown)
            self.assertGreaterEqual(grown_stat, partition_statistic(x, y, cond, root_only) - 1e-9)
            self.assertGreaterEqual(grown_stat, partition_statistic(x, y, cond, median_partition(cond)) - 1e-9)

    def test_depth_must_be_positive(self):
        x, y, cond = varying_data(200, 14)
        with self.assertRaises(DomainError):
            grow(x, y, cond, j_max=0)

if __name__ == "__main__":
    unittest.main()
