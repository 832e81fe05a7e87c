"""
Unit tests for D-vine specification, simulation and stepwise fitting
"""

import unittest
import os
import sys
import tempfile

import numpy as np
from scipy.stats import kendalltau, kstest

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from src.bivcop import BivCopula, FamilyTag
from src.dvine import (
    DVineSpec, ParamFunctional, PseudoSample, build_example_spec, clayton_dvine, compute_ppits,
    edge_keys, family_grid, propagate_pairs, rank_pseudo_obs, simulate, stepwise_fit
)
from src.exceptions import DomainError, SizeError, StateError, ValidationError

def independence_spec(d):
    return DVineSpec(d, {edge: BivCopula.independence() for edge in edge_keys(d)})

class TestRankPseudoObs(unittest.TestCase):
    """Rank transform"""

    def test_simple_ranks(self):
        sample = rank_pseudo_obs(np.array([[3.2, 1.0], [1.1, 2.0], [2.5, 3.0]]))
        np.testing.assert_allclose(sample.column(1), [0.75, 0.25, 0.5])
        np.testing.assert_allclose(sample.column(2), [0.25, 0.5, 0.75])

    def test_four_observations(self):
        sample = rank_pseudo_obs(np.array([[4.0, 0.1], [1.0, 0.2], [3.0, 0.3], [2.0, 0.4]]))
        np.testing.assert_allclose(sorted(sample.column(1)), [0.2, 0.4, 0.6, 0.8])

    def test_ties_share_maximal_rank(self):
        sample = rank_pseudo_obs(np.array([[1.0, 1.0], [1.0, 2.0], [2.0, 3.0]]))
        np.testing.assert_allclose(sample.column(1), [0.5, 0.5, 0.75])

    def test_too_few_rows(self):
        with self.assertRaises(SizeError):
            rank_pseudo_obs(np.array([[0.3, 0.4]]))

    def test_missing_values(self):
        with self.assertRaises(DomainError):
            rank_pseudo_obs(np.array([[0.3, np.nan], [0.1, 0.2]]))

class TestPseudoSample(unittest.TestCase):
    """PseudoSample validation and CSV io"""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_values_must_be_inside_unit_interval(self):
        with self.assertRaises(DomainError):
            PseudoSample(np.array([[0.2, 1.0], [0.3, 0.4]]))
        with self.assertRaises(DomainError):
            PseudoSample(np.array([[0.2, 0.0], [0.3, 0.4]]))

    def test_label_count(self):
        with self.assertRaises(ValidationError):
            PseudoSample(np.full((2, 3), 0.5), ["a", "b"])

    def test_csv_round_trip(self):
        sample = simulate(clayton_dvine(3, 0.4), 50, seed=3)
        path = os.path.join(self.temp_dir.name, "sample.csv")
        sample.to_csv(path)
        loaded = PseudoSample.from_csv(path, already_uniform=True)
        np.testing.assert_array_equal(loaded.values, sample.values)
        self.assertEqual(loaded.labels, ["u1", "u2", "u3"])

    def test_csv_is_ranked_by_default(self):
        path = os.path.join(self.temp_dir.name, "raw.csv")
        with open(path, "w") as f:
            f.write("x,y\n10,3\n30,1\n20,2\n")
        loaded = PseudoSample.from_csv(path)
        np.testing.assert_allclose(loaded.column(1), [0.25, 0.75, 0.5])
        np.testing.assert_allclose(loaded.column(2), [0.75, 0.25, 0.5])

    def test_uniform_csv_outside_unit_interval(self):
        path = os.path.join(self.temp_dir.name, "bad.csv")
        with open(path, "w") as f:
            f.write("a,b\n0.2,1.0\n0.4,0.5\n")
        with self.assertRaises(DomainError):
            PseudoSample.from_csv(path, already_uniform=True)

class TestModel(unittest.TestCase):
    """Vine specifications"""

    def test_edge_keys(self):
        self.assertEqual(list(edge_keys(4)), [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (1, 3)])
        self.assertEqual(len(list(edge_keys(6))), 15)

    def test_small_example_parameters(self):
        spec = build_example_spec("ex4.1", 0.4, 0.0)
        self.assertEqual(spec.d, 4)
        self.assertAlmostEqual(spec.copula(1, 1).theta, 4.0 / 3.0, places=12)
        self.assertAlmostEqual(spec.copula(2, 1).theta, 4.0 / 3.0, places=12)
        self.assertAlmostEqual(spec.copula(1, 2).theta, 4.0 / 7.0, places=12)
        self.assertEqual(spec.copula(1, 3).family, FamilyTag("frank"))
        self.assertAlmostEqual(spec.copula(1, 3).theta, 1.0, places=12)
        self.assertEqual(spec.conditional_edge.position, (1, 3))

    def test_dimension_example_parameters(self):
        spec = build_example_spec("ex5.1", 0.4, 0.5, d=6)
        self.assertAlmostEqual(spec.copula(1, 3).theta, 4.0 / 11.0, places=12)
        self.assertEqual(spec.conditional_edge.position, (1, 5))
        self.assertEqual(spec.conditional_edge.cond_vars, (2, 3))

    def test_example_arguments(self):
        with self.assertRaises(DomainError):
            build_example_spec("ex5.1", 0.4, 0.0, d=3)
        with self.assertRaises(DomainError):
            build_example_spec("ex4.1", 0.4, 1.5)
        with self.assertRaises(DomainError):
            build_example_spec("ex9", 0.4, 0.0)

    def test_functionals(self):
        for kind in ("sum", "interaction", "difference"):
            self.assertAlmostEqual(float(ParamFunctional(kind, 0.0)(0.3, 0.7)), 1.0)
        self.assertAlmostEqual(float(ParamFunctional("sum", 1.0)(0.0, 0.0)), 3.5)
        self.assertAlmostEqual(float(ParamFunctional("sum", 1.0)(1.0 / 3.0, 1.0 / 3.0)), 1.0)
        self.assertAlmostEqual(float(ParamFunctional("difference", 0.4)(0.5, 0.5)), 2.0)

    def test_simplified_spec(self):
        spec = build_example_spec("ex4.1", 0.4, 1.0)
        simple = spec.simplified()
        self.assertIsNone(simple.conditional_edge)
        self.assertAlmostEqual(simple.copula(1, 3).theta, 1.0)

    def test_edge_grid_must_be_complete(self):
        edges = {edge: BivCopula.independence() for edge in edge_keys(3)}
        del edges[(1, 2)]
        with self.assertRaises(ValidationError):
            DVineSpec(3, edges)

    def test_family_grid(self):
        grid = family_grid(4, ["clayton", "frank"], up_to_tree=2)
        self.assertEqual(grid[(3, 1)], FamilyTag("clayton"))
        self.assertEqual(grid[(2, 2)], FamilyTag("frank"))
        with self.assertRaises(ValidationError):
            family_grid(4, ["clayton"], up_to_tree=2)

class TestSimulate(unittest.TestCase):
    """Sampling by inverse Rosenblatt transform"""

    def test_deterministic(self):
        spec = build_example_spec("ex4.1", 0.4, 1.0)
        first = simulate(spec, 200, seed=11, replication=3)
        second = simulate(spec, 200, seed=11, replication=3)
        other = simulate(spec, 200, seed=11, replication=4)
        np.testing.assert_array_equal(first.values, second.values)
        self.assertFalse(np.array_equal(first.values, other.values))

    def test_independence_vine(self):
        sample = simulate(independence_spec(4), 10000, seed=5)
        corr = np.corrcoef(sample.values, rowvar=False)
        off_diagonal = corr[~np.eye(4, dtype=bool)]
        self.assertLess(np.max(np.abs(off_diagonal)), 0.03)
        self.assertAlmostEqual(float(np.mean(sample.values)), 0.5, delta=0.01)

    def test_first_tree_dependence(self):
        sample = simulate(clayton_dvine(3, 0.4), 2000, seed=7)
        tau, _ = kendalltau(sample.column(1), sample.column(2))
        self.assertGreaterEqual(tau, 0.37)
        self.assertLessEqual(tau, 0.43)

    def test_second_tree_dependence(self):
        """The transformed pair of edge (1, 2) carries the tree-2 copula"""
        spec = clayton_dvine(3, 0.4)
        sample = simulate(spec, 4000, seed=8)
        x = spec.copula(1, 1).hfunc(sample.column(1), sample.column(2), "second")
        y = spec.copula(2, 1).hfunc(sample.column(2), sample.column(3), "first")
        tau, _ = kendalltau(x, y)
        self.assertAlmostEqual(tau, (4.0 / 7.0) / (4.0 / 7.0 + 2.0), delta=0.04)

    def test_empty_sample(self):
        with self.assertRaises(SizeError):
            simulate(clayton_dvine(3, 0.4), 0, seed=1)

class TestStepwiseFit(unittest.TestCase):
    """Stepwise maximum likelihood and PPIT propagation"""

    @classmethod
    def setUpClass(cls):
        cls.sample = simulate(clayton_dvine(3, 0.5), 5000, seed=21)
        cls.fit = stepwise_fit(cls.sample, "clayton", up_to_tree=1)

    def test_recovers_parameter(self):
        theta = float(self.fit.copula(1, 1).theta)
        self.assertGreaterEqual(theta, 1.85)
        self.assertLessEqual(theta, 2.15)
        self.assertTrue(self.fit.estimated[(1, 1)])

    def test_mean_score_vanishes(self):
        for edge in self.fit.estimated_edges():
            self.assertLess(abs(float(np.mean(self.fit.scores[edge]))), 1e-6)

    def test_ppits_match_h_functions(self):
        x, y = compute_ppits(self.fit, 2, 1)
        u = self.sample.values
        np.testing.assert_allclose(x, self.fit.copula(1, 1).hfunc(u[:, 0], u[:, 1], "second"))
        np.testing.assert_allclose(y, self.fit.copula(2, 1).hfunc(u[:, 1], u[:, 2], "first"))

    def test_ppits_need_fitted_trees(self):
        with self.assertRaises(StateError):
            compute_ppits(self.fit, 3, 1)
        with self.assertRaises(DomainError):
            compute_ppits(self.fit, 2, 2)

    def test_continuation_equals_direct_fit(self):
        continued = stepwise_fit(self.sample, "clayton", up_to_tree=2, previous=self.fit)
        direct = stepwise_fit(self.sample, "clayton", up_to_tree=2)
        for edge in edge_keys(3):
            self.assertEqual(float(continued.copula(*edge).theta), float(direct.copula(*edge).theta))

    def test_pairs_match_full_propagation(self):
        fit = stepwise_fit(self.sample, "clayton", up_to_tree=2)
        pairs = propagate_pairs(self.sample.values, fit.copulas, 3)
        self.assertEqual(set(pairs), set(fit.pairs))
        for edge, (x, y) in pairs.items():
            np.testing.assert_array_equal(x, fit.pairs[edge][0])
            np.testing.assert_array_equal(y, fit.pairs[edge][1])

    def test_sub_edges(self):
        self.assertEqual(self.fit.sub_edges((1, 3)), [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2)])
        self.assertEqual(self.fit.sub_edges((2, 1)), [])

    def test_independence_ppits_are_columns(self):
        fit = stepwise_fit(self.sample, "independence", up_to_tree=1)
        x, y = fit.pair(1, 2)
        np.testing.assert_allclose(x, self.sample.column(1))
        np.testing.assert_allclose(y, self.sample.column(3))
        self.assertEqual(fit.estimated_edges(), [])

    def test_frank_on_independent_data(self):
        sample = simulate(independence_spec(3), 5000, seed=4)
        fit = stepwise_fit(sample, "frank", up_to_tree=1)
        self.assertLess(abs(float(fit.copula(1, 1).theta)), 0.3)

    def test_tree_out_of_range(self):
        with self.assertRaises(DomainError):
            stepwise_fit(self.sample, "clayton", up_to_tree=3)

    def _uniform_passes(self, n, reps):
        """Per PPIT column, the number of replications passing a KS test for uniformity at 1%"""
        spec = clayton_dvine(4, 0.4)
        passes = {}
        for r in range(reps):
            sample = rank_pseudo_obs(simulate(spec, n, seed=31, replication=r).values)
            fit = stepwise_fit(sample, "clayton", up_to_tree=2)
            for edge in [(1, 2), (2, 2), (1, 3)]:
                for side, column in zip("xy", compute_ppits(fit, edge[1], edge[0])):
                    ok = kstest(column, "uniform").pvalue > 0.01
                    passes[(edge, side)] = passes.get((edge, side), 0) + int(ok)
        return passes

    def test_ppits_are_uniform(self):
        for key, count in self._uniform_passes(500, 20).items():
            self.assertGreaterEqual(count, 18, f"PPIT column {key}")

    @unittest.skipUnless(os.environ.get("SVCT_SLOW_TESTS") == "1", "set SVCT_SLOW_TESTS=1 to run")
    def test_ppits_are_uniform_large_samples(self):
        for key, count in self._uniform_passes(2000, 20).items():
            self.assertGreaterEqual(count, 18, f"PPIT column {key}")

if __name__ == "__main__":
    unittest.main()
