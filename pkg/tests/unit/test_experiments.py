"""
Unit tests for the experiments module.
"""

import os
import sys
import tempfile
import unittest

import numpy as np
import pandas as pd

sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))
from tests.path_setup import BASE_DIR  # noqa: F401
from tests.test_config import read_json

from src.exceptions import ExperimentError
from src.experiments import ExperimentConfig, _estimate, run_experiment
from src.sphere_regress import EstimatorConfig, SphericalDataset


class TestExperimentConfig(unittest.TestCase):
    """Test cases for ExperimentConfig."""

    def test_unknown_experiment(self):
        """Test an unknown name is rejected."""
        with self.assertRaises(ExperimentError):
            ExperimentConfig(name="wavelets", seed=1)

    def test_unknown_key(self):
        """Test unknown config keys are rejected."""
        with self.assertRaises(ExperimentError):
            ExperimentConfig.from_dict({"name": "biexp", "seed": 1, "bandwidth": 3})

    def test_name_and_seed_required(self):
        """Test both name and seed must be present."""
        with self.assertRaises(ExperimentError):
            ExperimentConfig.from_dict({"name": "biexp"})

    def test_defaults_filled(self):
        """Test experiment defaults fill missing fields."""
        cfg = ExperimentConfig(name="darcy", seed=1)
        self.assertEqual(cfg.q, 2)
        self.assertEqual(cfg.n_values, [64])
        self.assertEqual(cfg.M, 1 << 13)

    def test_single_values_override_sweeps(self):
        """Test an explicit n or snr replaces the default sweep."""
        cfg = ExperimentConfig(name="darcy", seed=1, n=16, snr=40.0)
        self.assertEqual(cfg.n_values, [16])
        self.assertEqual(cfg.snr_values, [40.0])

    def test_defaults_not_shared(self):
        """Test list defaults are copied per config."""
        first = ExperimentConfig(name="ellipse", seed=1)
        first.n_values.append(64)
        self.assertEqual(ExperimentConfig(name="ellipse", seed=2).n_values, [8, 16, 32])


class TestEstimateFallback(unittest.TestCase):
    """Test cases for probes where the normalized estimate is undefined."""

    def test_undefined_probes_are_masked(self):
        """Test a non-positive density masks the probe instead of failing the run."""
        theta = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
        training = SphericalDataset(np.column_stack([np.cos(theta), np.sin(theta)]), np.full(64, 2.0))
        probes = np.array([[1.0, 0.0], [0.0, 1.0]])
        est, ok = _estimate(training, EstimatorConfig(4, 1), probes, None, density=np.array([1.0, 0.0]))
        np.testing.assert_array_equal(ok, [True, False])
        self.assertTrue(np.isnan(est[1, 0]))
        self.assertTrue(np.isfinite(est[0, 0]))

    def test_defined_probes_pass_through(self):
        """Test uniform data gives the targets back everywhere."""
        theta = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
        training = SphericalDataset(np.column_stack([np.cos(theta), np.sin(theta)]), np.full(64, 2.0))
        est, ok = _estimate(training, EstimatorConfig(4, 1), np.array([[0.6, 0.8]]), None)
        self.assertTrue(ok.all())
        self.assertAlmostEqual(est[0, 0], 2.0, places=8)


class TestRunExperiment(unittest.TestCase):
    """Test cases for running experiments end to end."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.addCleanup(self.temp_dir.cleanup)

    def test_pointsource_report(self):
        """Test peak detection output and the written report."""
        out = os.path.join(self.temp_dir.name, "pointsource.json")
        report = run_experiment(ExperimentConfig(name="pointsource", seed=1, out=out))

        self.assertEqual(len(report.metrics["peaks"]["256"]["locations"]), 3)
        saved = read_json(out)
        self.assertEqual(saved["config"]["name"], "pointsource")
        self.assertEqual(saved["metrics"]["peaks"]["256"]["locations"], report.metrics["peaks"]["256"]["locations"])
        self.assertGreaterEqual(saved["seconds"], 0.0)

    def test_transfer_equal_spaces(self):
        """Test identical spaces give the identity matrix and lifting equals rescaled smoothing."""
        metrics = run_experiment(ExperimentConfig(name="transfer", seed=0)).metrics
        self.assertEqual((metrics["a"], metrics["b"]), (0, 0))
        self.assertLess(metrics["identity_deviation"], 1e-8)
        self.assertLess(metrics["lift_vs_smooth"], 1e-8)
        self.assertLess(metrics["off_band_ratio"], 1e-8)

    def test_masc_two_moons(self):
        """Test two moons are labeled perfectly with two queries."""
        cfg = ExperimentConfig(name="masc", seed=0, dataset="two_moons", n_per_class=200, noise_sd=0.03,
                               n=32, theta=0.15, eta_start=0.2, eta_step=0.05, eta_end=3.5, p=5, k_bar=5)
        metrics = run_experiment(cfg).metrics
        self.assertEqual(metrics["n_queries"], 2)
        self.assertEqual(metrics["accuracy"], 1.0)
        self.assertEqual(metrics["f_score"], 1.0)
        self.assertEqual(len(metrics["queries"]), 2)

    def test_masc_unknown_dataset(self):
        """Test an unknown dataset name is rejected."""
        with self.assertRaises(ExperimentError):
            run_experiment(ExperimentConfig(name="masc", seed=0, dataset="spirals"))

    def test_biexp_q_sweep(self):
        """Test the RMS-versus-q sweep reports one entry per q."""
        cfg = ExperimentConfig(name="biexp", seed=1, M=1024, test_size=128, n_values=[8], q_values=[1, 2])
        sweep = run_experiment(cfg).metrics["q_sweep"]
        self.assertEqual([row["q"] for row in sweep], [1, 2])
        for row in sweep:
            self.assertTrue(np.isfinite(row["rms"]))

    def test_ellipse_csv_export(self):
        """Test percent-point curves are exported and kept out of the report."""
        csv_out = os.path.join(self.temp_dir.name, "curves.csv")
        cfg = ExperimentConfig(name="ellipse", seed=3, M=256, test_size=64, n_values=[8], csv_out=csv_out)
        report = run_experiment(cfg)

        self.assertNotIn("_curves", report.metrics)
        self.assertIn("n=8,snr=None", report.metrics["curves"])
        frame = pd.read_csv(csv_out)
        self.assertEqual(set(frame["curve"]), {"n=8,snr=None"})
        self.assertEqual(len(frame), 64)


if __name__ == '__main__':
    unittest.main()
