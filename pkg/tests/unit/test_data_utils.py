"""
Unit tests for the data_utils module.
"""

import json
import os
import sys
import tempfile
import unittest

import numpy as np
import pandas as pd

sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))
from tests.path_setup import BASE_DIR  # noqa: F401
from tests.test_config import SEED, read_json

from src.data_utils import (NumpyJSONEncoder, load_config_file, load_dataset_csv, noise_for_snr,
                            rng_streams, save_dataset_csv, serialize_report, split_indices,
                            write_curves_csv, write_report)
from src.exceptions import ExperimentError, InvalidArgumentError


class TestNumpyJSONEncoder(unittest.TestCase):
    """Test cases for NumpyJSONEncoder class."""

    def test_encode_numpy_values(self):
        """Test encoding arrays and numpy scalars."""
        # Setup
        test_obj = {"array": np.arange(3), "int": np.int64(4), "float": np.float32(0.5), "flag": np.bool_(True)}

        # Execute
        result = json.loads(json.dumps(test_obj, cls=NumpyJSONEncoder))

        # Assert
        self.assertEqual(result, {"array": [0, 1, 2], "int": 4, "float": 0.5, "flag": True})

    def test_unknown_type_still_fails(self):
        """Test non-numpy objects fall through to the default error."""
        with self.assertRaises(TypeError):
            json.dumps({"value": object()}, cls=NumpyJSONEncoder)

    def test_serialize_report(self):
        """Test nested numpy values become plain types."""
        result = serialize_report({"outer": {"inner": np.array([1.5, 2.5])}})
        self.assertEqual(result, {"outer": {"inner": [1.5, 2.5]}})


class TestReportFiles(unittest.TestCase):
    """Test cases for report and config files."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.addCleanup(self.temp_dir.cleanup)

    def test_write_report_creates_folders(self):
        """Test the report lands in a freshly created folder."""
        path = os.path.join(self.temp_dir.name, "nested", "report.json")
        write_report({"value": np.float64(1.25)}, path)
        self.assertEqual(read_json(path), {"value": 1.25})

    def test_load_config_file(self):
        """Test a JSON object is returned as a dict."""
        path = os.path.join(self.temp_dir.name, "cfg.json")
        with open(path, "w") as f:
            json.dump({"name": "biexp", "seed": 3}, f)
        self.assertEqual(load_config_file(path), {"name": "biexp", "seed": 3})

    def test_load_config_errors(self):
        """Test missing files, bad JSON and non-objects raise ExperimentError."""
        bad_json = os.path.join(self.temp_dir.name, "bad.json")
        with open(bad_json, "w") as f:
            f.write("{not json")
        as_list = os.path.join(self.temp_dir.name, "list.json")
        with open(as_list, "w") as f:
            json.dump([1, 2], f)
        for path in (os.path.join(self.temp_dir.name, "missing.json"), bad_json, as_list):
            with self.assertRaises(ExperimentError):
                load_config_file(path)

    def test_dataset_csv_round_trip(self):
        """Test a saved dataset loads back with full precision."""
        rng = np.random.default_rng(SEED)
        features, targets = rng.standard_normal((20, 3)), rng.standard_normal(20)
        path = save_dataset_csv(os.path.join(self.temp_dir.name, "data.csv"), features, targets)
        loaded_features, loaded_targets = load_dataset_csv(path, 3, 1)
        np.testing.assert_array_equal(loaded_features, features)
        np.testing.assert_array_equal(loaded_targets[:, 0], targets)

    def test_dataset_csv_column_check(self):
        """Test a column count mismatch is reported."""
        path = save_dataset_csv(os.path.join(self.temp_dir.name, "data.csv"), np.zeros((4, 2)), np.zeros(4))
        with self.assertRaises(ExperimentError):
            load_dataset_csv(path, 3, 1)

    def test_dataset_csv_row_check(self):
        """Test features and targets must have equal rows."""
        with self.assertRaises(InvalidArgumentError):
            save_dataset_csv(os.path.join(self.temp_dir.name, "x.csv"), np.zeros((4, 2)), np.zeros(3))

    def test_write_curves_csv(self):
        """Test curves are written in long format."""
        path = os.path.join(self.temp_dir.name, "curves.csv")
        write_curves_csv(path, {"n=8": [(0.0, -1.0), (50.0, -2.0)], "n=16": [(0.0, -3.0)]})
        frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), ["curve", "percent", "log10_error"])
        self.assertEqual(len(frame), 3)
        self.assertEqual(frame[frame["curve"] == "n=16"]["log10_error"].iloc[0], -3.0)


class TestRandomHelpers(unittest.TestCase):
    """Test cases for seeded streams, splits and noise."""

    def test_streams_reproducible(self):
        """Test the same seed and names give the same draws."""
        first = rng_streams(SEED, ["a", "b"], "demo")
        second = rng_streams(SEED, ["a", "b"], "demo")
        self.assertEqual(first["b"].uniform(), second["b"].uniform())

    def test_streams_independent(self):
        """Test stages and domains do not share draws."""
        streams = rng_streams(SEED, ["a", "b"], "demo")
        other = rng_streams(SEED, ["a", "b"], "other")
        a, b = streams["a"].uniform(size=5), streams["b"].uniform(size=5)
        self.assertFalse(np.allclose(a, b))
        self.assertFalse(np.allclose(a, other["a"].uniform(size=5)))

    def test_split_indices(self):
        """Test the split partitions the index range."""
        train, test = split_indices(np.random.default_rng(SEED), 50, 10)
        self.assertEqual(len(test), 10)
        np.testing.assert_array_equal(np.sort(np.concatenate([train, test])), np.arange(50))

    def test_split_size_range(self):
        """Test test sizes of 0 or the full total are rejected."""
        for size in (0, 50):
            with self.assertRaises(InvalidArgumentError):
                split_indices(np.random.default_rng(SEED), 50, size)

    def test_noise_hits_snr_exactly(self):
        """Test the rescaled noise has the requested SNR."""
        signal = np.sin(np.linspace(0, 3, 100))
        noise = noise_for_snr(np.random.default_rng(SEED), signal, 40.0)
        self.assertAlmostEqual(20 * np.log10(np.linalg.norm(signal) / np.linalg.norm(noise)), 40.0, places=10)

    def test_noiseless_snr(self):
        """Test None and +inf return zeros."""
        rng = np.random.default_rng(SEED)
        np.testing.assert_array_equal(noise_for_snr(rng, np.ones(5), None), 0.0)
        np.testing.assert_array_equal(noise_for_snr(rng, np.ones(5), float("inf")), 0.0)


if __name__ == '__main__':
    unittest.main()
