"""
Unit tests for the command-line entry point.
"""

import os
import sys
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO

sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))
from tests.path_setup import BASE_DIR  # noqa: F401
from tests.test_config import read_json, write_json_config

from src.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, main


class TestCli(unittest.TestCase):
    """Test cases for main()."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.addCleanup(self.temp_dir.cleanup)
        self.out = os.path.join(self.temp_dir.name, "report.json")

    def _main(self, argv):
        with redirect_stdout(StringIO()), redirect_stderr(StringIO()) as err:
            code = main(argv)
        return code, err.getvalue()

    def test_pointsource_success(self):
        """Test a successful run exits 0 and writes the report."""
        code, _ = self._main(["pointsource", "--seed", "1", "--out", self.out])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(read_json(self.out)["config"]["seed"], 1)

    def test_config_file_with_overrides(self):
        """Test config keys are read and --seed overrides them."""
        path = write_json_config(self.temp_dir.name, {"name": "transfer", "seed": 5, "degrees": [8, 16]})
        code, _ = self._main(["transfer", "--config", path, "--seed", "9", "--out", self.out])
        self.assertEqual(code, EXIT_OK)
        report = read_json(self.out)
        self.assertEqual(report["config"]["seed"], 9)
        self.assertEqual(report["config"]["degrees"], [8, 16])

    def test_invalid_experiment(self):
        """Test argparse rejects an unknown experiment with status 2."""
        with redirect_stderr(StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(["wavelets", "--seed", "1"])
        self.assertEqual(ctx.exception.code, EXIT_USAGE)

    def test_unknown_config_key(self):
        """Test an unknown config key is a usage error."""
        path = write_json_config(self.temp_dir.name, {"name": "biexp", "seed": 1, "bandwidth": 2})
        code, err = self._main(["biexp", "--config", path, "--out", self.out])
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("bandwidth", err)

    def test_config_for_other_experiment(self):
        """Test a config naming another experiment is a usage error."""
        path = write_json_config(self.temp_dir.name, {"name": "darcy", "seed": 1})
        code, _ = self._main(["biexp", "--config", path, "--out", self.out])
        self.assertEqual(code, EXIT_USAGE)

    def test_missing_seed(self):
        """Test a run without a seed is a usage error."""
        code, _ = self._main(["pointsource", "--out", self.out])
        self.assertEqual(code, EXIT_USAGE)

    def test_zero_threads(self):
        """Test --threads 0 is a usage error."""
        code, _ = self._main(["pointsource", "--seed", "1", "--threads", "0", "--out", self.out])
        self.assertEqual(code, EXIT_USAGE)

    def test_numerical_failure(self):
        """Test a non-integer Jacobi parameter gap fails with status 1."""
        path = write_json_config(self.temp_dir.name, {"name": "transfer", "seed": 1, "alpha1": 0.0})
        code, err = self._main(["transfer", "--config", path, "--out", self.out])
        self.assertEqual(code, EXIT_FAILURE)
        self.assertIn("transfer failed", err)
        self.assertFalse(os.path.exists(self.out))

    def test_parser_flags(self):
        """Test the optional flags parse into the namespace."""
        args = build_parser().parse_args(["darcy", "--seed", "3", "--threads", "2", "--csv-out", "c.csv"])
        self.assertEqual((args.experiment, args.seed, args.threads, args.csv_out), ("darcy", 3, 2, "c.csv"))


if __name__ == '__main__':
    unittest.main()
