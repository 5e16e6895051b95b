"""
Unit tests for the trigkernel module.
"""

import os
import sys
import unittest

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))
from tests.path_setup import BASE_DIR  # noqa: F401
from tests.test_config import POINT_SOURCE_MEASURE

from src.exceptions import InvalidArgumentError
from src.filters import eval_filter
from src.trigkernel import (AtomicMeasure, TrigKernel, circular_distance, detect_peaks, empirical_sigma,
                            peak_grid, phi_n, psi_n, sigma_from_moments, sigma_function,
                            sigma_point_sources, wrap_angle)


class TestAngles(unittest.TestCase):
    """Test cases for angle helpers."""

    def test_wrap_angle_range(self):
        """Test reduction into (-pi, pi]."""
        x = np.array([-np.pi, np.pi, 3 * np.pi, 0.5 - 2 * np.pi, 7.0])
        wrapped = wrap_angle(x)
        self.assertTrue(np.all(wrapped > -np.pi) and np.all(wrapped <= np.pi))
        np.testing.assert_allclose(wrapped[:3], np.pi)
        self.assertAlmostEqual(float(wrapped[3]), 0.5)

    def test_circular_distance(self):
        """Test distances wrap around the seam."""
        self.assertAlmostEqual(float(circular_distance(3.0, -3.0)), 2 * np.pi - 6.0)
        self.assertAlmostEqual(float(circular_distance(0.0, np.pi)), np.pi)


class TestTrigKernel(unittest.TestCase):
    """Test cases for TrigKernel and the kernel functions."""

    def setUp(self):
        self.kernel = TrigKernel(32)

    def test_rejects_bad_degree(self):
        """Test n < 1 and fractional n are rejected."""
        with self.assertRaises(InvalidArgumentError):
            TrigKernel(0)
        with self.assertRaises(InvalidArgumentError):
            TrigKernel(2.5)

    def test_peak_is_coefficient_sum(self):
        """Test Phi_n(0) = sum_{|k|<n} h(k/n)."""
        k = np.arange(-31, 32)
        self.assertAlmostEqual(phi_n(self.kernel, 0.0), float(eval_filter(k / 32).sum()), places=10)
        self.assertAlmostEqual(self.kernel.peak, phi_n(self.kernel, 0.0), places=10)

    def test_matches_direct_sum(self):
        """Test the Chebyshev evaluation against the exponential sum."""
        t = np.linspace(-np.pi, np.pi, 41)
        k = np.arange(-31, 32)
        direct = np.real(np.exp(1j * np.outer(t, k)) @ eval_filter(np.abs(k) / 32))
        np.testing.assert_allclose(self.kernel(t), direct, atol=1e-10)

    def test_even_and_periodic(self):
        """Test Phi_n(-t) = Phi_n(t) = Phi_n(t + 2 pi)."""
        t = np.linspace(0.0, np.pi, 17)
        np.testing.assert_allclose(self.kernel(-t), self.kernel(t), atol=1e-10)
        np.testing.assert_allclose(self.kernel(t + 2 * np.pi), self.kernel(t), atol=1e-9)

    def test_psi_is_square(self):
        """Test Psi_n = Phi_n^2 and that it is non-negative."""
        d = np.linspace(0.0, np.pi, 33)
        np.testing.assert_allclose(psi_n(self.kernel, d), self.kernel(d) ** 2)
        self.assertTrue(np.all(psi_n(self.kernel, d) >= 0.0))

    def test_localization(self):
        """Test the kernel is tiny away from the origin."""
        far = np.abs(TrigKernel(128)(np.linspace(1.0, np.pi, 50)))
        self.assertLess(far.max(), 1e-3 * TrigKernel(128).peak)

    def test_localization_improves_with_degree(self):
        """Test the largest relative value beyond 0.2 never grows as n doubles."""
        t = np.linspace(0.2, np.pi, 20001)
        ratios = []
        for n in (32, 64, 128, 256):
            kernel = TrigKernel(n)
            ratios.append(np.abs(kernel(t)).max() / kernel.peak)
        for coarse, fine in zip(ratios, ratios[1:]):
            self.assertLessEqual(fine, coarse)
        self.assertLess(ratios[-1], ratios[0])


class TestPointSources(unittest.TestCase):
    """Test cases for point-source reconstruction and peak detection."""

    def setUp(self):
        self.measure = AtomicMeasure.from_pairs(POINT_SOURCE_MEASURE)

    def _peaks(self, n, threshold=0.08):
        kernel = TrigKernel(n)
        grid = peak_grid(kernel)
        values = sigma_point_sources(self.measure, kernel, grid)
        return detect_peaks(grid, values, threshold, kernel)

    def test_three_peaks_at_high_degree(self):
        """Test n=256 separates the atoms at 2 and 2.05."""
        peaks = self._peaks(256)
        self.assertEqual(len(peaks), 3)
        for (loc, amp), (true_loc, true_amp) in zip(peaks, sorted(POINT_SOURCE_MEASURE)):
            self.assertLess(abs(loc - true_loc), 1e-2)
            self.assertLess(abs(amp - true_amp) / true_amp, 0.1)

    def test_unresolved_at_low_degree(self):
        """Test n=64 sees a single source between 2 and 2.05."""
        near_pair = [loc for loc, _ in self._peaks(64) if 1.98 <= loc <= 2.07]
        self.assertEqual(len(near_pair), 1)
        self.assertGreater(near_pair[0], 2.0)
        self.assertLess(near_pair[0], 2.05)

    def test_single_atom(self):
        """Test one atom is located within pi/(2n) and its amplitude within 5%."""
        kernel = TrigKernel(128)
        grid = peak_grid(kernel)
        values = sigma_point_sources(AtomicMeasure.from_pairs([(0.5, 7.0)]), kernel, grid)
        peaks = detect_peaks(grid, values, 0.5, kernel)
        self.assertEqual(len(peaks), 1)
        self.assertLess(abs(peaks[0][0] - 0.5), np.pi / 256)
        self.assertLess(abs(peaks[0][1] - 7.0) / 7.0, 0.05)

    def test_sidelobes_are_not_sources(self):
        """Test a lone strong atom yields one source even with a low threshold."""
        kernel = TrigKernel(256)
        grid = peak_grid(kernel)
        values = sigma_point_sources(AtomicMeasure.from_pairs([(2.0, 30.0)]), kernel, grid)
        self.assertEqual(len(detect_peaks(grid, values, 0.05, kernel)), 1)

    def test_moments_agree_with_direct_sum(self):
        """Test sigma_n from moments equals the sum of shifted kernels."""
        kernel = TrigKernel(48)
        grid = np.linspace(-np.pi, np.pi, 200)
        from_moments = sigma_from_moments(self.measure.moments(48), kernel, grid)
        direct = sigma_point_sources(self.measure, kernel, grid)
        np.testing.assert_allclose(from_moments, direct, atol=1e-9)

    def test_moment_count_checked(self):
        """Test a wrong number of moments is rejected."""
        with self.assertRaises(InvalidArgumentError):
            sigma_from_moments(np.zeros(10), TrigKernel(8), [0.0])

    def test_seam_peak(self):
        """Test an atom at pi is found once."""
        measure = AtomicMeasure.from_pairs([(np.pi, 1.0)])
        kernel = TrigKernel(64)
        grid = peak_grid(kernel)
        peaks = detect_peaks(grid, sigma_point_sources(measure, kernel, grid), 0.5, kernel)
        self.assertEqual(len(peaks), 1)
        self.assertLess(circular_distance(peaks[0][0], np.pi), 1e-2)

    def test_empty_measure(self):
        """Test the empty measure reconstructs to zero and has no peaks."""
        kernel = TrigKernel(16)
        grid = peak_grid(kernel)
        values = sigma_point_sources(AtomicMeasure(), kernel, grid)
        np.testing.assert_array_equal(values, 0.0)
        self.assertEqual(detect_peaks(grid, values, 0.1, kernel), [])

    def test_threshold_range(self):
        """Test threshold fractions outside (0, 1) are rejected."""
        kernel = TrigKernel(8)
        with self.assertRaises(InvalidArgumentError):
            detect_peaks([0.0], [1.0], 1.5, kernel)

    def test_reconstruction_is_linear(self):
        """Test sigma of a sum of measures is the sum of the sigmas."""
        rng = np.random.default_rng(7)
        kernel = TrigKernel(64)
        grid = peak_grid(kernel)
        for _ in range(5):
            first = AtomicMeasure(rng.uniform(-np.pi, np.pi, 6), rng.normal(size=6))
            second = AtomicMeasure(rng.uniform(-np.pi, np.pi, 4), rng.normal(size=4))
            whole = sigma_point_sources(first + second, kernel, grid)
            parts = sigma_point_sources(first, kernel, grid) + sigma_point_sources(second, kernel, grid)
            scale = np.abs(whole).max()
            np.testing.assert_allclose(whole, parts, rtol=0, atol=1e-10 * scale)

    def test_measure_addition(self):
        """Test adding measures concatenates their atoms."""
        total = AtomicMeasure.from_pairs([(0.0, 1.0)]) + AtomicMeasure.from_pairs([(1.0, 2.0)])
        self.assertEqual(len(total), 2)
        np.testing.assert_allclose(total.amplitudes, [1.0, 2.0])


class TestReconstruction(unittest.TestCase):
    """Test cases for the univariate reconstruction operator."""

    def test_reproduces_low_degree_trig_polynomials(self):
        """Test sigma_n(P) = P for cos(k t), sin(k t) with k < n/2."""
        n = 64
        kernel = TrigKernel(n)
        nodes = 2 * np.pi * np.arange(2 * n) / (2 * n)
        grid = np.linspace(-np.pi, np.pi, 301)
        for k in range(n // 2):
            for func in (np.cos, np.sin):
                rebuilt = sigma_function(kernel, func(k * nodes), grid)
                np.testing.assert_allclose(rebuilt, func(k * grid), atol=1e-8)

    def test_empirical_sigma_of_uniform_samples(self):
        """Test equispaced samples give the constant density 1."""
        kernel = TrigKernel(16)
        samples = 2 * np.pi * np.arange(256) / 256
        values = empirical_sigma(samples, kernel, np.linspace(-3, 3, 13))
        np.testing.assert_allclose(values, 1.0, atol=1e-10)

    def test_empirical_sigma_needs_samples(self):
        """Test an empty sample set is rejected."""
        with self.assertRaises(InvalidArgumentError):
            empirical_sigma([], TrigKernel(4), [0.0])


if __name__ == '__main__':
    unittest.main()
