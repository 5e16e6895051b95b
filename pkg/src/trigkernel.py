"""
Localized trigonometric kernels on the circle and point-source separation.

Phi_n(t) = sum_{|k|<n} h(k/n) e^{ikt} = c_0 + 2 sum_{k=1}^{n-1} c_k cos(kt),
Psi_n(d) = Phi_n(d)^2, and sigma_n(mu)(x) = sum_k a_k Phi_n(x - omega_k).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev
from scipy.signal import find_peaks

from src.exceptions import InvalidArgumentError
from src.filters import eval_filter
from src.parallel import chunked_rows

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def wrap_angle(x):
    """Reduce angles mod 2*pi into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), TWO_PI)


def circular_distance(x, y):
    """|(x - y) mod 2*pi| taken in [0, pi]."""
    return np.abs(wrap_angle(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))


class TrigKernel:
    """Immutable trigonometric kernel of degree n with coefficients c_k = h(k/n)."""

    def __init__(self, n: int):
        """
        Precompute the filter coefficients.

        Args:
            n: Kernel degree, a positive integer

        Raises:
            InvalidArgumentError: If n < 1
        """
        if int(n) != n or n < 1:
            raise InvalidArgumentError(f"kernel degree must be a positive integer, got {n}")
        self.n = int(n)
        self.coeffs = eval_filter(np.arange(self.n) / self.n)
        self.coeffs.setflags(write=False)
        # Chebyshev series in cos(t): c_0 T_0 + 2 sum c_k T_k
        self._cheb = np.concatenate(([self.coeffs[0]], 2.0 * self.coeffs[1:]))
        self.peak = float(self._cheb.sum())

    def __call__(self, t):
        return chebyshev.chebval(np.cos(np.asarray(t, dtype=float)), self._cheb)

    def __repr__(self) -> str:
        return f"TrigKernel(n={self.n})"


@dataclass
class AtomicMeasure:
    """Finite sum of point masses a_k delta_{omega_k} on the circle."""

    locations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.locations = wrap_angle(np.atleast_1d(np.asarray(self.locations, dtype=float)))
        self.amplitudes = np.atleast_1d(np.asarray(self.amplitudes, dtype=float))
        if self.locations.shape != self.amplitudes.shape:
            raise InvalidArgumentError("locations and amplitudes must have the same length")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[float, float]]) -> "AtomicMeasure":
        """Build from (location, amplitude) pairs."""
        if not pairs:
            return cls()
        locs, amps = zip(*pairs)
        return cls(np.array(locs), np.array(amps))

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return AtomicMeasure(np.concatenate([self.locations, other.locations]),
                             np.concatenate([self.amplitudes, other.amplitudes]))

    def __len__(self) -> int:
        return self.locations.size

    def moments(self, n: int) -> np.ndarray:
        """Trigonometric moments mu_hat(l) = sum_k a_k exp(-i omega_k l) for |l| < n."""
        ell = np.arange(-n + 1, n)
        return np.exp(-1j * np.outer(ell, self.locations)) @ self.amplitudes


def phi_n(kernel: TrigKernel, t):
    """Evaluate Phi_n(t); even and 2*pi periodic."""
    return kernel(t)


def psi_n(kernel: TrigKernel, dist):
    """Positive kernel Psi_n = Phi_n(dist)^2 for metric values in [0, pi]."""
    return kernel(dist) ** 2


def sigma_point_sources(measure: AtomicMeasure, kernel: TrigKernel, grid,
                        threads: Optional[int] = None) -> np.ndarray:
    """
    Reconstruct sigma_n(mu) on a grid.

    Args:
        measure: The atomic measure mu
        kernel: Kernel of degree n
        grid: Query points in (-pi, pi]
        threads: Optional worker count for large grids

    Returns:
        Array with sum_k a_k Phi_n(grid_i - omega_k) per grid point
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if len(measure) == 0:
        return np.zeros_like(grid)

    def block(rows: slice) -> np.ndarray:
        return kernel(grid[rows, None] - measure.locations[None, :]) @ measure.amplitudes

    return chunked_rows(block, grid.size, threads)


def sigma_from_moments(moments: np.ndarray, kernel: TrigKernel, grid) -> np.ndarray:
    """
    Reconstruct sigma_n(mu) directly from the moments mu_hat(l), |l| < n.

    Args:
        moments: Complex array of length 2n-1 ordered l = -n+1 .. n-1
        kernel: Kernel of degree n
        grid: Query points

    Returns:
        Real part of sum_l h(l/n) mu_hat(l) e^{ilx}
    """
    n = kernel.n
    moments = np.asarray(moments)
    if moments.size != 2 * n - 1:
        raise InvalidArgumentError(f"expected {2 * n - 1} moments, got {moments.size}")
    ell = np.arange(-n + 1, n)
    weights = kernel.coeffs[np.abs(ell)] * moments
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    return np.real(np.exp(1j * np.outer(grid, ell)) @ weights)


def empirical_sigma(samples, kernel: TrigKernel, grid, threads: Optional[int] = None) -> np.ndarray:
    """Monte-Carlo sigma_n from circle samples: (1/M) sum_j Phi_n(x - u_j)."""
    samples = np.atleast_1d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise InvalidArgumentError("empirical_sigma needs at least one sample")
    weights = np.full(samples.size, 1.0 / samples.size)
    return sigma_point_sources(AtomicMeasure(samples, weights), kernel, grid, threads)


def sigma_function(kernel: TrigKernel, f_values, grid) -> np.ndarray:
    """
    Univariate reconstruction operator sigma_n(f) from equispaced samples.

    f_values[j] is f(2*pi*j/N); the integral against dtheta/2pi is replaced by
    the trapezoid rule, which is exact for trigonometric polynomials of degree < N.
    """
    f_values = np.asarray(f_values, dtype=float)
    nodes = TWO_PI * np.arange(f_values.size) / f_values.size
    return sigma_point_sources(AtomicMeasure(nodes, f_values / f_values.size), kernel, grid)


def peak_grid(kernel: TrigKernel, oversample: int = 8) -> np.ndarray:
    """Equispaced grid of oversample*n points covering (-pi, pi]."""
    size = oversample * kernel.n
    return -np.pi + TWO_PI * np.arange(1, size + 1) / size


def detect_peaks(locations, values, threshold_frac: float, kernel: TrigKernel) -> List[Tuple[float, float]]:
    """
    Find point sources as local maxima of |sigma_n| on a circular grid.

    Maxima are visited from the largest down. Each one is compared with the
    value the already accepted sources predict there (sum of a_p Phi_n(x - x_p));
    it becomes a new source only if the unexplained part still reaches the
    threshold, so the sidelobes of strong sources are not reported as sources.

    Args:
        locations: Circularly ordered grid points (at least 8n of them)
        values: Signed sigma_n at those points
        threshold_frac: Keep sources whose unexplained value is >= threshold_frac * max|values|
        kernel: The kernel used to compute the values

    Returns:
        List of (location, amplitude estimate) sorted by location, where the
        amplitude is the unexplained peak value divided by Phi_n(0)
    """
    if not 0.0 < threshold_frac < 1.0:
        raise InvalidArgumentError(f"threshold_frac must lie in (0, 1), got {threshold_frac}")
    locations = np.asarray(locations, dtype=float)
    values = np.asarray(values, dtype=float)
    magnitude = np.abs(values)
    top = magnitude.max() if magnitude.size else 0.0
    if top <= 0.0:
        return []
    cutoff = threshold_frac * top

    # pad two samples on each side so maxima at the seam are seen
    padded = np.concatenate([magnitude[-2:], magnitude, magnitude[:2]])
    idx, _ = find_peaks(padded, height=cutoff)
    idx = idx - 2
    idx = np.unique(np.mod(idx[(idx >= 0) & (idx < values.size)], values.size))

    merge_radius = np.pi / (2 * kernel.n)
    sources: List[Tuple[float, float]] = []
    for i in sorted(idx, key=lambda j: -magnitude[j]):
        x = locations[i]
        if any(circular_distance(x, loc) < merge_radius for loc, _ in sources):
            continue
        explained = sum(amp * float(kernel(x - loc)) for loc, amp in sources)
        residual = values[i] - explained
        if abs(residual) >= cutoff:
            sources.append((float(x), float(residual / kernel.peak)))

    peaks = sorted(sources)
    logger.debug(f"Detected {len(peaks)} sources above {threshold_frac:.3f} of {top:.4g}")
    return peaks
