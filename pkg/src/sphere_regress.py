"""
Training-free regression and density estimation on unknown submanifolds of S^Q.

The estimator is F_n(x) = (1/M) sum_j z_j Phi_{n,q}(x . y_j), optionally divided
by the density estimate (1/M) sum_j Phi_{n,q}(x . y_j).
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.exceptions import DegenerateDataError, InvalidArgumentError, UndefinedPointError
from src.orthopoly import SphericalKernel, spherical_kernel_matrix

# Configure logging
logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-10


@dataclass
class SphericalDataset:
    """M unit vectors y_j in R^{Q+1} with targets z_j (stored as an (M, d) array)."""

    points: np.ndarray
    targets: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.shape[0] < 1:
            raise InvalidArgumentError("a dataset needs at least one point")
        norms = np.linalg.norm(self.points, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
            raise InvalidArgumentError("dataset points must be unit vectors")
        if self.targets is None:
            self.targets = np.ones((self.points.shape[0], 1))
        targets = np.asarray(self.targets, dtype=float)
        if targets.ndim == 1:
            targets = targets[:, None]
        if targets.shape[0] != self.points.shape[0]:
            raise InvalidArgumentError(
                f"{targets.shape[0]} targets for {self.points.shape[0]} points")
        self.targets = targets

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        """Q, so that the points lie on S^Q."""
        return self.points.shape[1] - 1


@dataclass
class EstimatorConfig:
    """Kernel degree n, manifold-dimension hyperparameter q and the normalize flag."""

    n: int
    q: int
    normalize: bool = True

    def validate(self, ambient_dim: Optional[int] = None) -> None:
        if self.n < 1:
            raise InvalidArgumentError(f"n must be >= 1, got {self.n}")
        if self.q < 1 or (ambient_dim is not None and self.q > ambient_dim):
            raise InvalidArgumentError(f"q must satisfy 1 <= q <= Q, got q={self.q}, Q={ambient_dim}")

    def kernel(self) -> SphericalKernel:
        return SphericalKernel(self.n, self.q)


def inverse_stereographic(x) -> np.ndarray:
    """
    Map x in R^Q to (x, 1) / ||(x, 1)|| on S^Q.

    Accepts a single vector or an (M, Q) array of row vectors.
    """
    x = np.asarray(x, dtype=float)
    lifted = np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1)
    return lifted / np.linalg.norm(lifted, axis=-1, keepdims=True)


def affine_sphere_embed(rows) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Center the data on its bounding box and append the maximum spread before projecting.

    Args:
        rows: (M, Q) data matrix with M >= 2

    Returns:
        Tuple of (embedded (M, Q+1) unit vectors, center C, scale r)

    Raises:
        DegenerateDataError: If every row is identical (r = 0)
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[0] < 2:
        raise InvalidArgumentError("affine_sphere_embed needs at least two rows")
    top = rows.max(axis=0)
    bottom = rows.min(axis=0)
    center = (top + bottom) / 2.0
    scale = float((top - bottom).max())
    if scale <= 0.0:
        logger.error("All rows identical; cannot choose an embedding scale")
        raise DegenerateDataError("all rows are identical (spread r = 0)")
    return embed_with(rows, center, scale), center, scale


def embed_with(rows, center: np.ndarray, scale: float) -> np.ndarray:
    """Apply a previously fitted (C, r) embedding to new rows."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    lifted = np.hstack([rows - center, np.full((rows.shape[0], 1), scale)])
    return lifted / np.linalg.norm(lifted, axis=1, keepdims=True)


def _kernel_rows(data: SphericalDataset, cfg: EstimatorConfig, probes: np.ndarray,
                 threads: Optional[int]) -> np.ndarray:
    cfg.validate(data.ambient_dim)
    return spherical_kernel_matrix(cfg.kernel(), probes, data.points, threads)


def density_estimate_batch(data: SphericalDataset, cfg: EstimatorConfig, probes,
                           threads: Optional[int] = None) -> np.ndarray:
    """(1/M) sum_j Phi_{n,q}(x . y_j) for each probe row x."""
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    return _kernel_rows(data, cfg, probes, threads).mean(axis=1)


def f_n_estimate_batch(data: SphericalDataset, cfg: EstimatorConfig, probes,
                       threads: Optional[int] = None, density: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Evaluate F_n at every probe row.

    Args:
        data: Training dataset
        cfg: Estimator configuration
        probes: (N, Q+1) unit vectors
        threads: Optional worker count
        density: Optional externally supplied f_0 values at the probes, used in
            place of the density estimate when cfg.normalize is set

    Returns:
        (N, d) array of estimates

    Raises:
        UndefinedPointError: If normalizing and the denominator is not positive somewhere
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    phi = _kernel_rows(data, cfg, probes, threads)
    numer = phi @ data.targets / data.size
    if not cfg.normalize:
        return numer
    denom = phi.mean(axis=1) if density is None else np.asarray(density, dtype=float)
    bad = np.flatnonzero(denom <= 0.0)
    if bad.size:
        logger.error(f"Density estimate not positive at {bad.size} probe(s), first index {bad[0]}")
        raise UndefinedPointError(f"estimate undefined at probe {bad[0]}: density {denom[bad[0]]:.3g} <= 0")
    return numer / denom[:, None]


def f_n_estimate(data: SphericalDataset, cfg: EstimatorConfig, x) -> np.ndarray:
    """F_n at a single unit vector x; returns a length-d vector."""
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > UNIT_TOLERANCE:
        raise InvalidArgumentError("probe must be a unit vector")
    return f_n_estimate_batch(data, cfg, x[None, :])[0]


def density_estimate(data: SphericalDataset, cfg: EstimatorConfig, x) -> float:
    """Density estimate at a single unit vector x."""
    return float(density_estimate_batch(data, cfg, np.asarray(x, dtype=float)[None, :])[0])


def snr_db(signal, noise) -> float:
    """20 log10(||signal|| / ||noise||); +inf when the noise is zero."""
    signal = np.asarray(signal, dtype=float).ravel()
    noise = np.asarray(noise, dtype=float).ravel()
    if signal.shape != noise.shape:
        raise InvalidArgumentError("signal and noise must have equal lengths")
    noise_norm = np.linalg.norm(noise)
    if noise_norm == 0.0:
        return float("inf")
    return float(20.0 * np.log10(np.linalg.norm(signal) / noise_norm))


def percent_point_curve(errors) -> List[Tuple[float, float]]:
    """
    Sorted error quantiles as (percent, log10 error) pairs.

    A point (x, y) says x% of the errors are at most 10^y.
    """
    errors = np.asarray(errors, dtype=float).ravel()
    if errors.size == 0:
        raise InvalidArgumentError("percent_point_curve needs at least one error")
    if np.any(errors <= 0.0):
        raise InvalidArgumentError("errors must be positive to take log10")
    ordered = np.sort(errors)
    percents = 100.0 * np.arange(1, ordered.size + 1) / ordered.size
    return list(zip(percents.tolist(), np.log10(ordered).tolist()))


def combined_error(true_params, est_params) -> float:
    """sum_i |true_i - est_i| / |true_i|."""
    true_params = np.asarray(true_params, dtype=float).ravel()
    est_params = np.asarray(est_params, dtype=float).ravel()
    if true_params.shape != est_params.shape:
        raise InvalidArgumentError("parameter vectors must have equal lengths")
    if np.any(true_params == 0.0):
        raise InvalidArgumentError("combined error is undefined for a zero true component")
    return float(np.sum(np.abs(true_params - est_params) / np.abs(true_params)))


def rms_error(true_values, est_values) -> float:
    """Root-mean-square of the entrywise differences."""
    diff = np.asarray(true_values, dtype=float) - np.asarray(est_values, dtype=float)
    return float(np.sqrt(np.mean(diff ** 2)))


# Ellipse example: E = {(3 cos t, 6 sin t)} projected onto S^2

ELLIPSE_AXES = (3.0, 6.0)


def ellipse_function(theta):
    """f(t) = 1 + |cos t|^{1/2} sin(cos t + sin t) / 2; singular at t = +-pi/2."""
    theta = np.asarray(theta, dtype=float)
    return 1.0 + np.sqrt(np.abs(np.cos(theta))) * np.sin(np.cos(theta) + np.sin(theta)) / 2.0


def ellipse_points(theta) -> np.ndarray:
    """Inverse-stereographic images of (3 cos t, 6 sin t), shape (len(t), 3)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    planar = np.column_stack([ELLIPSE_AXES[0] * np.cos(theta), ELLIPSE_AXES[1] * np.sin(theta)])
    return inverse_stereographic(planar)


def _ellipse_speed(theta: np.ndarray) -> np.ndarray:
    """|d/dt P(E(t))| for the projected ellipse."""
    a, b = ELLIPSE_AXES
    u, v = a * np.cos(theta), b * np.sin(theta)
    du, dv = -a * np.sin(theta), b * np.cos(theta)
    r2 = u * u + v * v + 1.0
    # P(w) = (w, 1)/|(w, 1)|; derivative is (dw - (w . dw) (w, 1) / r2) / sqrt(r2)
    dot = u * du + v * dv
    tangent = np.stack([du - dot * u / r2, dv - dot * v / r2, -dot / r2])
    return np.linalg.norm(tangent, axis=0) / np.sqrt(r2)


def ellipse_exact_density(theta):
    """
    Density f_0 of the projected ellipse under uniform t.

    Taken relative to ds / 2pi (s the arclength), the measure against which the
    q = 1 kernel integrates to one, so f_0(t) = 1 / |d/dt P(E(t))|.
    """
    return 1.0 / _ellipse_speed(np.asarray(theta, dtype=float))
