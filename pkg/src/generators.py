"""
Seeded synthetic data generators for the experiments.

Every generator draws from named random streams (see data_utils.rng_streams) so
that parameter draws and noise draws are reproducible independently.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded
from sklearn.datasets import make_moons

from src.data_utils import noise_for_snr, rng_streams
from src.exceptions import InvalidArgumentError
from src.sphere_regress import (SphericalDataset, affine_sphere_embed, ellipse_function,
                                ellipse_points, inverse_stereographic)
from src.trigkernel import wrap_angle

logger = logging.getLogger(__name__)

ELLIPSE_ECCENTRICITY = 0.79
# ellipse class: perimeter matches the unit circle, center clear of the circle's noise band
ELLIPSE_SEMI_MAJOR = 1.22
ELLIPSE_CENTER = (5.2, 0.0)

BIEXP_WEIGHTS = (0.7, 0.3)
BIEXP_TIMES = np.arange(1, 101)
BIEXP_BOX = ((0.1, 0.7), (1.1, 1.7))
BIEXP_SCALE = 1000.0
BIEXP_OFFSETS = (380.0, 189.0, 116.0)
BIEXP_PAD = 100.0

DARCY_BOX = ((0.1, 0.25), (1.5, 2.5))
DARCY_POINTS = 100


@dataclass
class LabeledDataset:
    """Feature rows with integer class labels."""

    features: np.ndarray
    labels: np.ndarray


@dataclass
class RegressionData:
    """A spherical dataset plus the raw inputs and true parameters behind it."""

    dataset: SphericalDataset
    raw: np.ndarray
    params: np.ndarray
    clean: Optional[np.ndarray] = None
    center: Optional[np.ndarray] = None
    scale: Optional[float] = None


def _arclength_uniform(rng: np.random.Generator, a: float, b: float, count: int,
                       table_size: int = 1 << 14) -> np.ndarray:
    """Parameters t of points uniform in arclength on (a cos t, b sin t)."""
    t = np.linspace(0.0, 2.0 * np.pi, table_size + 1)
    speed = np.hypot(a * np.sin(t), b * np.cos(t))
    arc = np.concatenate([[0.0], np.cumsum((speed[1:] + speed[:-1]) / 2.0 * np.diff(t))])
    return np.interp(rng.uniform(0.0, arc[-1], count), arc, t)


def gen_circle_ellipse(seed: int, n_per_class: int = 1000, noise_sd: float = 0.05) -> LabeledDataset:
    """
    Class 0 on the unit circle, class 1 on an ellipse of eccentricity 0.79 centered at ELLIPSE_CENTER.

    Both are sampled uniformly in arclength with independent Gaussian noise of
    the given standard deviation on each coordinate.
    """
    if noise_sd < 0.0:
        raise InvalidArgumentError(f"noise_sd must be >= 0, got {noise_sd}")
    streams = rng_streams(seed, ["circle", "ellipse", "noise"], "circle_ellipse")
    a = ELLIPSE_SEMI_MAJOR
    b = a * np.sqrt(1.0 - ELLIPSE_ECCENTRICITY ** 2)

    t_circle = streams["circle"].uniform(0.0, 2.0 * np.pi, n_per_class)
    t_ellipse = _arclength_uniform(streams["ellipse"], a, b, n_per_class)
    circle = np.column_stack([np.cos(t_circle), np.sin(t_circle)])
    cx, cy = ELLIPSE_CENTER
    ellipse = np.column_stack([cx + a * np.cos(t_ellipse), cy + b * np.sin(t_ellipse)])
    features = np.vstack([circle, ellipse])
    if noise_sd > 0.0:
        features = features + noise_sd * streams["noise"].standard_normal(features.shape)
    labels = np.repeat([0, 1], n_per_class)
    logger.info(f"Generated circle+ellipse data: {features.shape[0]} points, noise {noise_sd}")
    return LabeledDataset(features, labels)


def gen_two_moons(seed: int, n_samples: int = 400, noise: float = 0.03) -> LabeledDataset:
    """Two interleaving half circles."""
    features, labels = make_moons(n_samples=n_samples, noise=noise, random_state=seed)
    return LabeledDataset(features, labels.astype(int))


def biexp_signal(lam1, lam2, times: Sequence[float] = BIEXP_TIMES) -> np.ndarray:
    """c1 exp(-lam1 t) + c2 exp(-lam2 t) for each (lam1, lam2) pair; rows are samples."""
    lam1 = np.atleast_1d(np.asarray(lam1, dtype=float))[:, None]
    lam2 = np.atleast_1d(np.asarray(lam2, dtype=float))[:, None]
    t = np.asarray(times, dtype=float)[None, :]
    return BIEXP_WEIGHTS[0] * np.exp(-lam1 * t) + BIEXP_WEIGHTS[1] * np.exp(-lam2 * t)


def biexp_project(signals: np.ndarray, scale: float = BIEXP_SCALE,
                  offsets: Sequence[float] = BIEXP_OFFSETS, pad: float = BIEXP_PAD) -> np.ndarray:
    """P(T(y)) with T(y) = scale*y - offsets (zero-padded) and P appending pad before normalizing."""
    signals = np.atleast_2d(signals)
    shift = np.zeros(signals.shape[1])
    shift[:len(offsets)] = offsets
    return inverse_stereographic((scale * signals - shift) / pad)


def gen_biexp(seed: int, M: int, snr: Optional[float] = None, **transform) -> RegressionData:
    """
    Bi-exponential decay curves with parameters uniform on [.1,.7] x [1.1,1.7].

    Noise is Gaussian, rescaled per curve to hit the SNR target exactly; the SNR
    is measured on the untransformed curve.
    """
    if M < 1:
        raise InvalidArgumentError(f"M must be >= 1, got {M}")
    streams = rng_streams(seed, ["params", "noise"], "biexp")
    (lo1, hi1), (lo2, hi2) = BIEXP_BOX
    params = np.column_stack([streams["params"].uniform(lo1, hi1, M), streams["params"].uniform(lo2, hi2, M)])
    clean = biexp_signal(params[:, 0], params[:, 1])
    noisy = np.vstack([row + noise_for_snr(streams["noise"], row, snr) for row in clean])
    points = biexp_project(noisy, **transform)
    logger.info(f"Generated {M} bi-exponential curves (snr={snr})")
    return RegressionData(SphericalDataset(points, params), noisy, params, clean)


def darcy_solution(p: float, s: float, t) -> np.ndarray:
    """
    Closed-form solution of -(e^{-st} y')' = p e^{-st}, y(0) = 1, y(1) = 0.

    y(t) = (C/s)(e^{st} - 1) + (p/s) t + 1 with C = -(p + s)/(e^s - 1).
    """
    t = np.asarray(t, dtype=float)
    c = -(p + s) / np.expm1(s)
    return (c / s) * np.expm1(s * t) + (p / s) * t + 1.0


def darcy_finite_difference(p: float, s: float, nodes: int = 10_000):
    """
    Second-order finite-difference solution of the same boundary value problem.

    Returns:
        Tuple of (grid, values) with nodes + 1 points on [0, 1]
    """
    t = np.linspace(0.0, 1.0, nodes + 1)
    h = 1.0 / nodes
    mid = np.exp(-s * (t[:-1] + h / 2.0))
    inner = nodes - 1
    # rows i = 1..nodes-1: -(a_{i+1/2}(y_{i+1}-y_i) - a_{i-1/2}(y_i-y_{i-1})) = h^2 p e^{-s t_i}
    bands = np.zeros((3, inner))
    bands[0, 1:] = -mid[1:inner]
    bands[1] = mid[:inner] + mid[1:]
    bands[2, :-1] = -mid[1:inner]
    rhs = h * h * p * np.exp(-s * t[1:-1])
    rhs[0] += mid[0] * 1.0
    values = np.empty(nodes + 1)
    values[0], values[-1] = 1.0, 0.0
    values[1:-1] = solve_banded((1, 1), bands, rhs)
    return t, values


def gen_darcy(seed: int, M: int, snr: Optional[float] = None) -> RegressionData:
    """
    Darcy-flow profiles at 100 shared random t in [0, 1], embedded on the sphere.

    (p, s) are uniform on [.1,.25] x [1.5,2.5]; the affine embedding is fitted to
    all M rows.
    """
    if M < 2:
        raise InvalidArgumentError(f"M must be >= 2, got {M}")
    streams = rng_streams(seed, ["params", "times", "noise"], "darcy")
    (lo_p, hi_p), (lo_s, hi_s) = DARCY_BOX
    params = np.column_stack([streams["params"].uniform(lo_p, hi_p, M), streams["params"].uniform(lo_s, hi_s, M)])
    times = streams["times"].uniform(0.0, 1.0, DARCY_POINTS)
    clean = np.vstack([darcy_solution(p, s, times) for p, s in params])
    noisy = np.vstack([row + noise_for_snr(streams["noise"], row, snr) for row in clean])
    points, center, scale = affine_sphere_embed(noisy)
    logger.info(f"Generated {M} Darcy profiles (snr={snr}, spread r={scale:.4g})")
    return RegressionData(SphericalDataset(points, params), noisy, params, clean, center, scale)


def gen_ellipse_regression(seed: int, M: int, snr: Optional[float] = None) -> RegressionData:
    """
    Samples of f on the projected ellipse (3 cos t, 6 sin t) with t uniform on (-pi, pi].

    params holds the angles t; noise is scaled over the whole target vector.
    """
    if M < 1:
        raise InvalidArgumentError(f"M must be >= 1, got {M}")
    streams = rng_streams(seed, ["angles", "noise"], "ellipse")
    theta = wrap_angle(streams["angles"].uniform(-np.pi, np.pi, M))
    clean = ellipse_function(theta)
    targets = clean + noise_for_snr(streams["noise"], clean, snr)
    return RegressionData(SphericalDataset(ellipse_points(theta), targets), theta, theta, clean)


def gen_measure_separation(seed: int) -> np.ndarray:
    """
    3900 circle samples: 1200 uniform on [-0.6, -0.4], 2400 normal (mean 0.05,
    variance 0.04) and atoms at -2, 0.4, 1.5 with 60, 120, 120 copies.
    """
    streams = rng_streams(seed, ["uniform", "normal"], "separation")
    parts = [streams["uniform"].uniform(-0.6, -0.4, 1200),
             streams["normal"].normal(0.05, 0.2, 2400),
             np.full(60, -2.0), np.full(120, 0.4), np.full(120, 1.5)]
    return wrap_angle(np.concatenate(parts))
