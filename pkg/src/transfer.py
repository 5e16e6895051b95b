"""
Joint data spaces built from trigonometric Jacobi systems on [0, pi], and the
lifting operator that transfers a function from one system to the other.

Functions are the dtheta-orthonormal family
phi_n(theta) = (1-cos)^{alpha/2+1/4} (1+cos)^{beta/2+1/4} p_n(cos theta).
Coefficients are integrals against dtheta, which is the same expansion as the
sqrt(pi) phi_n family against dtheta/pi.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from src.exceptions import InvalidArgumentError, QuadratureError
from src.filters import eval_filter
from src.orthopoly import JacobiSystem

logger = logging.getLogger(__name__)

QUAD_START = 2048
QUAD_CAP = 32768
QUAD_TOL = 1e-8

FunctionOrSamples = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def trapezoid_rule(intervals: int):
    """Nodes and weights of the composite trapezoid rule on [0, pi]."""
    nodes = np.linspace(0.0, np.pi, intervals + 1)
    weights = np.full(intervals + 1, np.pi / intervals)
    weights[[0, -1]] *= 0.5
    return nodes, weights


def refine_trapezoid(evaluate: Callable[[int], np.ndarray], what: str, start: int = QUAD_START,
                     cap: int = QUAD_CAP, tol: float = QUAD_TOL) -> np.ndarray:
    """
    Double the node count until successive results agree entrywise to tol.

    Args:
        evaluate: Maps an interval count to the quadrature result
        what: Name used in log and error messages

    Raises:
        QuadratureError: If the cap is reached before convergence
    """
    intervals = start
    previous = evaluate(intervals)
    while intervals < cap:
        intervals *= 2
        current = evaluate(intervals)
        change = float(np.max(np.abs(current - previous))) if current.size else 0.0
        logger.debug(f"{what}: {intervals} intervals, change {change:.3e}")
        if change < tol:
            return current
        previous = current
    logger.error(f"{what} did not converge to {tol:g} within {cap} intervals")
    raise QuadratureError(f"{what}: no convergence to {tol:g} within {cap} intervals")


class JacobiDataSpace:
    """Trigonometric Jacobi system on [0, pi] with eigenvalues lambda_n = n + (alpha+beta+1)/2."""

    def __init__(self, alpha: float, beta: float):
        self.system = JacobiSystem(alpha, beta)
        self.alpha = self.system.alpha
        self.beta = self.system.beta

    def eigenvalue(self, n):
        return np.asarray(n) + (self.alpha + self.beta + 1.0) / 2.0

    def functions(self, n_max: int, theta) -> np.ndarray:
        """phi_0 .. phi_{n_max} at theta; shape (n_max + 1,) + shape(theta)."""
        theta = np.asarray(theta, dtype=float)
        if np.any((theta < 0.0) | (theta > np.pi)):
            raise InvalidArgumentError("theta must lie in [0, pi]")
        # (1-cos)^{a/2+1/4} (1+cos)^{b/2+1/4} in half-angle form
        envelope = (2.0 ** ((self.alpha + self.beta + 1.0) / 2.0)
                    * np.sin(theta / 2.0) ** (self.alpha + 0.5)
                    * np.cos(theta / 2.0) ** (self.beta + 0.5))
        return self.system.values(n_max, np.cos(theta)) * envelope

    def degrees_below(self, n: float) -> int:
        """Number of indices m with lambda_m < n."""
        return max(0, int(np.ceil(n - (self.alpha + self.beta + 1.0) / 2.0)))

    def __repr__(self) -> str:
        return f"JacobiDataSpace(alpha={self.alpha}, beta={self.beta})"


def _integer_gap(x: float, y: float, name: str) -> int:
    gap = abs(x - y) / 2.0
    if abs(gap - round(gap)) > 1e-12:
        raise InvalidArgumentError(f"{name} = |{x} - {y}|/2 must be an integer")
    return int(round(gap))


def connection_matrix(space1: JacobiDataSpace, space2: JacobiDataSpace, size: int,
                      intervals: Optional[int] = None) -> np.ndarray:
    """
    A_{m,k} = int_0^pi phi_{1,m} phi_{2,k} Omega dtheta, Omega = (1-cos)^a (1+cos)^b.

    Args:
        space1, space2: The two systems; a and b must be integers
        size: Matrix size N
        intervals: Fixed trapezoid interval count; refined to convergence when omitted

    Returns:
        (N, N) matrix
    """
    if size < 1:
        raise InvalidArgumentError(f"matrix size must be >= 1, got {size}")
    a = _integer_gap(space1.alpha, space2.alpha, "a")
    b = _integer_gap(space1.beta, space2.beta, "b")

    def evaluate(count: int) -> np.ndarray:
        theta, w = trapezoid_rule(count)
        omega = (1.0 - np.cos(theta)) ** a * (1.0 + np.cos(theta)) ** b
        left = space1.functions(size - 1, theta) * (w * omega)
        return left @ space2.functions(size - 1, theta).T

    if intervals is not None:
        return evaluate(intervals)
    return refine_trapezoid(evaluate, "connection matrix")


class JointJacobiSpace:
    """Two Jacobi data spaces linked by their connection matrix and joint eigenvalues."""

    def __init__(self, space1: JacobiDataSpace, space2: JacobiDataSpace, max_degree: float):
        """
        Precompute everything needed for kernel degrees up to max_degree.

        Args:
            space1: Target system Xi_1
            space2: Base system Xi_2 (where f lives)
            max_degree: Largest kernel degree n that will be requested
        """
        self.space1 = space1
        self.space2 = space2
        self.a = _integer_gap(space1.alpha, space2.alpha, "a")
        self.b = _integer_gap(space1.beta, space2.beta, "b")
        self.band = 2 * self.a + 2 * self.b
        self.max_degree = float(max_degree)
        self.size = max(space1.degrees_below(max_degree), space2.degrees_below(max_degree)) + self.band + 1
        self.matrix = connection_matrix(space1, space2, self.size)
        m = np.arange(self.size)
        self.joint_eigenvalues = np.sqrt(space1.eigenvalue(m)[:, None] ** 2 + space2.eigenvalue(m)[None, :] ** 2)
        self.band_mask = np.abs(m[:, None] - m[None, :]) <= self.band
        logger.info(f"Joint space ready: a={self.a}, b={self.b}, N={self.size}")

    def weights(self, n: float) -> np.ndarray:
        """h(l_{m,k}/n) A_{m,k} restricted to the band."""
        if n <= 0 or n > self.max_degree:
            raise InvalidArgumentError(f"degree {n} outside (0, {self.max_degree}]")
        return np.where(self.band_mask, eval_filter(self.joint_eigenvalues / n) * self.matrix, 0.0)


def joint_kernel(space: JointJacobiSpace, n: float, theta1, theta2) -> np.ndarray:
    """Phi_n(theta1, theta2) = sum h(l_{m,k}/n) A_{m,k} phi_{1,m}(theta1) phi_{2,k}(theta2)."""
    left = space.space1.functions(space.size - 1, np.atleast_1d(theta1))
    right = space.space2.functions(space.size - 1, np.atleast_1d(theta2))
    values = left.T @ space.weights(n) @ right
    return values if values.size > 1 else float(values.ravel()[0])


def coefficients(space: JacobiDataSpace, f: FunctionOrSamples, count: int,
                 tol: float = QUAD_TOL) -> np.ndarray:
    """
    f_hat(k) = int_0^pi f phi_k dtheta for k < count.

    f is either a callable on [0, pi] (integrated with refinement) or samples on
    the trapezoid grid of len(f) - 1 intervals.
    """
    def evaluate(intervals: int, values: Optional[np.ndarray] = None) -> np.ndarray:
        theta, w = trapezoid_rule(intervals)
        if values is None:
            values = np.asarray(f(theta), dtype=float)
        return space.functions(count - 1, theta) @ (w * values)

    if callable(f):
        return refine_trapezoid(evaluate, "coefficients", tol=tol)
    samples = np.asarray(f, dtype=float)
    if samples.size < 3:
        raise InvalidArgumentError("need samples on at least two trapezoid intervals")
    return evaluate(samples.size - 1, samples)


def lift(space: JointJacobiSpace, f: FunctionOrSamples, n: float, theta1) -> np.ndarray:
    """
    sigma_n(Xi_1, Xi_2; f)(theta1) = sum h(l_{m,k}/n) A_{m,k} f_hat(k) phi_{1,m}(theta1).

    Returns an array shaped like theta1 (a float for scalar input).
    """
    f_hat = coefficients(space.space2, f, space.size)
    return _lift_from_coefficients(space, f_hat, n, theta1)


def _lift_from_coefficients(space: JointJacobiSpace, f_hat: np.ndarray, n: float, theta1):
    theta1 = np.asarray(theta1, dtype=float)
    values = np.tensordot(space.weights(n) @ f_hat, space.space1.functions(space.size - 1, theta1), axes=1)
    return float(values) if np.ndim(values) == 0 else values


def single_space_smooth(space: JacobiDataSpace, f: FunctionOrSamples, n: float, theta) -> np.ndarray:
    """sigma_n(Xi; f)(theta) = sum_m h(lambda_m/n) f_hat(m) phi_m(theta)."""
    count = space.degrees_below(n) + 1
    f_hat = coefficients(space, f, count)
    weights = eval_filter(space.eigenvalue(np.arange(count)) / n) * f_hat
    theta = np.asarray(theta, dtype=float)
    values = np.tensordot(weights, space.functions(count - 1, theta), axes=1)
    return float(values) if np.ndim(values) == 0 else values


def polynomial_preservation_constant(space: JointJacobiSpace, n0: float) -> float:
    """
    c* = 2 max{l_{j,k} : |j-k| <= 2a+2b, lambda_{2,k} < n0} / n0.

    For degrees m >= c* n0 every term a polynomial of degree n0 can excite sits
    on the filter plateau, so sigma_m of it no longer changes.
    """
    k = np.flatnonzero(space.space2.eigenvalue(np.arange(space.size)) < n0)
    if k.size == 0:
        raise InvalidArgumentError(f"no basis function with eigenvalue below {n0}")
    reach = space.band_mask[:, k]
    return float(2.0 * space.joint_eigenvalues[:, k][reach].max() / n0)


def _smooth_cutoff(theta: np.ndarray, center: float, radius: float) -> np.ndarray:
    """1 on B(center, 7 radius/8), 0 outside B(center, radius), C-infinity in between."""
    u = np.abs(theta - center)
    return eval_filter(np.maximum(0.5, 0.5 + 4.0 * (u - 7.0 * radius / 8.0) / radius))


def local_lift_experiment(space: JointJacobiSpace, f: Callable[[np.ndarray], np.ndarray],
                          center: float, radius: float, degrees: Sequence[float],
                          grid_size: int = 257) -> Dict[str, List[float]]:
    """
    Lift f known only on A = B(center, radius) and watch the lifts settle on B(center, 3 radius/4).

    f is multiplied by a smooth cutoff that equals 1 on B(center, 7 radius/8)
    and vanishes outside A; the report lists sup-norm differences between
    successive degrees on the inner ball.
    """
    if radius <= 0.0 or center - radius < 0.0 or center + radius > np.pi:
        raise InvalidArgumentError("the ball B(center, radius) must lie inside [0, pi]")
    degrees = sorted(float(d) for d in degrees)
    if len(degrees) < 2:
        raise InvalidArgumentError("need at least two degrees to compare successive lifts")

    def localized(theta: np.ndarray) -> np.ndarray:
        return f(theta) * _smooth_cutoff(theta, center, radius)

    inner = np.linspace(center - 0.75 * radius, center + 0.75 * radius, grid_size)
    f_hat = coefficients(space.space2, localized, space.size)
    lifts = [_lift_from_coefficients(space, f_hat, n, inner) for n in degrees]
    differences = [float(np.max(np.abs(b - a))) for a, b in zip(lifts, lifts[1:])]
    logger.info(f"Local lift differences over degrees {degrees}: {differences}")
    return {"degrees": degrees, "differences": differences, "grid": inner.tolist(),
            "lifted": lifts[-1].tolist()}
