"""
Orthonormal ultraspherical and Jacobi polynomials, the Clenshaw algorithm,
and the localized spherical kernel Phi_{n,q}.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import betaln, gammaln, roots_legendre

from src.exceptions import InvalidArgumentError
from src.filters import eval_filter
from src.parallel import chunked_rows

logger = logging.getLogger(__name__)

# tolerance for dot products of unit vectors that stray past +-1
DOT_TOLERANCE = 1e-12


def sphere_volume(q: int) -> float:
    """Surface volume omega_q = 2 pi^{(q+1)/2} / Gamma((q+1)/2) of S^q."""
    if q < 0:
        raise InvalidArgumentError(f"sphere dimension must be >= 0, got {q}")
    return float(2.0 * np.exp(0.5 * (q + 1) * np.log(np.pi) - gammaln(0.5 * (q + 1))))


def ultraspherical_at_one(q: int, n: int) -> float:
    """
    p_{q,n}(1) = 2^{1/2-q/2} / Gamma(q/2) * sqrt(Gamma(n+q-1)(2n+q-1) / Gamma(n+1)).

    At n = 0 the product Gamma(q-1)(q-1) is replaced by Gamma(q) so that q = 1 is covered.
    """
    if n == 0:
        log_core = gammaln(q)
    else:
        log_core = gammaln(n + q - 1) + np.log(2 * n + q - 1) - gammaln(n + 1)
    return float(np.exp((0.5 - 0.5 * q) * np.log(2.0) - gammaln(0.5 * q) + 0.5 * log_core))


def jacobi_at_one(alpha: float, beta: float, n: int) -> float:
    """Value at x = 1 of the orthonormal Jacobi polynomial of degree n."""
    s = alpha + beta
    if n == 0:
        # (s+1) Gamma(s+1) = Gamma(s+2) covers s = -1
        log_norm = gammaln(s + 2) - (s + 1) * np.log(2.0) - gammaln(alpha + 1) - gammaln(beta + 1)
    else:
        log_norm = (np.log(2 * n + s + 1) - (s + 1) * np.log(2.0) + gammaln(n + 1) + gammaln(n + s + 1)
                    - gammaln(n + alpha + 1) - gammaln(n + beta + 1))
    log_value = 0.5 * log_norm + gammaln(n + alpha + 1) - gammaln(alpha + 1) - gammaln(n + 1)
    return float(np.exp(log_value))


@dataclass(frozen=True)
class Recurrence:
    """
    Coefficients of p_k(x) = (a_k x + c_k) p_{k-1}(x) + b_k p_{k-2}(x).

    Index k of each array holds the coefficient for p_k; index 0 is unused and
    b_1 must be 0.
    """

    a: np.ndarray
    b: np.ndarray
    c: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.a) != len(self.b) or (self.c is not None and len(self.c) != len(self.a)):
            raise InvalidArgumentError("recurrence coefficient arrays must have equal length")

    def __len__(self) -> int:
        return len(self.a)

    def shift(self) -> np.ndarray:
        return np.zeros(len(self.a)) if self.c is None else np.asarray(self.c)


def clenshaw_eval(coeffs, rec: Recurrence, p0: float, x):
    """
    Evaluate sum_{k=0}^{n-1} C_k p_k(x) with the Clenshaw algorithm.

    Args:
        coeffs: C_0 .. C_{n-1}
        rec: Recurrence generating p_k from p_{k-1}, p_{k-2}
        p0: The constant p_0
        x: Scalar or array of evaluation points

    Returns:
        The series value, same shape as x

    Raises:
        InvalidArgumentError: If the recurrence is shorter than the coefficient list
    """
    coeffs = np.asarray(coeffs, dtype=float)
    n = coeffs.size
    if n == 0:
        raise InvalidArgumentError("clenshaw_eval needs at least one coefficient")
    if len(rec) < n:
        raise InvalidArgumentError(f"recurrence has {len(rec)} coefficients, series needs {n}")
    x = np.asarray(x, dtype=float)
    a = np.concatenate([np.asarray(rec.a, dtype=float), [0.0, 0.0]])
    b = np.concatenate([np.asarray(rec.b, dtype=float), [0.0, 0.0]])
    c = np.concatenate([rec.shift().astype(float), [0.0, 0.0]])

    y1 = np.zeros_like(x)
    y2 = np.zeros_like(x)
    for k in range(n - 1, -1, -1):
        y = coeffs[k] + (a[k + 1] * x + c[k + 1]) * y1 + b[k + 2] * y2
        y2, y1 = y1, y
    return p0 * y1


class UltrasphericalSystem:
    """Orthonormal ultraspherical polynomials p_{q,n} for weight (1-x^2)^{q/2-1}."""

    def __init__(self, q: int):
        if int(q) != q or q < 1:
            raise InvalidArgumentError(f"dimension q must be an integer >= 1, got {q}")
        self.q = int(q)
        self.p0 = ultraspherical_at_one(self.q, 0)
        self.slope = ultraspherical_at_one(self.q, 1)

    def forward(self, n: int) -> float:
        """A_n = sqrt((n+1)(n+q-1) / ((2n+q-1)(2n+q+1))), with A_0 = sqrt(1/(q+1))."""
        q = self.q
        if n == 0:
            return float(np.sqrt(1.0 / (q + 1)))
        return float(np.sqrt((n + 1) * (n + q - 1) / ((2 * n + q - 1) * (2 * n + q + 1))))

    def backward(self, n: int) -> float:
        """B_n = sqrt(n(n+q-2) / ((2n+q-1)(2n+q-3))), equal to A_{n-1}."""
        return self.forward(n - 1) if n >= 1 else 0.0

    def recurrence(self, length: int) -> Recurrence:
        """Clenshaw form: a_k = 1/A_{k-1}, b_k = -B_{k-1}/A_{k-1}, b_1 = 0."""
        a = np.zeros(length)
        b = np.zeros(length)
        for k in range(1, length):
            a[k] = 1.0 / self.forward(k - 1)
            if k >= 2:
                b[k] = -self.backward(k - 1) / self.forward(k - 1)
        return Recurrence(a, b)

    def values(self, n_max: int, x) -> np.ndarray:
        """
        Evaluate p_{q,0}(x) .. p_{q,n_max}(x) by the three-term recurrence.

        Args:
            n_max: Highest degree (>= 0)
            x: Scalar or array with |x| <= 1

        Returns:
            Array of shape (n_max + 1,) + shape(x)
        """
        if n_max < 0:
            raise InvalidArgumentError(f"n_max must be >= 0, got {n_max}")
        x = np.asarray(x, dtype=float)
        out = np.empty((n_max + 1,) + x.shape)
        out[0] = self.p0
        if n_max >= 1:
            out[1] = self.slope * x
        for n in range(1, n_max):
            out[n + 1] = (x * out[n] - self.backward(n) * out[n - 1]) / self.forward(n)
        return out

    def weight_theta(self, theta: np.ndarray) -> np.ndarray:
        """Weight after the substitution x = cos(theta): sin^{q-1}(theta)."""
        return np.sin(theta) ** (self.q - 1)


class JacobiSystem:
    """Orthonormal Jacobi polynomials for weight (1-x)^alpha (1+x)^beta, alpha, beta >= -1/2."""

    def __init__(self, alpha: float, beta: float):
        if alpha < -0.5 or beta < -0.5:
            raise InvalidArgumentError(f"Jacobi parameters must be >= -1/2, got ({alpha}, {beta})")
        self.alpha = float(alpha)
        self.beta = float(beta)
        s = self.alpha + self.beta
        self.p0 = float(np.exp(-0.5 * ((s + 1) * np.log(2.0) + betaln(self.alpha + 1, self.beta + 1))))

    def diagonal(self, n: int) -> float:
        """Recurrence diagonal: x p_n = off(n) p_{n+1} + diagonal(n) p_n + off(n-1) p_{n-1}."""
        al, be = self.alpha, self.beta
        if n == 0:
            return (be - al) / (al + be + 2)
        return (be * be - al * al) / ((2 * n + al + be) * (2 * n + al + be + 2))

    def off(self, n: int) -> float:
        """Recurrence off-diagonal term; the n = 0 entry is written in cancelled form."""
        al, be = self.alpha, self.beta
        if n == 0:
            return float(2.0 / (al + be + 2) * np.sqrt((al + 1) * (be + 1) / (al + be + 3)))
        m = n + 1
        s = 2 * m + al + be
        return float(np.sqrt(4 * m * (m + al) * (m + be) * (m + al + be) / (s * s * (s + 1) * (s - 1))))

    def recurrence(self, length: int) -> Recurrence:
        """Clenshaw form: p_k = (x - d_{k-1}) / o_{k-1} p_{k-1} - o_{k-2} / o_{k-1} p_{k-2}."""
        a = np.zeros(length)
        b = np.zeros(length)
        c = np.zeros(length)
        for k in range(1, length):
            o = self.off(k - 1)
            a[k] = 1.0 / o
            c[k] = -self.diagonal(k - 1) / o
            if k >= 2:
                b[k] = -self.off(k - 2) / o
        return Recurrence(a, b, c)

    def values(self, n_max: int, x) -> np.ndarray:
        """Evaluate p_0(x) .. p_{n_max}(x); returns shape (n_max + 1,) + shape(x)."""
        if n_max < 0:
            raise InvalidArgumentError(f"n_max must be >= 0, got {n_max}")
        x = np.asarray(x, dtype=float)
        out = np.empty((n_max + 1,) + x.shape)
        out[0] = self.p0
        if n_max >= 1:
            out[1] = (x - self.diagonal(0)) * self.p0 / self.off(0)
        for n in range(1, n_max):
            out[n + 1] = ((x - self.diagonal(n)) * out[n] - self.off(n - 1) * out[n - 1]) / self.off(n)
        return out

    def weight_theta(self, theta: np.ndarray) -> np.ndarray:
        """(1-cos)^alpha (1+cos)^beta sin, written with half angles to stay finite."""
        return (2.0 ** (self.alpha + self.beta + 1) * np.sin(theta / 2) ** (2 * self.alpha + 1)
                * np.cos(theta / 2) ** (2 * self.beta + 1))


def ultraspherical_values(system: UltrasphericalSystem, n_max: int, x) -> np.ndarray:
    """p_{q,0}(x) .. p_{q,n_max}(x)."""
    return system.values(n_max, x)


def jacobi_values(system: JacobiSystem, n_max: int, x) -> np.ndarray:
    """Orthonormal Jacobi values p_0(x) .. p_{n_max}(x)."""
    return system.values(n_max, x)


def quadrature_gram(system, n_max: int, nodes: Optional[int] = None) -> np.ndarray:
    """
    Gram matrix of p_0 .. p_{n_max} under the system's weight.

    Uses Gauss-Legendre in theta after x = cos(theta), with the weight absorbed
    into the integrand; 4 * n_max nodes by default.
    """
    nodes = nodes or max(4 * n_max, 8)
    t, w = roots_legendre(nodes)
    theta = 0.5 * np.pi * (t + 1.0)
    w = 0.5 * np.pi * w * system.weight_theta(theta)
    vals = system.values(n_max, np.cos(theta))
    return (vals * w) @ vals.T


class SphericalKernel:
    """Localized kernel Phi_{n,q}(t) = (omega_q/omega_{q-1}) sum_l h(l/n) p_{q,l}(1) p_{q,l}(t)."""

    def __init__(self, n: int, q: int):
        if int(n) != n or n < 1:
            raise InvalidArgumentError(f"kernel degree must be a positive integer, got {n}")
        self.n = int(n)
        self.q = int(q)
        self.system = UltrasphericalSystem(self.q)
        self.ratio = sphere_volume(self.q) / sphere_volume(self.q - 1)
        ell = np.arange(self.n + 1)
        at_one = np.array([ultraspherical_at_one(self.q, int(l)) for l in ell])
        self.coeffs = self.ratio * eval_filter(ell / self.n) * at_one
        self.recurrence = self.system.recurrence(self.n + 1)

    def __call__(self, t):
        return spherical_kernel_eval(self, t)

    def __repr__(self) -> str:
        return f"SphericalKernel(n={self.n}, q={self.q})"


def _checked_dot(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + DOT_TOLERANCE):
        raise InvalidArgumentError("kernel argument must be a dot product of unit vectors (|t| <= 1)")
    return np.clip(t, -1.0, 1.0)


def spherical_kernel_eval(kernel: SphericalKernel, t):
    """Phi_{n,q}(t) through the Clenshaw algorithm."""
    t = _checked_dot(t)
    value = clenshaw_eval(kernel.coeffs, kernel.recurrence, kernel.system.p0, t)
    return float(value) if value.ndim == 0 else value


def spherical_kernel_direct(kernel: SphericalKernel, t):
    """Phi_{n,q}(t) by explicit summation over the recurrence values."""
    t = _checked_dot(t)
    vals = kernel.system.values(kernel.n, t)
    value = np.tensordot(kernel.coeffs, vals, axes=1)
    return float(value) if np.ndim(value) == 0 else value


def spherical_kernel_matrix(kernel: SphericalKernel, probes: np.ndarray, points: np.ndarray,
                            threads: Optional[int] = None) -> np.ndarray:
    """
    Kernel matrix Phi_{n,q}(probes @ points.T), evaluated in row chunks.

    Args:
        probes: (N, Q+1) unit vectors
        points: (M, Q+1) unit vectors
        threads: Optional worker count

    Returns:
        (N, M) array
    """
    probes = np.atleast_2d(probes)
    points = np.atleast_2d(points)

    def block(rows: slice) -> np.ndarray:
        dots = np.clip(probes[rows] @ points.T, -1.0, 1.0)
        return clenshaw_eval(kernel.coeffs, kernel.recurrence, kernel.system.p0, dots)

    return chunked_rows(block, probes.shape[0], threads)
