"""
The smooth bandpass filter h shared by every kernel.

h(t) = 1 for |t| <= 1/2, h(t) = 0 for |t| >= 1, and in between it is the
C-infinity transition g(1-|t|) / (g(1-|t|) + g(|t|-1/2)) with
g(s) = exp(-1/s) for s > 0 and g(s) = 0 otherwise.
"""

import logging
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# exp(-1/s) is exactly 0.0 in double precision below this
_TINY = 1.0 / 745.0


def _bump(s: np.ndarray) -> np.ndarray:
    """g(s) = exp(-1/s) for s > 0, else 0; never produces NaN."""
    out = np.zeros_like(s, dtype=float)
    positive = s > _TINY
    out[positive] = np.exp(-1.0 / s[positive])
    return out


class Filter:
    """Pure function object for the bandpass filter h."""

    plateau = 0.5
    support = 1.0

    def __call__(self, t: ArrayLike) -> ArrayLike:
        arr = np.asarray(t, dtype=float)
        a = np.abs(np.atleast_1d(arr))
        rise = _bump(1.0 - a)
        fall = _bump(a - self.plateau)
        # rise + fall > 0 everywhere since (1-|t|) + (|t|-1/2) = 1/2
        values = rise / (rise + fall)
        values = np.where(a <= self.plateau, 1.0, values)
        values = np.where(a >= self.support, 0.0, values)
        if arr.ndim == 0:
            return float(values[0])
        return values.reshape(arr.shape)


FILTER = Filter()


def eval_filter(t: ArrayLike) -> ArrayLike:
    """
    Evaluate the bandpass filter.

    Args:
        t: A finite real number or an array of them

    Returns:
        h(t) in [0, 1], same shape as the input
    """
    return FILTER(t)
