"""
Helper functions for datasets, reports and random streams.
"""

import json
import logging
import os
import zlib
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.exceptions import ExperimentError, InvalidArgumentError

# Configure logging
logger = logging.getLogger(__name__)


class NumpyJSONEncoder(json.JSONEncoder):
    """JSON encoder that can handle numpy scalars and arrays."""

    def default(self, obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        return super().default(obj)


def serialize_report(report: Dict[str, Any]) -> Dict[str, Any]:
    """
    Turn a report into plain JSON types.

    Args:
        report: Mapping that may contain numpy values

    Returns:
        JSON-compatible dict
    """
    return json.loads(json.dumps(report, cls=NumpyJSONEncoder))


def write_report(report: Dict[str, Any], path: str) -> str:
    """
    Write a report as one JSON object.

    Args:
        report: Report dictionary
        path: Output file path; parent folders are created

    Returns:
        The path written
    """
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    try:
        with open(path, "w") as f:
            json.dump(report, f, cls=NumpyJSONEncoder, indent=2)
    except OSError as e:
        logger.error(f"Error writing report to {path}: {e}")
        raise
    logger.info(f"Report written to {path}")
    return path


def load_config_file(path: str) -> Dict[str, Any]:
    """Read an experiment configuration JSON file."""
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Error reading config {path}: {e}")
        raise ExperimentError(f"cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ExperimentError(f"config {path} must contain a JSON object")
    return data


def rng_streams(seed: int, names: Sequence[str], domain: str = "") -> Dict[str, np.random.Generator]:
    """
    Independent PCG64 generators, one per named stage.

    Streams are spawned in the order given from a SeedSequence keyed by the seed
    and a CRC of the domain; pipelines with different domains never share a
    stream, and a stage keeps its stream while the name list keeps its order.
    """
    root = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(domain.encode()),))
    children = root.spawn(len(names))
    return {name: np.random.Generator(np.random.PCG64(child)) for name, child in zip(names, children)}


def save_dataset_csv(path: str, features: np.ndarray, targets: np.ndarray,
                     feature_prefix: str = "x", target_prefix: str = "z") -> str:
    """Write one row per sample: feature columns, then target columns, with a header."""
    features = np.atleast_2d(np.asarray(features))
    targets = np.asarray(targets)
    if targets.ndim == 1:
        targets = targets[:, None]
    if features.shape[0] != targets.shape[0]:
        raise InvalidArgumentError("features and targets must have the same number of rows")
    columns = ([f"{feature_prefix}{i}" for i in range(features.shape[1])]
               + [f"{target_prefix}{i}" for i in range(targets.shape[1])])
    frame = pd.DataFrame(np.hstack([features, targets]), columns=columns)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Saved {frame.shape[0]} rows to {path}")
    return path


def load_dataset_csv(path: str, n_features: int, n_targets: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Read a dataset CSV with a header row.

    Args:
        path: CSV file
        n_features: Number of leading feature columns
        n_targets: Number of target columns after the features

    Returns:
        Tuple of (features (M, n_features), targets (M, n_targets))
    """
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        logger.error(f"Error loading dataset {path}: {e}")
        raise ExperimentError(f"cannot read dataset {path}: {e}") from e
    if frame.shape[1] != n_features + n_targets:
        raise ExperimentError(
            f"{path} has {frame.shape[1]} columns, expected {n_features} features + {n_targets} targets")
    values = frame.to_numpy(dtype=float)
    return values[:, :n_features], values[:, n_features:]


def write_curves_csv(path: str, curves: Dict[str, List[Tuple[float, float]]]) -> str:
    """Export percent-point curves in long format: curve, percent, log10_error."""
    rows = [(name, x, y) for name, curve in curves.items() for x, y in curve]
    frame = pd.DataFrame(rows, columns=["curve", "percent", "log10_error"])
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(curves)} curves to {path}")
    return path


def split_indices(rng: np.random.Generator, total: int, test_size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Random train/test split; returns (train, test) index arrays."""
    if not 0 < test_size < total:
        raise InvalidArgumentError(f"test size {test_size} must lie in (0, {total})")
    order = rng.permutation(total)
    return np.sort(order[test_size:]), np.sort(order[:test_size])


def noise_for_snr(rng: np.random.Generator, signal: np.ndarray, snr: Optional[float]) -> np.ndarray:
    """Gaussian noise rescaled so that 20 log10(|signal| / |noise|) equals snr exactly."""
    signal = np.asarray(signal, dtype=float)
    if snr is None or np.isinf(snr):
        return np.zeros_like(signal)
    noise = rng.standard_normal(signal.shape)
    return noise * np.linalg.norm(signal) / (np.linalg.norm(noise) * 10.0 ** (snr / 20.0))
