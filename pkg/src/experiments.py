"""
Experiment pipelines behind the command line: configuration, dispatch and reports.
"""

import logging
import time
from dataclasses import asdict, dataclass, fields
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.data_utils import (load_dataset_csv, rng_streams, serialize_report, split_indices,
                            write_curves_csv, write_report)
from src.exceptions import ExperimentError, UndefinedPointError
from src.generators import (gen_biexp, gen_circle_ellipse, gen_darcy, gen_ellipse_regression,
                            gen_measure_separation, gen_two_moons)
from src.masc import (MascConfig, Oracle, accuracy, accuracy_curve, euclidean_cloud, f_score,
                      masc_run, partition, random_query_baseline)
from src.sphere_regress import (EstimatorConfig, SphericalDataset, combined_error, density_estimate_batch,
                                ellipse_exact_density, f_n_estimate_batch, percent_point_curve, rms_error)
from src.transfer import (JacobiDataSpace, JointJacobiSpace, lift, local_lift_experiment,
                          polynomial_preservation_constant, single_space_smooth)
from src.trigkernel import (AtomicMeasure, TrigKernel, detect_peaks, empirical_sigma, peak_grid,
                            sigma_point_sources)

# Configure logging
logger = logging.getLogger(__name__)

EXPERIMENTS = ("pointsource", "ellipse", "biexp", "darcy", "masc", "transfer")

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "pointsource": {"n_values": [64, 256], "threshold": 0.08,
                    "measure": [[-1.0, 5.0], [2.0, 30.0], [2.05, 20.0]], "separation_n": 128},
    "ellipse": {"q": 1, "M": 1 << 13, "test_size": 1 << 11, "n_values": [8, 16, 32],
                "snr_values": [None], "exact_density": False},
    "biexp": {"q": 2, "M": 1 << 13, "test_size": 1 << 11, "n_values": [32], "snr_values": [None],
              "q_values": []},
    "darcy": {"q": 2, "M": 1 << 13, "test_size": 1 << 11, "n_values": [64], "snr_values": [None]},
    "masc": {"dataset": "circle_ellipse", "n": 32, "theta": 0.12, "eta_start": 0.006, "eta_step": 0.005,
             "eta_end": 0.036, "p": 15, "k_bar": 5, "n_per_class": 1000, "noise_sd": 0.05},
    "transfer": {"alpha1": -0.5, "beta1": -0.5, "alpha2": -0.5, "beta2": -0.5, "n": 32, "n0": 4,
                 "center": np.pi / 2, "radius": np.pi / 4, "degrees": [8, 16, 32, 64]},
}


@dataclass
class ExperimentConfig:
    """One experiment run; keys of a JSON config file mirror these fields."""

    name: str
    seed: int
    n: Optional[int] = None
    q: Optional[int] = None
    M: Optional[int] = None
    test_size: Optional[int] = None
    snr: Optional[float] = None
    n_values: Optional[List[int]] = None
    snr_values: Optional[List[Optional[float]]] = None
    q_values: Optional[List[int]] = None
    exact_density: Optional[bool] = None
    threshold: Optional[float] = None
    measure: Optional[List[List[float]]] = None
    separation_n: Optional[int] = None
    dataset: Optional[str] = None
    n_per_class: Optional[int] = None
    noise_sd: Optional[float] = None
    theta: Optional[float] = None
    eta_start: Optional[float] = None
    eta_step: Optional[float] = None
    eta_end: Optional[float] = None
    p: Optional[int] = None
    k_bar: Optional[int] = None
    alpha1: Optional[float] = None
    beta1: Optional[float] = None
    alpha2: Optional[float] = None
    beta2: Optional[float] = None
    n0: Optional[float] = None
    center: Optional[float] = None
    radius: Optional[float] = None
    degrees: Optional[List[float]] = None
    data_csv: Optional[str] = None
    n_features: Optional[int] = None
    out: Optional[str] = None
    csv_out: Optional[str] = None
    threads: Optional[int] = None

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ExperimentError(f"unknown experiment '{self.name}', expected one of {', '.join(EXPERIMENTS)}")
        if self.seed is None:
            raise ExperimentError("a seed is required")
        # a single n or snr stands in for the corresponding sweep
        if self.n is not None and self.n_values is None:
            self.n_values = [self.n]
        if self.snr is not None and self.snr_values is None:
            self.snr_values = [self.snr]
        for key, value in DEFAULTS[self.name].items():
            if getattr(self, key) is None:
                setattr(self, key, list(value) if isinstance(value, list) else value)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ExperimentError(f"unknown config keys: {', '.join(unknown)}")
        if "name" not in data or "seed" not in data:
            raise ExperimentError("config needs 'name' and 'seed'")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class RunReport:
    """Echoed config, per-experiment metrics and wall-clock seconds."""

    config: Dict[str, Any]
    metrics: Dict[str, Any]
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return serialize_report({"config": self.config, "metrics": self.metrics, "seconds": self.seconds})


def _curve_arrays(curve: List[Tuple[float, float]]) -> Dict[str, List[float]]:
    return {"percent": [x for x, _ in curve], "log10_error": [y for _, y in curve]}


def _positive(errors: np.ndarray) -> np.ndarray:
    # exact zeros have no logarithm; floor them at the smallest normal float
    return np.maximum(np.asarray(errors, dtype=float), np.finfo(float).tiny)


def run_pointsource(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Peak detection for a point-source measure, plus the measure-separation illustration."""
    measure = AtomicMeasure.from_pairs([tuple(pair) for pair in cfg.measure])
    peaks = {}
    for n in cfg.n_values:
        kernel = TrigKernel(n)
        grid = peak_grid(kernel)
        values = sigma_point_sources(measure, kernel, grid, cfg.threads)
        found = detect_peaks(grid, values, cfg.threshold, kernel)
        peaks[str(n)] = {"locations": [loc for loc, _ in found], "amplitudes": [amp for _, amp in found]}
        logger.info(f"n={n}: {len(found)} peaks")

    samples = gen_measure_separation(cfg.seed)
    kernel = TrigKernel(cfg.separation_n)
    grid = peak_grid(kernel)
    sigma = empirical_sigma(samples, kernel, grid, cfg.threads)
    separation = detect_peaks(grid, sigma, 0.25, kernel)
    return {"peaks": peaks,
            "separation": {"n": cfg.separation_n, "peak_locations": [loc for loc, _ in separation],
                           "max_sigma": float(sigma.max()), "min_sigma": float(sigma.min())}}


def _estimate(training: SphericalDataset, est_cfg: EstimatorConfig, probes: np.ndarray,
              threads: Optional[int], density: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    F_n at the probes, skipping probes where the normalized estimate is undefined.

    Returns:
        Tuple of (estimates (N, d), boolean mask of defined probes)
    """
    try:
        est = f_n_estimate_batch(training, est_cfg, probes, threads, density)
        return est, np.ones(est.shape[0], dtype=bool)
    except UndefinedPointError:
        pass
    numer = f_n_estimate_batch(training, EstimatorConfig(est_cfg.n, est_cfg.q, normalize=False), probes, threads)
    denom = density_estimate_batch(training, est_cfg, probes, threads) if density is None else np.asarray(density)
    defined = denom > 0.0
    est = np.full_like(numer, np.nan)
    est[defined] = numer[defined] / denom[defined, None]
    logger.warning(f"n={est_cfg.n}: estimate undefined at {int((~defined).sum())} of {defined.size} probes; "
                   f"they are left out of the error statistics")
    return est, defined


def _split(cfg: ExperimentConfig, total: int) -> Tuple[np.ndarray, np.ndarray]:
    rng = rng_streams(cfg.seed, ["split"], f"{cfg.name}-split")["split"]
    return split_indices(rng, total, cfg.test_size)


def run_ellipse(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Regression of the ellipse function; errors near and away from the singular angles."""
    curves = {}
    summary = []
    for snr in cfg.snr_values:
        data = gen_ellipse_regression(cfg.seed, cfg.M + cfg.test_size, snr)
        train, test = _split(cfg, cfg.M + cfg.test_size)
        training = SphericalDataset(data.dataset.points[train], data.dataset.targets[train])
        probes = data.dataset.points[test]
        theta = data.params[test]
        truth = data.clean[test]
        density = ellipse_exact_density(theta) if cfg.exact_density else None
        dist = np.minimum(np.abs(theta - np.pi / 2), np.abs(theta + np.pi / 2))
        for n in cfg.n_values:
            est, ok = _estimate(training, EstimatorConfig(n, cfg.q), probes, cfg.threads, density)
            est = est[ok, 0]
            errors = _positive(np.abs(est - truth[ok]))
            far, near = dist[ok] > 0.3, dist[ok] < 0.05
            label = f"n={n},snr={snr}"
            curves[label] = percent_point_curve(errors)
            summary.append({"n": n, "snr": snr, "median_error": float(np.median(errors)),
                            "mean_far": float(errors[far].mean()) if np.any(far) else None,
                            "mean_near": float(errors[near].mean()) if np.any(near) else None,
                            "rms": rms_error(truth[ok], est), "undefined_probes": int((~ok).sum())})
    return {"curves": {k: _curve_arrays(v) for k, v in curves.items()}, "summary": summary,
            "_curves": curves}


def _parameter_regression(cfg: ExperimentConfig, generate: Callable) -> Dict[str, Any]:
    curves = {}
    summary = []
    train, test = _split(cfg, cfg.M + cfg.test_size)
    for snr in cfg.snr_values:
        data = generate(cfg.seed, cfg.M + cfg.test_size, snr)
        training = SphericalDataset(data.dataset.points[train], data.dataset.targets[train])
        probes = data.dataset.points[test]
        truth = data.params[test]
        for n in cfg.n_values:
            est, ok = _estimate(training, EstimatorConfig(n, cfg.q), probes, cfg.threads)
            errors = _positive([combined_error(t, e) for t, e in zip(truth[ok], est[ok])])
            label = f"n={n},snr={snr}"
            curves[label] = percent_point_curve(errors)
            summary.append({"n": n, "snr": snr, "median_combined_error": float(np.median(errors)),
                            "rms": rms_error(truth[ok], est[ok]), "undefined_probes": int((~ok).sum())})
    return {"curves": {k: _curve_arrays(v) for k, v in curves.items()}, "summary": summary, "_curves": curves}


def run_biexp(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Bi-exponential parameter recovery, with an optional RMS-versus-q sweep."""
    metrics = _parameter_regression(cfg, gen_biexp)
    if cfg.q_values:
        data = gen_biexp(cfg.seed, cfg.M + cfg.test_size, None)
        train, test = _split(cfg, cfg.M + cfg.test_size)
        training = SphericalDataset(data.dataset.points[train], data.dataset.targets[train])
        n = cfg.n_values[-1]
        sweep = []
        for q in cfg.q_values:
            est, ok = _estimate(training, EstimatorConfig(n, q), data.dataset.points[test], cfg.threads)
            sweep.append({"q": q, "rms": rms_error(data.params[test][ok], est[ok]),
                          "undefined_probes": int((~ok).sum())})
        metrics["q_sweep"] = sweep
    return metrics


def run_darcy(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Darcy-flow parameter recovery from noisy profiles."""
    return _parameter_regression(cfg, gen_darcy)


def _masc_data(cfg: ExperimentConfig):
    if cfg.data_csv:
        if not cfg.n_features:
            raise ExperimentError("n_features is required with data_csv")
        features, labels = load_dataset_csv(cfg.data_csv, cfg.n_features, 1)
        return features, labels[:, 0].astype(int)
    if cfg.dataset == "circle_ellipse":
        data = gen_circle_ellipse(cfg.seed, cfg.n_per_class, cfg.noise_sd)
    elif cfg.dataset == "two_moons":
        data = gen_two_moons(cfg.seed, 2 * cfg.n_per_class, cfg.noise_sd)
    else:
        raise ExperimentError(f"unknown masc dataset '{cfg.dataset}'")
    return data.features, data.labels


def run_masc(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Active classification with MASC, compared with random queries."""
    features, labels = _masc_data(cfg)
    cloud = euclidean_cloud(features)
    masc_cfg = MascConfig(n=cfg.n, theta=cfg.theta, eta_start=cfg.eta_start, eta_step=cfg.eta_step,
                          p=cfg.p, k_bar=cfg.k_bar, seed=cfg.seed, eta_end=cfg.eta_end)
    oracle = Oracle.from_labels(labels)
    result = masc_run(cloud, oracle, masc_cfg, truth=labels, threads=cfg.threads)
    baseline = random_query_baseline(cloud, Oracle.from_labels(labels), len(result.ledger), masc_cfg.k_bar,
                                     masc_cfg.seed)
    return {"accuracy": accuracy(result.labels, labels),
            "f_score": f_score(partition(result.labels), partition(labels)),
            "n_queries": len(result.ledger),
            "queries": [list(q) for q in result.ledger],
            "support_size": int(result.members.size),
            "per_eta": result.history,
            "accuracy_curve": accuracy_curve(result.history),
            "random_baseline_accuracy": accuracy(baseline, labels)}


def run_transfer(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Connection matrix, lifting against single-space smoothing, preservation and local lifting."""
    space1 = JacobiDataSpace(cfg.alpha1, cfg.beta1)
    space2 = JacobiDataSpace(cfg.alpha2, cfg.beta2)
    top = max([cfg.n] + list(cfg.degrees))
    joint = JointJacobiSpace(space1, space2, top)

    def f(theta):
        return np.exp(np.cos(theta))

    grid = np.linspace(0.0, np.pi, 129)
    metrics: Dict[str, Any] = {"a": joint.a, "b": joint.b, "matrix_size": joint.size}
    off_band = np.where(joint.band_mask, 0.0, np.abs(joint.matrix))
    metrics["off_band_ratio"] = float(off_band.max() / np.abs(joint.matrix).max())
    if joint.a == 0 and joint.b == 0:
        metrics["identity_deviation"] = float(np.max(np.abs(joint.matrix - np.eye(joint.size))))
        lifted = lift(joint, f, cfg.n, grid)
        smoothed = single_space_smooth(space2, f, cfg.n / np.sqrt(2.0), grid)
        metrics["lift_vs_smooth"] = float(np.max(np.abs(lifted - smoothed)))
    c_star = polynomial_preservation_constant(joint, cfg.n0)
    metrics["c_star"] = c_star
    metrics["local_lift"] = local_lift_experiment(joint, f, cfg.center, cfg.radius, cfg.degrees)
    return metrics


RUNNERS: Dict[str, Callable[[ExperimentConfig], Dict[str, Any]]] = {
    "pointsource": run_pointsource,
    "ellipse": run_ellipse,
    "biexp": run_biexp,
    "darcy": run_darcy,
    "masc": run_masc,
    "transfer": run_transfer,
}


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """
    Run one experiment, then write its report and optional curve CSV.

    Args:
        cfg: The experiment configuration

    Returns:
        The RunReport
    """
    logger.info(f"Running experiment '{cfg.name}' with seed {cfg.seed}")
    start = time.perf_counter()
    metrics = RUNNERS[cfg.name](cfg)
    seconds = time.perf_counter() - start
    curves = metrics.pop("_curves", None)
    report = RunReport(cfg.to_dict(), metrics, seconds)
    if cfg.out:
        write_report(report.to_dict(), cfg.out)
    if cfg.csv_out:
        if curves is None:
            logger.warning(f"Experiment '{cfg.name}' produces no percent-point curves; skipping CSV export")
        else:
            write_curves_csv(cfg.csv_out, curves)
    logger.info(f"Experiment '{cfg.name}' finished in {seconds:.2f}s")
    return report
