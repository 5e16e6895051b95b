"""
Support estimation and the multiscale active classifier (MASC).

The classifier prunes the data to the support estimation set G_n(Theta), grows
eta-graphs, queries one modal point per new component, extends labels
cautiously, and completes the remaining points by k-nearest-neighbor vote.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.spatial.distance import pdist, squareform
from sklearn.neighbors import NearestNeighbors

from src.exceptions import InvalidArgumentError
from src.parallel import chunked_rows
from src.trigkernel import TrigKernel, psi_n

# Configure logging
logger = logging.getLogger(__name__)

ABSENT = -1


@dataclass
class MetricCloud:
    """M points given through their pairwise distance matrix, rescaled so the diameter is at most pi."""

    distances: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
            raise InvalidArgumentError("distances must be a non-empty square matrix")
        if not np.allclose(d, d.T) or np.any(np.diag(d) != 0.0):
            raise InvalidArgumentError("distances must be symmetric with a zero diagonal")
        self.distances = d

    @property
    def size(self) -> int:
        return self.distances.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.distances.max())


def euclidean_cloud(features) -> MetricCloud:
    """Euclidean distances rescaled by pi / diameter."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    d = squareform(pdist(features)) if features.shape[0] > 1 else np.zeros((1, 1))
    diameter = d.max()
    scale = np.pi / diameter if diameter > 0 else 1.0
    return MetricCloud(d * scale, scale)


def spherical_cloud(unit_vectors) -> MetricCloud:
    """Geodesic distances arccos(x . y) on the sphere; the diameter is pi already."""
    x = np.atleast_2d(np.asarray(unit_vectors, dtype=float))
    d = np.arccos(np.clip(x @ x.T, -1.0, 1.0))
    np.fill_diagonal(d, 0.0)
    d = (d + d.T) / 2.0
    return MetricCloud(d)


@dataclass
class MascConfig:
    """
    Hyperparameters of one MASC run.

    The seed breaks ties between equally scored query candidates and drives
    the random-query baseline that reports compare against.
    """

    n: int
    theta: float
    eta_start: float
    eta_step: float
    p: int = 1
    k_bar: int = 1
    seed: int = 0
    eta_end: Optional[float] = None

    def validate(self) -> None:
        if self.n < 1:
            raise InvalidArgumentError(f"kernel degree n must be >= 1, got {self.n}")
        if not 0.0 < self.theta <= 1.0:
            raise InvalidArgumentError(f"threshold theta must lie in (0, 1], got {self.theta}")
        if self.eta_start <= 0.0 or self.eta_step <= 0.0:
            raise InvalidArgumentError("eta_start and eta_step must be positive")
        if self.p < 1 or self.k_bar < 1:
            raise InvalidArgumentError("p and k_bar must be >= 1")
        if self.eta_end is not None and self.eta_end < self.eta_start:
            raise InvalidArgumentError("eta_end must not precede eta_start")


class Oracle:
    """Wraps the labeling function and counts the queries issued through it."""

    def __init__(self, query: Callable[[int], int]):
        self._query = query
        self._seen: Dict[int, int] = {}

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Oracle":
        labels = np.asarray(labels)
        return cls(lambda i: int(labels[i]))

    def __call__(self, index: int) -> int:
        index = int(index)
        if index not in self._seen:
            self._seen[index] = self._query(index)
        return self._seen[index]

    @property
    def calls(self) -> int:
        return len(self._seen)


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self, size: int):
        self.parent = np.arange(size)
        self.rank = np.zeros(size, dtype=int)

    def find(self, u: int) -> int:
        root = u
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[u] != root:
            self.parent[u], u = root, self.parent[u]
        return int(root)

    def union(self, u: int, v: int) -> None:
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return
        if self.rank[ru] < self.rank[rv]:
            ru, rv = rv, ru
        self.parent[rv] = ru
        if self.rank[ru] == self.rank[rv]:
            self.rank[ru] += 1

    def groups(self, members: Sequence[int]) -> List[List[int]]:
        """Partition members (local indices) into sets, ordered by smallest element."""
        buckets: Dict[int, List[int]] = {}
        for i in members:
            buckets.setdefault(self.find(i), []).append(i)
        return sorted((sorted(g) for g in buckets.values()), key=lambda g: g[0])


@dataclass
class MascState:
    """Mutable bookkeeping of one run; owned by a single worker."""

    members: np.ndarray
    labels: np.ndarray
    eta: float
    union_find: UnionFind
    ledger: List[Tuple[float, int, int]] = field(default_factory=list)

    @classmethod
    def start(cls, size: int, members: np.ndarray, eta: float) -> "MascState":
        flags = np.zeros(size, dtype=bool)
        flags[members] = True
        return cls(flags, np.full(size, ABSENT, dtype=int), eta, UnionFind(int(members.size)))

    @property
    def queried(self) -> Dict[int, int]:
        return {index: label for _, index, label in self.ledger}


def support_scores(cloud: MetricCloud, n: int, threads: Optional[int] = None) -> np.ndarray:
    """score_i = (1/M) sum_j Psi_n(rho(x_i, x_j))."""
    kernel = TrigKernel(n)

    def block(rows: slice) -> np.ndarray:
        return psi_n(kernel, cloud.distances[rows]).mean(axis=1)

    return chunked_rows(block, cloud.size, threads)


def threshold_set(scores, theta: float) -> np.ndarray:
    """Indices with score >= theta * max score; always contains the argmax."""
    if not 0.0 < theta <= 1.0:
        raise InvalidArgumentError(f"theta must lie in (0, 1], got {theta}")
    scores = np.asarray(scores, dtype=float)
    return np.flatnonzero(scores >= theta * scores.max())


def components_at_eta(cloud: MetricCloud, member_indices, eta: float, p: int = 1) -> List[List[int]]:
    """
    Connected components of the graph with edges rho < eta among the members.

    Returns lists of global indices with at least p elements, ordered by their
    smallest index.
    """
    if eta <= 0.0:
        raise InvalidArgumentError(f"eta must be positive, got {eta}")
    members = np.asarray(member_indices, dtype=int)
    uf = UnionFind(members.size)
    sub = cloud.distances[np.ix_(members, members)]
    for i, j in zip(*np.nonzero(np.triu(sub < eta, k=1))):
        uf.union(int(i), int(j))
    groups = uf.groups(range(members.size))
    return [members[g].tolist() for g in groups if len(g) >= p]


def knn_extend(cloud: MetricCloud, labeled_indices, labels, unlabeled_indices, k_bar: int) -> np.ndarray:
    """
    Label each unlabeled point by the modal label of its k_bar nearest labeled points.

    Ties go to the smallest label.
    """
    labeled_indices = np.asarray(labeled_indices, dtype=int)
    unlabeled_indices = np.asarray(unlabeled_indices, dtype=int)
    if labeled_indices.size == 0:
        raise InvalidArgumentError("knn_extend needs at least one labeled point")
    if unlabeled_indices.size == 0:
        return np.zeros(0, dtype=np.asarray(labels).dtype)
    classes, codes = np.unique(np.asarray(labels), return_inverse=True)
    k = min(k_bar, labeled_indices.size)

    finder = NearestNeighbors(n_neighbors=k, metric="precomputed")
    finder.fit(cloud.distances[np.ix_(labeled_indices, labeled_indices)])
    _, neighbors = finder.kneighbors(cloud.distances[np.ix_(unlabeled_indices, labeled_indices)])
    votes, _ = stats.mode(codes[neighbors], axis=1, keepdims=False)
    return classes[np.asarray(votes, dtype=int)]


def _complete(cloud: MetricCloud, labels: np.ndarray, k_bar: int) -> np.ndarray:
    labeled = np.flatnonzero(labels != ABSENT)
    missing = np.flatnonzero(labels == ABSENT)
    out = labels.copy()
    if missing.size:
        out[missing] = knn_extend(cloud, labeled, labels[labeled], missing, k_bar)
    return out


def _modal_point(component: np.ndarray, scores: np.ndarray, rng: np.random.Generator) -> int:
    """Highest-scoring point of a component; ties within rounding are drawn from rng."""
    values = scores[component]
    top = component[values >= values.max() * (1.0 - 1e-12)]
    if top.size == 1:
        return int(top[0])
    return int(rng.choice(top))


@dataclass
class LevelRecord:
    """Components handled at one eta level and the labels they left behind."""

    eta: float
    extended: List[np.ndarray]
    conflicted: List[np.ndarray]
    labels: np.ndarray


@dataclass
class MascResult:
    """Predicted labels, the (eta, index, label) query ledger, the per-eta history and level records."""

    labels: np.ndarray
    ledger: List[Tuple[float, int, int]]
    history: List[Dict[str, Any]]
    members: np.ndarray
    levels: List[LevelRecord] = field(default_factory=list)


def masc_run(cloud: MetricCloud, oracle: Oracle, cfg: MascConfig,
             truth: Optional[np.ndarray] = None, threads: Optional[int] = None) -> MascResult:
    """
    Run the multiscale active classifier.

    Args:
        cloud: Data as a metric cloud of diameter <= pi
        oracle: Labeling oracle
        cfg: Hyperparameters
        truth: Optional true labels; when given each history entry records the
            accuracy of a k-NN completed snapshot
        threads: Optional worker count for the score computation

    Returns:
        MascResult with every point labeled
    """
    cfg.validate()
    scores = support_scores(cloud, cfg.n, threads)
    members = threshold_set(scores, cfg.theta)
    logger.info(f"Support estimation kept {members.size} of {cloud.size} points (n={cfg.n}, theta={cfg.theta})")

    state = MascState.start(cloud.size, members, cfg.eta_start)
    sub = cloud.distances[np.ix_(members, members)]
    iu, ju = np.triu_indices(members.size, k=1)
    pair_dist = sub[iu, ju]
    order = np.argsort(pair_dist, kind="stable")
    next_edge = 0
    history: List[Dict[str, Any]] = []
    levels: List[LevelRecord] = []
    rng = np.random.default_rng(cfg.seed)

    while True:
        # grow the eta-graph incrementally; edges only ever get added
        while next_edge < order.size and pair_dist[order[next_edge]] < state.eta:
            e = order[next_edge]
            state.union_find.union(int(iu[e]), int(ju[e]))
            next_edge += 1
        groups = [g for g in state.union_find.groups(range(members.size)) if len(g) >= cfg.p]
        components = [members[g] for g in groups]

        extended: List[np.ndarray] = []
        conflicted: List[np.ndarray] = []
        queried = state.queried
        for comp in components:
            known = [(i, queried[i]) for i in comp if i in queried]
            if not known:
                pick = _modal_point(comp, scores, rng)
                label = oracle(pick)
                if label == ABSENT:
                    raise InvalidArgumentError(f"oracle returned the reserved label {ABSENT}")
                state.ledger.append((state.eta, pick, label))
                queried[pick] = label
                state.labels[comp] = label
                extended.append(comp)
            elif len({label for _, label in known}) == 1:
                state.labels[comp] = known[0][1]
                extended.append(comp)
            else:
                # conflicted: points keep whatever they already carry
                conflicted.append(comp)
        levels.append(LevelRecord(state.eta, extended, conflicted, state.labels.copy()))

        entry: Dict[str, Any] = {"eta": state.eta, "n_components": len(components),
                                 "n_queries": len(state.ledger), "n_labeled": len(extended),
                                 "n_conflicts": len(conflicted)}
        if truth is not None and len(state.ledger):
            entry["snapshot_accuracy"] = accuracy(_complete(cloud, state.labels, cfg.k_bar), truth)
        history.append(entry)
        logger.debug(f"eta={state.eta:.4f}: {len(components)} components, {len(state.ledger)} queries")

        unified = len(components) == 1 and components[0].size == members.size
        past_end = cfg.eta_end is not None and state.eta + cfg.eta_step > cfg.eta_end + 1e-12
        if unified or state.eta > cloud.diameter or past_end:
            break
        state.eta += cfg.eta_step

    if not state.ledger:
        # no component ever reached size p; fall back to the top-scoring point
        pick = _modal_point(members, scores, rng)
        state.ledger.append((state.eta, pick, oracle(pick)))
        state.labels[pick] = state.ledger[-1][2]
        logger.warning(f"No component of size >= {cfg.p} formed; queried the top-scoring point only")

    labels = _complete(cloud, state.labels, cfg.k_bar)
    logger.info(f"MASC finished at eta={state.eta:.4f} with {len(state.ledger)} queries")
    return MascResult(labels, state.ledger, history, members, levels)


def accuracy(predicted, truth) -> float:
    """Fraction of matching labels."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape or predicted.size == 0:
        raise InvalidArgumentError("accuracy needs two equal-length, non-empty label arrays")
    return float(np.mean(predicted == truth))


def f_score(predicted_clusters: Sequence[Sequence[int]], true_clusters: Sequence[Sequence[int]]) -> float:
    """
    Size-weighted F-score of predicted clusters against true classes.

    Each predicted cluster C scores 2 max_k |C & L_k| / (|C| + |L_k|).
    """
    if not predicted_clusters or not true_clusters:
        raise InvalidArgumentError("f_score needs non-empty partitions")
    truths = [set(t) for t in true_clusters]
    total = 0.0
    weight = 0
    for cluster in predicted_clusters:
        c = set(cluster)
        if not c:
            raise InvalidArgumentError("clusters must be non-empty")
        best = max(2.0 * len(c & t) / (len(c) + len(t)) for t in truths)
        total += len(c) * best
        weight += len(c)
    return total / weight


def partition(labels) -> List[List[int]]:
    """Group point indices by label."""
    labels = np.asarray(labels)
    return [np.flatnonzero(labels == value).tolist() for value in np.unique(labels)]


def accuracy_curve(history: List[Dict[str, Any]]) -> List[Tuple[int, float]]:
    """(queries, snapshot accuracy) per eta level, keeping the last entry per query count."""
    curve: Dict[int, float] = {}
    for entry in history:
        if "snapshot_accuracy" in entry:
            curve[entry["n_queries"]] = entry["snapshot_accuracy"]
    return sorted(curve.items())


def random_query_baseline(cloud: MetricCloud, oracle: Oracle, n_queries: int, k_bar: int,
                          seed: int) -> np.ndarray:
    """Query uniformly random points and complete the rest by k-NN vote."""
    if not 1 <= n_queries <= cloud.size:
        raise InvalidArgumentError(f"n_queries must lie in [1, {cloud.size}], got {n_queries}")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(cloud.size, size=n_queries, replace=False))
    labels = np.full(cloud.size, ABSENT, dtype=int)
    labels[picks] = [oracle(i) for i in picks]
    return _complete(cloud, labels, k_bar)
