"""
k-means on the final representation and the three external clustering
metrics (ACC under optimal matching, NMI, ARI).
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import kmeans_plusplus
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score

from optimizer.exceptions import InvalidInput

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 10
LLOYD_MAX_ITER = 300
LLOYD_TOL = 1e-6


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    wcss: float
    wcss_trace: List[float] = field(default_factory=list)
    iterations: int = 0


@dataclass
class MetricsReport:
    """Per-restart metric values and their means"""
    acc: List[float]
    nmi: List[float]
    ari: List[float]

    @property
    def acc_mean(self) -> float:
        return float(np.mean(self.acc))

    @property
    def nmi_mean(self) -> float:
        return float(np.mean(self.nmi))

    @property
    def ari_mean(self) -> float:
        return float(np.mean(self.ari))

    def to_dict(self) -> Dict:
        return {
            'acc': self.acc_mean,
            'nmi': self.nmi_mean,
            'ari': self.ari_mean,
            'per_restart': {'acc': list(self.acc), 'nmi': list(self.nmi), 'ari': list(self.ari)},
        }


def _assign(z: np.ndarray, centers: np.ndarray):
    dist = ((z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(dist, axis=1)
    return labels, float(dist[np.arange(z.shape[0]), labels].sum())


def _lloyd(z: np.ndarray, centers: np.ndarray, max_iter: int, tol: float) -> KMeansResult:
    trace = []
    labels, wcss = _assign(z, centers)
    trace.append(wcss)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new_centers = centers.copy()
        for c in range(centers.shape[0]):
            members = labels == c
            # an emptied cluster keeps its previous center
            if members.any():
                new_centers[c] = z[members].mean(axis=0)
        shift = float(np.max(np.abs(new_centers - centers)))
        centers = new_centers
        labels, wcss = _assign(z, centers)
        trace.append(wcss)
        if shift < tol:
            break
    return KMeansResult(labels=labels, centers=centers, wcss=wcss, wcss_trace=trace, iterations=iterations)


def kmeans(z, k: int, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
           max_iter: int = LLOYD_MAX_ITER, tol: float = LLOYD_TOL) -> List[KMeansResult]:
    """k-means++ seeded Lloyd iterations, one independent run per restart"""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    if k < 2:
        raise InvalidInput(f"k must be at least 2, got {k}")
    if k > n:
        raise InvalidInput(f"k={k} exceeds the number of samples n={n}")
    if restarts < 1:
        raise InvalidInput(f"restarts must be positive, got {restarts}")

    results = []
    for r in range(restarts):
        centers, _ = kmeans_plusplus(z, n_clusters=k, random_state=seed + r)
        results.append(_lloyd(z, centers, max_iter, tol))
    logger.debug(f"k-means: {restarts} restarts, WCSS {[round(res.wcss, 4) for res in results]}")
    return results


def _check_pair(pred, truth):
    pred = np.asarray(pred).astype(int)
    truth = np.asarray(truth).astype(int)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise InvalidInput(f"label vectors differ in shape: {pred.shape} vs {truth.shape}")
    return pred, truth


def accuracy(pred, truth) -> float:
    """Best accuracy over one-to-one cluster-to-class assignments (Hungarian)"""
    pred, truth = _check_pair(pred, truth)
    if pred.size == 0:
        return 0.0
    _, pred_ids = np.unique(pred, return_inverse=True)
    _, truth_ids = np.unique(truth, return_inverse=True)
    size = max(pred_ids.max(), truth_ids.max()) + 1
    w = np.zeros((size, size), dtype=np.int64)
    np.add.at(w, (pred_ids, truth_ids), 1)
    rows, cols = linear_sum_assignment(-w)
    return float(w[rows, cols].sum()) / pred.size


def nmi(pred, truth) -> float:
    pred, truth = _check_pair(pred, truth)
    value = normalized_mutual_info_score(truth, pred, average_method="arithmetic")
    return float(np.clip(value, 0.0, 1.0))


def ari(pred, truth) -> float:
    pred, truth = _check_pair(pred, truth)
    return float(np.clip(adjusted_rand_score(truth, pred), -1.0, 1.0))


def evaluate_labelings(labelings: Sequence, truth) -> MetricsReport:
    return MetricsReport(
        acc=[accuracy(labels, truth) for labels in labelings],
        nmi=[nmi(labels, truth) for labels in labelings],
        ari=[ari(labels, truth) for labels in labelings],
    )


def evaluate_embedding(z, truth, k: int, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> MetricsReport:
    """Cluster z with k-means restarts and score every restart against truth"""
    results = kmeans(z, k, restarts=restarts, seed=seed)
    return evaluate_labelings([res.labels for res in results], truth)


def best_restart(results: List[KMeansResult]) -> KMeansResult:
    return min(results, key=lambda res: res.wcss)

