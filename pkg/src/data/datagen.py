"""
Synthetic multi-view streams: k Gaussian clusters planted in a shared latent
space, each view a seeded row-orthonormal projection of it plus noise.

Cluster centers sit at pairwise distance cluster_separation and samples scatter
tightly around them, so most of the confusion in a single view comes from its
own noise. noise_sigma is measured in units of the center-to-boundary margin
(cluster_separation / 2); independent view noise is what later views average out.
"""
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from data.view_io import export_labels, export_view
from optimizer.exceptions import InvalidInput

logger = logging.getLogger(__name__)

# within-cluster standard deviation in the latent space
CLUSTER_SPREAD = 0.6


@dataclass
class SynthSpec:
    n: int = 300
    k: int = 3
    latent_dim_true: int = 5
    view_dims: List[int] = field(default_factory=lambda: [20, 30, 25, 40])
    noise_sigma: List[float] = field(default_factory=lambda: [0.3, 0.3, 0.3, 0.3])
    cluster_separation: float = 4.0
    seed: int = 0

    def validate(self):
        if self.n < 1 or self.k < 1 or self.latent_dim_true < 1:
            raise InvalidInput("n, k and latent_dim_true must be positive")
        if self.k > self.n:
            raise InvalidInput(f"k={self.k} exceeds n={self.n}")
        if not self.view_dims:
            raise InvalidInput("at least one view dimension is required")
        if len(self.noise_sigma) != len(self.view_dims):
            raise InvalidInput(
                f"noise_sigma has {len(self.noise_sigma)} entries for {len(self.view_dims)} views"
            )
        if any(d < self.latent_dim_true for d in self.view_dims):
            raise InvalidInput(f"every view dimension must be >= latent_dim_true={self.latent_dim_true}")
        if any(s < 0 for s in self.noise_sigma):
            raise InvalidInput("noise_sigma entries must be nonnegative")
        if self.cluster_separation <= 0:
            raise InvalidInput("cluster_separation must be positive")

    def to_dict(self):
        return asdict(self)


def planted_centers(k: int, dim: int, separation: float, rng: np.random.Generator) -> np.ndarray:
    """
    k centers at pairwise distance separation: scaled orthonormal directions
    while k <= dim, otherwise Gaussian directions with that expected distance.
    """
    if k <= dim:
        q, _ = np.linalg.qr(rng.standard_normal((dim, k)))
        return (separation / np.sqrt(2.0)) * q.T
    return (separation / np.sqrt(2.0 * dim)) * rng.standard_normal((k, dim))


def generate_stream(spec: SynthSpec) -> Tuple[List[np.ndarray], np.ndarray]:
    """Return the views in arrival order and the shared label vector"""
    spec.validate()
    rng = np.random.default_rng(spec.seed)

    labels = np.arange(spec.n) % spec.k
    rng.shuffle(labels)
    centers = planted_centers(spec.k, spec.latent_dim_true, spec.cluster_separation, rng)
    latent = centers[labels] + CLUSTER_SPREAD * rng.standard_normal((spec.n, spec.latent_dim_true))

    margin = spec.cluster_separation / 2.0
    views = []
    for d_t, sigma in zip(spec.view_dims, spec.noise_sigma):
        q, _ = np.linalg.qr(rng.standard_normal((d_t, spec.latent_dim_true)))
        view = latent @ q.T
        if sigma > 0:
            view = view + sigma * margin * rng.standard_normal((spec.n, d_t))
        views.append(view)
    logger.debug(f"Generated {len(views)} views for n={spec.n}, k={spec.k}")
    return views, labels


def stale_early_view(spec: SynthSpec, factor: float = 3.0) -> SynthSpec:
    """
    Raise the noise of the first half of the views by factor. At the default
    factor the early views stay informative but clearly worse than the late ones.
    """
    if factor < 1:
        raise InvalidInput(f"stale factor must be at least 1, got {factor}")
    n_stale = len(spec.noise_sigma) // 2
    sigma = [s * factor if i < n_stale else s for i, s in enumerate(spec.noise_sigma)]
    return replace(spec, noise_sigma=sigma, view_dims=list(spec.view_dims))


def generate_scaling_series(base: SynthSpec, sizes: Sequence[int]):
    """One stream per sample count; everything but n is shared"""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise InvalidInput(f"sizes must be ascending, got {sizes}")
    return [generate_stream(replace(base, n=size, view_dims=list(base.view_dims),
                                    noise_sigma=list(base.noise_sigma))) for size in sizes]


def export_stream(views: Sequence[np.ndarray], labels, directory) -> List[Path]:
    """Write view_{t}.txt files and labels.txt in the CLI ingest format"""
    directory = Path(directory)
    paths = [export_view(view, directory / f"view_{t}.txt") for t, view in enumerate(views, start=1)]
    export_labels(labels, directory / "labels.txt")
    logger.info(f"Exported {len(paths)} views to {directory}")
    return paths
