import logging

import numpy as np
import pytest

from data.datagen import SynthSpec


@pytest.fixture(autouse=True)
def quiet_logging():
    logging.getLogger().setLevel(logging.WARNING)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def row_orthonormal(rng, rows: int, cols: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((cols, rows)))
    return q.T


@pytest.fixture
def planted_view(rng):
    """Exact rank-4 view X = Z* A* with A* row-orthonormal"""
    z_true = rng.standard_normal((60, 4))
    a_true = row_orthonormal(rng, 4, 15)
    return z_true @ a_true, z_true, a_true


@pytest.fixture
def small_spec():
    return SynthSpec(n=90, k=3, latent_dim_true=3, view_dims=[8, 10, 9], noise_sigma=[0.1, 0.1, 0.1],
                     cluster_separation=6.0, seed=7)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("MEMEVO_DATABASE_URL", "MEMEVO_OUTPUT_DIR", "MEMEVO_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
