"""
Cognitive forgetting module: archive of finalized per-view representations
and their power-law weighted aggregate.
"""
import logging
import re
from pathlib import Path
from typing import List, Optional

import numpy as np

from data.view_io import export_view, load_view
from optimizer.exceptions import InvalidInput

logger = logging.getLogger(__name__)

_ARCHIVE_FILE = re.compile(r"z_(\d+)\.txt")


class MemoryStore:
    """Ordered archive Z_1..Z_{t-1} with forgetting rate lam"""

    def __init__(self, lam: float, n: Optional[int] = None, m: Optional[int] = None):
        if lam < 0:
            raise InvalidInput(f"forgetting rate must be nonnegative, got {lam}")
        self.lam = float(lam)
        self.n = n
        self.m = m
        self._archive: List[np.ndarray] = []

    def __len__(self):
        return len(self._archive)

    @property
    def archive(self) -> List[np.ndarray]:
        return [z.copy() for z in self._archive]

    def archive_view(self, z) -> "MemoryStore":
        z = np.asarray(z, dtype=float)
        if z.ndim != 2:
            raise InvalidInput(f"representation must be a matrix, got ndim={z.ndim}")
        if not np.all(np.isfinite(z)):
            raise InvalidInput("representation contains NaN or Inf entries")
        if self.n is None:
            self.n, self.m = z.shape
        elif z.shape != (self.n, self.m):
            raise InvalidInput(f"representation shape {z.shape} does not match store shape {(self.n, self.m)}")
        self._archive.append(z.copy())
        logger.debug(f"Archived view {len(self._archive)} representation {z.shape}")
        return self

    def forgetting_weights(self, t: int) -> np.ndarray:
        """w_i = (t - i)^-lam / sum_j (t - j)^-lam for i = 1..t-1"""
        if t < 2:
            raise InvalidInput(f"history weights need t >= 2, got t={t}")
        if len(self._archive) < t - 1:
            raise InvalidInput(f"archive holds {len(self._archive)} views, view {t} needs {t - 1}")
        age = t - np.arange(1, t, dtype=float)
        raw = age ** (-self.lam)
        return raw / raw.sum()

    def aggregate_history(self, t: int) -> np.ndarray:
        weights = self.forgetting_weights(t)
        stacked = np.stack(self._archive[: t - 1])
        return np.tensordot(weights, stacked, axes=1)

    def save(self, directory) -> List[Path]:
        """Write each archived Z_i as z_{i}.txt"""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for i, z in enumerate(self._archive, start=1):
            path = directory / f"z_{i}.txt"
            export_view(z, path)
            paths.append(path)
        logger.info(f"Saved {len(paths)} archived representations to {directory}")
        return paths

    @classmethod
    def load(cls, directory, lam: float) -> "MemoryStore":
        """Read z_1.txt .. z_N.txt back in order; other files are skipped"""
        directory = Path(directory)
        indexed = {}
        for path in directory.glob("z_*.txt"):
            match = _ARCHIVE_FILE.fullmatch(path.name)
            if match is None:
                logger.warning(f"Skipping {path.name}: not an archived representation")
                continue
            indexed[int(match.group(1))] = path
        if sorted(indexed) != list(range(1, len(indexed) + 1)):
            raise InvalidInput(f"archive in {directory} is not numbered 1..N: {sorted(indexed)}")

        store = cls(lam)
        for i in sorted(indexed):
            store.archive_view(load_view(indexed[i]))
        logger.info(f"Loaded {len(store)} archived representations from {directory}")
        return store
