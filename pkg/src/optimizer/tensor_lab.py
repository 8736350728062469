"""
Dense linear-algebra and two-slice tensor kernels used by the MemEvo solver.

The consolidation tensor always has exactly two frontal slices, so the DFT
along the third dimension reduces to a sum/difference pair and stays real.
The forward transform is unnormalized; the 1/2 factor sits on the inverse and
inside ``armr_norm``.
"""
from dataclasses import dataclass

import numpy as np

from optimizer.exceptions import InvalidInput

SCALAR_PROX_MAX_ITER = 50
SCALAR_PROX_TOL = 1e-10


@dataclass(frozen=True)
class PairTensor:
    """n x m x 2 tensor stored as its two frontal slices"""
    hist: np.ndarray
    cur: np.ndarray

    def __post_init__(self):
        if self.hist.ndim != 2 or self.hist.shape != self.cur.shape:
            raise InvalidInput(
                f"PairTensor slices must be matrices of equal shape, got {self.hist.shape} and {self.cur.shape}"
            )

    @classmethod
    def zeros(cls, n: int, m: int) -> "PairTensor":
        return cls(np.zeros((n, m)), np.zeros((n, m)))

    @property
    def shape(self):
        return self.hist.shape + (2,)

    def __add__(self, other: "PairTensor") -> "PairTensor":
        return PairTensor(self.hist + other.hist, self.cur + other.cur)

    def __sub__(self, other: "PairTensor") -> "PairTensor":
        return PairTensor(self.hist - other.hist, self.cur - other.cur)

    def scale(self, factor: float) -> "PairTensor":
        return PairTensor(factor * self.hist, factor * self.cur)

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.hist), initial=0.0), np.max(np.abs(self.cur), initial=0.0)))

    def frobenius_sq(self) -> float:
        return float(np.sum(self.hist ** 2) + np.sum(self.cur ** 2))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.hist)) and np.all(np.isfinite(self.cur)))


@dataclass(frozen=True)
class SpectrumSlice:
    """Thin SVD factors: a = left @ diag(values) @ right.T"""
    values: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.values) @ self.right.T


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise InvalidInput(f"{name} must be a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} contains NaN or Inf entries")
    return a


def thin_svd(a) -> SpectrumSlice:
    a = _as_matrix(a, "a")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return SpectrumSlice(values=s, left=u, right=vt.T)


def procrustes_min(target, carrier) -> np.ndarray:
    """
    Solve min ||target - carrier @ omega||_F^2 subject to omega @ omega.T = I.

    omega has shape (cols(carrier), cols(target)); the minimizer is U @ V.T
    from the thin SVD of carrier.T @ target.
    """
    target = _as_matrix(target, "target")
    carrier = _as_matrix(carrier, "carrier")
    if target.shape[0] != carrier.shape[0]:
        raise InvalidInput(f"row mismatch: target has {target.shape[0]} rows, carrier has {carrier.shape[0]}")
    if carrier.shape[1] > target.shape[1]:
        raise InvalidInput(
            f"carrier has {carrier.shape[1]} columns, more than the {target.shape[1]} columns of target"
        )
    spectrum = thin_svd(carrier.T @ target)
    return spectrum.left @ spectrum.right.T


def shrink_columns_21(c, threshold: float) -> np.ndarray:
    """Proximal operator of threshold * ||.||_{2,1} applied column-wise"""
    if threshold <= 0:
        raise InvalidInput(f"threshold must be positive, got {threshold}")
    c = np.asarray(c, dtype=float)
    norms = np.linalg.norm(c, axis=0)
    scale = np.zeros_like(norms)
    keep = norms > threshold
    scale[keep] = (norms[keep] - threshold) / norms[keep]
    return c * scale


def l21_norm(c) -> float:
    return float(np.sum(np.linalg.norm(c, axis=0)))


def dft2_forward(t: PairTensor) -> PairTensor:
    return PairTensor(t.hist + t.cur, t.hist - t.cur)


def dft2_inverse(t: PairTensor) -> PairTensor:
    return PairTensor((t.hist + t.cur) / 2.0, (t.hist - t.cur) / 2.0)


def armr_penalty(x):
    """(1 - e^-x) / (1 + e^-x), written as tanh(x / 2)"""
    return np.tanh(np.asarray(x, dtype=float) / 2.0)


def armr_penalty_grad(x):
    e = np.exp(-np.asarray(x, dtype=float))
    return 2.0 * e / (1.0 + e) ** 2


def armr_norm(t: PairTensor) -> float:
    freq = dft2_forward(t)
    total = 0.0
    for sl in (freq.hist, freq.cur):
        total += float(np.sum(armr_penalty(np.linalg.svd(sl, compute_uv=False))))
    return total / 2.0


def _scalar_prox_many(sigmas: np.ndarray, weight: float, max_iter: int, tol: float) -> np.ndarray:
    # DC iteration per entry; an entry stops moving once its own step drops below tol
    x = sigmas.astype(float).copy()
    active = np.ones(x.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        step = np.maximum(sigmas[active] - weight * armr_penalty_grad(x[active]), 0.0)
        moved = np.abs(step - x[active])
        x[active] = step
        idx = np.flatnonzero(active)
        active[idx[moved < tol]] = False
    return x


def armr_scalar_prox(sigma: float, weight: float, max_iter: int = SCALAR_PROX_MAX_ITER,
                     tol: float = SCALAR_PROX_TOL) -> float:
    """argmin_{x >= 0} 0.5 (x - sigma)^2 + weight * (1 - e^-x) / (1 + e^-x)"""
    if weight <= 0:
        raise InvalidInput(f"weight must be positive, got {weight}")
    if sigma < 0:
        raise InvalidInput(f"sigma must be nonnegative, got {sigma}")
    return float(_scalar_prox_many(np.array([sigma], dtype=float), weight, max_iter, tol)[0])


def armr_prox(t: PairTensor, weight: float, max_iter: int = SCALAR_PROX_MAX_ITER,
              tol: float = SCALAR_PROX_TOL) -> PairTensor:
    """argmin_M 0.5 ||M - t||_F^2 + weight * armr_norm(M), via per-slice singular value shrinkage"""
    if weight <= 0:
        raise InvalidInput(f"weight must be positive, got {weight}")
    freq = dft2_forward(t)
    slices = []
    for sl in (freq.hist, freq.cur):
        spectrum = thin_svd(sl)
        shrunk = _scalar_prox_many(spectrum.values, weight, max_iter, tol)
        slices.append((spectrum.left * shrunk) @ spectrum.right.T)
    return dft2_inverse(PairTensor(slices[0], slices[1]))
