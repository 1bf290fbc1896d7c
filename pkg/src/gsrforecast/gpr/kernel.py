from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential hyperparameters.

    One length scale means an isotropic kernel; one per feature means ARD.
    """

    signal_variance: float
    length_scales: tuple[float, ...]
    noise_variance: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.length_scales, dtype=np.float64))
        object.__setattr__(self, "length_scales", tuple(float(v) for v in ls))
        values = (self.signal_variance, self.noise_variance) + self.length_scales
        if not all(np.isfinite(v) and v > 0 for v in values):
            raise ValueError(f"kernel hyperparameters must be positive and finite: {self}")

    @property
    def ard(self) -> bool:
        return len(self.length_scales) > 1

    def scales_for(self, dim: int) -> np.ndarray:
        ls = np.asarray(self.length_scales)
        if ls.size == 1:
            return np.full(dim, ls[0])
        if ls.size != dim:
            raise ValueError(f"{ls.size} length scales for {dim}-dimensional inputs")
        return ls

    def to_log(self) -> np.ndarray:
        return np.log(np.concatenate([[self.signal_variance], self.length_scales, [self.noise_variance]]))

    @classmethod
    def from_log(cls, theta) -> "KernelParams":
        theta = np.asarray(theta, dtype=np.float64)
        return cls(float(np.exp(theta[0])), tuple(np.exp(theta[1:-1])), float(np.exp(theta[-1])))


def kernel(x, x2, p: KernelParams) -> float:
    """``sf2 * exp(-sum_d (x_d - x2_d)^2 / (2 l_d^2))``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    x2 = np.atleast_1d(np.asarray(x2, dtype=np.float64))
    if x.shape != x2.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x2.shape}")
    ls = p.scales_for(x.size)
    return float(p.signal_variance * np.exp(-0.5 * np.sum(((x - x2) / ls) ** 2)))


def gram(X1, X2, p: KernelParams) -> np.ndarray:
    X1 = np.atleast_2d(np.asarray(X1, dtype=np.float64))
    X2 = np.atleast_2d(np.asarray(X2, dtype=np.float64))
    if X1.shape[1] != X2.shape[1]:
        raise ValueError(f"dimension mismatch: {X1.shape[1]} vs {X2.shape[1]} features")
    return p.signal_variance * np.exp(-0.5 * scaled_sqdist(X1, X2, p.scales_for(X1.shape[1])))


def sqdiff_per_feature(X1, X2) -> list[np.ndarray]:
    """``[(X1[:, d] - X2[:, d]^T)^2 for each feature d]``, exact and symmetric for X1 is X2."""
    return [np.subtract.outer(X1[:, d], X2[:, d]) ** 2 for d in range(X1.shape[1])]


def scaled_sqdist(X1, X2, ls) -> np.ndarray:
    out = np.zeros((X1.shape[0], X2.shape[0]))
    for d in range(X1.shape[1]):
        out += np.subtract.outer(X1[:, d] / ls[d], X2[:, d] / ls[d]) ** 2
    return out
