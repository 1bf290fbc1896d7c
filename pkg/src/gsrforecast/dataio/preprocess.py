from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .records import DataError, Dataset
from ..seeding import rng_for

SECONDS_PER_HOUR = 3600.0
DEFAULT_DENOISE_WINDOW = 3


def mv_to_flux(reading_mv: float, sensitivity_uv_per_wm2: float) -> float:
    """Pyranometer millivolt reading to W m^-2."""
    if not sensitivity_uv_per_wm2 > 0:
        raise ValueError("sensitivity must be positive")
    if reading_mv < 0:
        raise ValueError("reading must be non-negative")
    return reading_mv * 1000.0 / sensitivity_uv_per_wm2


def cumulate_daily(hourly_flux: Sequence[float]) -> float:
    """Integrate 24 hourly mean fluxes (W m^-2) to MJ m^-2 day^-1."""
    flux = np.asarray(hourly_flux, dtype=np.float64)
    if flux.shape != (24,):
        raise ValueError(f"need 24 hourly values, got {flux.size}")
    if np.any(flux < 0) or not np.all(np.isfinite(flux)):
        raise ValueError("hourly flux must be finite and non-negative")
    return float(flux.sum()) * SECONDS_PER_HOUR / 1e6


def lowpass(series: Sequence[float], window: int) -> np.ndarray:
    """Centered moving average with edge-replication padding."""
    x = np.asarray(series, dtype=np.float64)
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    if window > x.size:
        raise ValueError(f"window {window} exceeds series length {x.size}")
    if window == 1:
        return x.copy()
    half = window // 2
    padded = np.concatenate([np.full(half, x[0]), x, np.full(half, x[-1])])
    csum = np.concatenate([[0.0], np.cumsum(padded)])
    return (csum[window:] - csum[:-window]) / window


def denoise_target(ds: Dataset, window: int = DEFAULT_DENOISE_WINDOW) -> Dataset:
    """Low-pass filter the GSR series of a dataset."""
    smoothed = lowpass(ds.target(), window)
    out = ds.with_target(smoothed)
    out.metadata["denoise_window"] = window
    return out


@dataclass(frozen=True)
class Standardizer:
    """Z-score statistics from a training split (population standard deviation)."""

    feature_names: tuple[str, ...]
    means: tuple[float, ...]
    stddevs: tuple[float, ...]
    target_mean: float = 0.0

    def transform(self, ds: Dataset) -> np.ndarray:
        raw = ds.features(self.feature_names)
        return (raw - np.asarray(self.means)) / np.asarray(self.stddevs)

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z) * np.asarray(self.stddevs) + np.asarray(self.means)

    def apply(self, ds: Dataset) -> tuple[np.ndarray, np.ndarray | None]:
        """Standardized features and mean-removed target (``None`` without gsr)."""
        z = self.transform(ds)
        y = ds.target() - self.target_mean if ds.has_target else None
        return z, y

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "means": list(self.means),
            "stddevs": list(self.stddevs),
            "target_mean": self.target_mean,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(
            tuple(d["feature_names"]),
            tuple(float(v) for v in d["means"]),
            tuple(float(v) for v in d["stddevs"]),
            float(d["target_mean"]),
        )


def fit_standardizer(train: Dataset, feature_names: Sequence[str] | None = None) -> Standardizer:
    if len(train) < 2:
        raise DataError("standardizer needs at least 2 records")
    names = tuple(feature_names) if feature_names is not None else train.feature_names
    raw = train.features(names)
    means = raw.mean(axis=0)
    stds = raw.std(axis=0)
    for name, s in zip(names, stds):
        if not s > 0:
            raise DataError(f"feature {name!r} has zero variance in the training split")
    target_mean = float(train.target().mean()) if train.has_target else 0.0
    return Standardizer(names, tuple(map(float, means)), tuple(map(float, stds)), target_mean)


def apply_standardizer(s: Standardizer, ds: Dataset):
    return s.apply(ds)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    mode: str = "chronological"
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.mode not in ("chronological", "seeded-random"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if self.mode == "seeded-random" and self.seed is None:
            raise ValueError("seeded-random split needs a seed")


def split(ds: Dataset, spec: SplitSpec = SplitSpec()) -> tuple[Dataset, Dataset]:
    n = len(ds)
    n_train = math.floor(spec.train_fraction * n)
    if n_train < 1 or n - n_train < 1:
        raise DataError(f"split of {n} records at {spec.train_fraction} leaves an empty side")
    if spec.mode == "chronological":
        train_idx = range(n_train)
    else:
        perm = rng_for(spec.seed, "split").permutation(n)
        train_idx = perm[:n_train].tolist()
    train_set = set(train_idx)
    test_idx = [i for i in range(n) if i not in train_set]
    return (
        ds.subset(train_idx, f"{ds.name}-train"),
        ds.subset(test_idx, f"{ds.name}-test"),
    )

