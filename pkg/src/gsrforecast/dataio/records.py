from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

CORE_FEATURES = ("tmax_c", "tmin_c", "sunshine_h")
TARGET = "gsr_mj_m2_day"


class DataError(ValueError):
    """Invalid meteorological data. ``row`` is the 1-based file line when known."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


@dataclass(frozen=True)
class MeteoRecord:
    """One day of weather observations.

    ``extras`` holds additional named features as ``(name, value)`` pairs so
    records stay hashable; ``gsr`` is ``None`` for prediction-only data.
    """

    date: dt.date
    tmax: float
    tmin: float
    sunshine: float
    extras: tuple[tuple[str, float], ...] = ()
    gsr: float | None = None

    def __post_init__(self):
        for name in ("tmax", "tmin", "sunshine"):
            if not np.isfinite(getattr(self, name)):
                raise DataError(f"{name} is not finite")
        if self.tmax < self.tmin:
            raise DataError(f"tmax ({self.tmax}) < tmin ({self.tmin})")
        if not 0.0 <= self.sunshine <= 24.0:
            raise DataError(f"sunshine {self.sunshine} outside [0, 24] hours")
        if self.gsr is not None and not (np.isfinite(self.gsr) and self.gsr > 0):
            raise DataError(f"gsr must be positive, got {self.gsr}")

    def feature(self, name: str) -> float:
        if name == "tmax_c":
            return self.tmax
        if name == "tmin_c":
            return self.tmin
        if name == "sunshine_h":
            return self.sunshine
        for key, value in self.extras:
            if key == name:
                return value
        raise KeyError(name)


@dataclass(frozen=True)
class Dataset:
    records: tuple[MeteoRecord, ...]
    name: str = "dataset"
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        for i in range(1, len(self.records)):
            if self.records[i].date <= self.records[i - 1].date:
                raise DataError(
                    f"dates must be strictly increasing ({self.records[i].date} "
                    f"after {self.records[i - 1].date})"
                )
        if self.records:
            names = self.extra_names
            for r in self.records:
                if tuple(k for k, _ in r.extras) != names:
                    raise DataError(f"record {r.date} has inconsistent extra features")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def extra_names(self) -> tuple[str, ...]:
        if not self.records:
            return ()
        return tuple(k for k, _ in self.records[0].extras)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return CORE_FEATURES + self.extra_names

    @property
    def has_target(self) -> bool:
        return bool(self.records) and all(r.gsr is not None for r in self.records)

    @property
    def dates(self) -> list[dt.date]:
        return [r.date for r in self.records]

    def features(self, names: Sequence[str] | None = None) -> np.ndarray:
        """Raw feature matrix, one row per record."""
        names = self.feature_names if names is None else tuple(names)
        if not self.records:
            return np.zeros((0, len(names)))
        try:
            return np.array([[r.feature(n) for n in names] for r in self.records], dtype=np.float64)
        except KeyError as exc:
            raise DataError(f"missing feature {exc.args[0]!r}") from None

    def target(self) -> np.ndarray:
        if not self.has_target and self.records:
            raise DataError(f"dataset {self.name!r} has no gsr target")
        return np.array([r.gsr for r in self.records], dtype=np.float64)

    def subset(self, indices: Iterable[int], name: str | None = None) -> "Dataset":
        recs = [self.records[i] for i in sorted(indices)]
        return Dataset(tuple(recs), name or self.name, dict(self.metadata))

    def with_target(self, gsr: Sequence[float]) -> "Dataset":
        if len(gsr) != len(self.records):
            raise DataError("target length does not match dataset")
        recs = tuple(replace(r, gsr=float(g)) for r, g in zip(self.records, gsr))
        return Dataset(recs, self.name, dict(self.metadata))
