"""Forecast accuracy measures and comparison tables.

Errors are ``pred - actual`` throughout, so a positive mean bias error means
the model overestimates.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

COMPARE_HEADER = ("model", "rmse", "mae", "mbe", "pearson_rho", "n")


class UndefinedCorrelationError(ValueError):
    """Pearson correlation requested for a constant vector or fewer than 2 points."""


def _pair(pred, actual) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.float64).ravel()
    a = np.asarray(actual, dtype=np.float64).ravel()
    if p.size != a.size:
        raise ValueError(f"length mismatch: {p.size} predictions, {a.size} observations")
    if p.size == 0:
        raise ValueError("metrics need at least one point")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(a))):
        raise ValueError("metrics need finite inputs")
    return p, a


def rmse(pred, actual) -> float:
    p, a = _pair(pred, actual)
    d = p - a
    scale = float(np.max(np.abs(d)))
    if scale == 0.0:
        return 0.0
    d = d / scale  # avoids underflow and overflow in the squares
    return scale * math.sqrt(float(d @ d) / d.size)


def mae(pred, actual) -> float:
    p, a = _pair(pred, actual)
    return float(np.mean(np.abs(p - a)))


def mbe(pred, actual) -> float:
    p, a = _pair(pred, actual)
    return float(np.sum(p - a)) / p.size


def pearson(pred, actual) -> float:
    p, a = _pair(pred, actual)
    if p.size < 2:
        raise UndefinedCorrelationError("correlation needs at least 2 points")
    dp = p - p.mean()
    da = a - a.mean()
    spp, saa = float(dp @ dp), float(da @ da)
    if spp == 0.0 or saa == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for a constant vector")
    rho = float(dp @ da) / math.sqrt(spp * saa)
    return min(1.0, max(-1.0, rho))


@dataclass(frozen=True)
class MetricsReport:
    model_label: str
    rmse: float
    mae: float
    mbe: float
    pearson_rho: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(pred, actual, label: str) -> MetricsReport:
    p, a = _pair(pred, actual)
    return MetricsReport(label, rmse(p, a), mae(p, a), mbe(p, a), pearson(p, a), int(p.size))


def compare(reports: Iterable[MetricsReport]) -> list[MetricsReport]:
    """Reports ordered by RMSE, ties broken by label."""
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to compare")
    return sorted(reports, key=lambda r: (r.rmse, r.model_label))


def _g6(v: float) -> str:
    return format(v, ".6g")


def comparison_csv(reports: Sequence[MetricsReport]) -> str:
    lines = [",".join(COMPARE_HEADER)]
    for r in compare(reports):
        lines.append(",".join([r.model_label, _g6(r.rmse), _g6(r.mae), _g6(r.mbe), _g6(r.pearson_rho), str(r.n)]))
    return "\n".join(lines) + "\n"
