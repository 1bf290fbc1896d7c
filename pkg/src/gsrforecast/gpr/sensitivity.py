"""Feature relevance from fitted ARD length scales.

A short length scale means the response changes quickly along that feature,
so the ranking runs from the smallest fitted length scale to the largest.
Equal length scales keep their original column order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import GprFitConfig, GprModel, fit


class RankedFeature(NamedTuple):
    name: str
    index: int  # zero-based column index in the fitted design matrix
    length_scale: float
    log_length_scale: float


@dataclass(frozen=True)
class SensitivityRanking:
    features: tuple[RankedFeature, ...]
    model: GprModel | None = None

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def plot_series(self) -> list[tuple[int, str, float]]:
        """``(feature_index, feature_name, log_length_scale)`` rows in column order.

        ``feature_index`` is one-based, the way length scales are numbered on
        a length-scale-vs-number plot.
        """
        rows = sorted(self.features, key=lambda f: f.index)
        return [(f.index + 1, f.name, f.log_length_scale) for f in rows]

    def to_dict(self) -> dict:
        return {
            "ranking": [
                {
                    "rank": r + 1,
                    "feature": f.name,
                    "feature_index": f.index + 1,
                    "length_scale": f.length_scale,
                    "log_length_scale": f.log_length_scale,
                }
                for r, f in enumerate(self.features)
            ]
        }


def rank_length_scales(length_scales, names) -> SensitivityRanking:
    ls = [float(v) for v in np.atleast_1d(length_scales)]
    names = list(names)
    if len(ls) != len(names):
        raise ValueError(f"{len(ls)} length scales for {len(names)} feature names")
    order = sorted(range(len(ls)), key=lambda i: (ls[i], i))
    return SensitivityRanking(tuple(RankedFeature(names[i], i, ls[i], math.log(ls[i])) for i in order))


def sensitivity_rank(X_full, y, feature_names, cfg: GprFitConfig = GprFitConfig()) -> SensitivityRanking:
    """Fit an ARD kernel on every column of ``X_full`` and rank the columns.

    ``X_full`` should be standardized and ``y`` centred, so that length
    scales are comparable across features.
    """
    X_full = np.asarray(X_full, dtype=np.float64)
    if X_full.ndim != 2 or X_full.shape[1] < 2:
        raise ValueError("sensitivity ranking needs at least 2 feature columns")
    model = fit(X_full, y, "ard", cfg)
    ranking = rank_length_scales(model.params.length_scales, feature_names)
    return SensitivityRanking(ranking.features, model)
