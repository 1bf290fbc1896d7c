"""Model-family dispatch shared by the command-line tools.

Every family (``solarisnet``, ``gpr``, ``ann``, ``angstrom``) goes through
the same steps: split, optional target denoising, fit on the training side
only, then predict and evaluate. Model documents carry a ``pipeline``
section recording how the training data was derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from . import gpr, jsonio, solarisnet
from .baselines import angstrom, ann
from .dataio import Dataset, SplitSpec, denoise_target, split
from .solarisnet import TrainConfig

FAMILIES = ("solarisnet", "gpr", "ann", "angstrom")
ABSENT_FAMILIES = ("svr",)


class FitFailure(RuntimeError):
    """A model could not be fitted; carries the family name."""

    def __init__(self, family: str, message: str):
        self.family = family
        super().__init__(f"{family}: {message}")


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    train_fraction: float = 0.8
    split_mode: str = "chronological"
    denoise_window: int | None = None
    lm: TrainConfig = field(default_factory=TrainConfig)
    gp: gpr.GprFitConfig = field(default_factory=gpr.GprFitConfig)
    kernel: str = "ard"
    ann_hidden: int = ann.DEFAULT_HIDDEN
    latitude_degrees: float | None = None

    def __post_init__(self):
        # one seed drives every stage
        object.__setattr__(self, "lm", replace(self.lm, seed=self.seed))
        object.__setattr__(self, "gp", replace(self.gp, seed=self.seed))

    @property
    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_fraction, self.split_mode, self.seed)

    def describe(self) -> dict:
        return {
            "seed": self.seed,
            "train_fraction": self.train_fraction,
            "split_mode": self.split_mode,
            "denoise_window": self.denoise_window,
        }


@dataclass(frozen=True)
class Fitted:
    family: str
    model: Any
    log_header: tuple[str, ...] = ()
    log_rows: tuple[tuple, ...] = ()


def prepare(ds: Dataset, cfg: PipelineConfig) -> tuple[Dataset, Dataset]:
    """Split, then low-pass each side separately so no holdout value leaks into training."""
    train, test = split(ds, cfg.split_spec)
    if cfg.denoise_window:
        train = denoise_target(train, cfg.denoise_window)
        if len(test) >= cfg.denoise_window:
            test = denoise_target(test, cfg.denoise_window)
    return train, test


def fit_family(family: str, train: Dataset, cfg: PipelineConfig) -> Fitted:
    try:
        if family == "solarisnet":
            m = solarisnet.fit(train, cfg.lm)
            return Fitted(family, m, ("iteration", "sse", "mu", "accepted"), tuple(m.history))
        if family == "ann":
            m = ann.fit_ann_baseline(train, cfg.lm, cfg.ann_hidden)
            return Fitted(family, m, ("iteration", "sse", "mu", "accepted"), tuple(map(tuple, m.train_meta["history"])))
        if family == "gpr":
            m = gpr.fit_dataset(train, cfg.kernel, cfg.gp)
            return Fitted(family, m, ("iteration", "lml", "step_size"), tuple(m.fit_meta["trace"]))
        if family == "angstrom":
            if cfg.latitude_degrees is None:
                raise ValueError("the angstrom model needs a latitude")
            m = angstrom.fit_angstrom(train, math.radians(cfg.latitude_degrees))
            r = angstrom.predict_angstrom(m, train) - train.target()
            return Fitted(family, m, ("iteration", "sse"), ((1, float(r @ r)),))
    except (ArithmeticError, np.linalg.LinAlgError, gpr.GprFitError, angstrom.AngstromFitError) as exc:
        raise FitFailure(family, str(exc)) from exc
    raise ValueError(f"unknown model family {family!r}; expected one of {FAMILIES}")


def family_of(model) -> str:
    if isinstance(model, solarisnet.SolarisNetModel):
        return "solarisnet"
    if isinstance(model, gpr.GprModel):
        return "gpr"
    if isinstance(model, ann.AnnModel):
        return "ann"
    if isinstance(model, angstrom.AngstromModel):
        return "angstrom"
    raise TypeError(f"not a model: {type(model).__name__}")


def predict(model, ds: Dataset) -> np.ndarray:
    family = family_of(model)
    if family == "solarisnet":
        return solarisnet.predict(model, ds)
    if family == "gpr":
        return gpr.predict_dataset(model, ds)
    if family == "ann":
        return ann.predict_ann_baseline(model, ds)
    return angstrom.predict_angstrom(model, ds)


_WRITERS = {
    "solarisnet": solarisnet.to_document,
    "gpr": gpr.to_document,
    "ann": ann.to_document,
    "angstrom": angstrom.to_document,
}
_READERS = {
    "solarisnet": solarisnet.from_document,
    "gpr": gpr.from_document,
    "ann": ann.from_document,
    "angstrom": angstrom.from_document,
}


def to_document(model, pipeline: dict | None = None) -> dict:
    doc = _WRITERS[family_of(model)](model)
    if pipeline is not None:
        doc["pipeline"] = dict(pipeline)
    return doc


def from_document(doc: dict):
    kind = doc.get("model_type")
    if kind not in _READERS:
        raise jsonio.DocumentError(f"unknown model_type {kind!r}")
    return _READERS[kind](doc)


def dumps(model, pipeline: dict | None = None) -> str:
    return jsonio.dumps(to_document(model, pipeline))


def loads(text: str):
    doc = jsonio.loads(text)
    return from_document(doc), doc
