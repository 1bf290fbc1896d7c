"""Single-hidden-layer perceptron baseline, 3 -> 10 tansig -> 1 linear.

Trained with the same Levenberg-Marquardt engine and standardization as
the branch network, so the two differ only in architecture.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import jsonio
from ..dataio import Dataset, Standardizer, fit_standardizer
from ..seeding import rng_for
from ..solarisnet.lm import TrainConfig, TrainingDivergedError, levenberg_marquardt
from ..solarisnet.network import Block, chain_backward, chain_forward

log = logging.getLogger(__name__)

DEFAULT_HIDDEN = 10
SCHEMA_VERSION = 1


def ann_blocks(n_inputs: int, hidden: int) -> list[Block]:
    h = Block("hidden", hidden, n_inputs, 0, "tansig")
    return [h, Block("output", 1, hidden, h.size, "linear")]


def ann_parameter_count(n_inputs: int = 3, hidden: int = DEFAULT_HIDDEN) -> int:
    return sum(b.size for b in ann_blocks(n_inputs, hidden))


def ann_init(n_inputs: int, hidden: int, rng: np.random.Generator) -> np.ndarray:
    params = np.empty(ann_parameter_count(n_inputs, hidden))
    for blk in ann_blocks(n_inputs, hidden):
        bound = 1.0 / np.sqrt(blk.n_in)
        params[blk.offset : blk.offset + blk.size] = rng.uniform(-bound, bound, blk.size)
    return params


def ann_forward(params, X, hidden: int = DEFAULT_HIDDEN) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return chain_forward(X, ann_blocks(X.shape[1], hidden), np.asarray(params, dtype=np.float64))[-1][:, 0]


def ann_jacobian(params, X, y, hidden: int = DEFAULT_HIDDEN) -> tuple[np.ndarray, np.ndarray]:
    params = np.asarray(params, dtype=np.float64)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    blocks = ann_blocks(X.shape[1], hidden)
    acts = chain_forward(X, blocks, params)
    e = acts[-1][:, 0] - np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(e)):
        raise TrainingDivergedError("non-finite network output")
    J = np.empty((X.shape[0], params.size))
    chain_backward(np.ones((X.shape[0], 1)), acts, blocks, params, J)
    return J, e


@dataclass(frozen=True)
class AnnModel:
    n_inputs: int
    hidden: int
    params: np.ndarray
    standardizer: Standardizer | None = None
    train_meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        params = np.array(self.params, dtype=np.float64)
        if params.shape != (ann_parameter_count(self.n_inputs, self.hidden),):
            raise ValueError(f"expected {ann_parameter_count(self.n_inputs, self.hidden)} parameters")
        if not np.all(np.isfinite(params)):
            raise ValueError("parameters must be finite")
        params.setflags(write=False)
        object.__setattr__(self, "params", params)


def train_ann(X, y, cfg: TrainConfig = TrainConfig(), hidden: int = DEFAULT_HIDDEN, standardizer=None) -> AnnModel:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    p0 = ann_init(X.shape[1], hidden, rng_for(cfg.seed, "ann-init"))
    state = levenberg_marquardt(
        p0,
        lambda p: ann_jacobian(p, X, y, hidden),
        lambda p: ann_forward(p, X, hidden) - y,
        cfg,
    )
    log.info("ann: %s after %d iterations, sse=%.6g", state.stop_reason, state.iteration, state.sse)
    meta = {
        "seed": cfg.seed,
        "iterations": state.iteration,
        "final_sse": state.sse,
        "stop_reason": state.stop_reason,
        "history": [list(h) for h in state.history],
    }
    return AnnModel(X.shape[1], hidden, state.params, standardizer, meta)


def fit_ann_baseline(train: Dataset, cfg: TrainConfig = TrainConfig(), hidden: int = DEFAULT_HIDDEN) -> AnnModel:
    std = fit_standardizer(train, train.feature_names[:3])
    X, y = std.apply(train)
    return train_ann(X, y, cfg, hidden, std)


def predict_ann_baseline(model: AnnModel, ds: Dataset) -> np.ndarray:
    if len(ds) == 0:
        return np.zeros(0)
    if model.standardizer is None:
        raise ValueError("model has no standardizer")
    X = model.standardizer.transform(ds)
    return ann_forward(model.params, X, model.hidden) + model.standardizer.target_mean


def to_document(model: AnnModel) -> dict:
    if model.standardizer is None:
        raise ValueError("only models with a standardizer can be serialized")
    meta = {k: v for k, v in model.train_meta.items() if k != "history"}
    return {
        "schema_version": SCHEMA_VERSION,
        "model_type": "ann",
        "n_inputs": model.n_inputs,
        "hidden": model.hidden,
        "params": [float(p) for p in model.params],
        "standardizer": model.standardizer.to_dict(),
        "train_meta": meta,
    }


def from_document(doc: dict) -> AnnModel:
    jsonio.check_header(doc, "ann", SCHEMA_VERSION)
    try:
        return AnnModel(
            int(doc["n_inputs"]),
            int(doc["hidden"]),
            np.array([float(p) for p in doc["params"]]),
            Standardizer.from_dict(doc["standardizer"]),
            dict(doc.get("train_meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise jsonio.DocumentError(f"invalid ann document: {exc}") from None
