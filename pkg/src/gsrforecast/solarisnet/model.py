from __future__ import annotations

import hashlib
import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .. import jsonio
from ..dataio import Dataset, Standardizer, fit_standardizer
from ..seeding import rng_for
from .lm import LmState, TrainConfig, levenberg_marquardt
from .network import NetworkSpec, forward, init_params, jacobian, parameter_count

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SolarisNetModel:
    spec: NetworkSpec
    params: np.ndarray
    standardizer: Standardizer | None = None
    train_meta: dict = field(default_factory=dict, compare=False)
    history: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        params = np.array(self.params, dtype=np.float64)
        if params.shape != (parameter_count(self.spec),):
            raise ValueError(f"expected {parameter_count(self.spec)} parameters, got {params.shape}")
        if not np.all(np.isfinite(params)):
            raise ValueError("parameters must be finite")
        params.setflags(write=False)
        object.__setattr__(self, "params", params)


def _fit_lm(spec: NetworkSpec, params0, X, y, cfg: TrainConfig) -> LmState:
    return levenberg_marquardt(
        params0,
        lambda p: jacobian(spec, p, X, y),
        lambda p: forward(spec, p, X) - y,
        cfg,
    )


def train(
    spec: NetworkSpec,
    X,
    y,
    cfg: TrainConfig = TrainConfig(),
    standardizer: Standardizer | None = None,
    params0=None,
) -> SolarisNetModel:
    """Fit the network to standardized features ``X`` and centred targets ``y``.

    The seed in ``cfg`` only drives the initial weights, so two calls with
    the same arguments give bit-identical parameters.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n_params = parameter_count(spec)
    if X.shape[0] < n_params / 2:
        warnings.warn(
            f"{X.shape[0]} training samples for {n_params} parameters; "
            f"at least {n_params // 2} are recommended",
            stacklevel=2,
        )
    if params0 is None:
        params0 = init_params(spec, rng_for(cfg.seed, "solarisnet-init"))
    state = _fit_lm(spec, params0, X, y, cfg)
    log.info("solarisnet: %s after %d iterations, sse=%.6g", state.stop_reason, state.iteration, state.sse)
    meta = {
        "seed": cfg.seed,
        "iterations": state.iteration,
        "final_sse": state.sse,
        "stop_reason": state.stop_reason,
        "config": _cfg_dict(cfg),
    }
    return SolarisNetModel(spec, state.params, standardizer, meta, state.history)


def train_restarts(
    spec: NetworkSpec,
    X,
    y,
    cfg: TrainConfig = TrainConfig(),
    restarts: int = 5,
    validation: tuple | None = None,
    standardizer: Standardizer | None = None,
) -> SolarisNetModel:
    """Train from ``restarts`` derived seeds and keep the lowest validation SSE.

    Without a validation pair the training SSE decides.
    """
    best, best_sse = None, np.inf
    seeds = rng_for(cfg.seed, "restarts").integers(0, 2**31 - 1, size=restarts)
    for s in seeds:
        m = train(spec, X, y, replace(cfg, seed=int(s)), standardizer)
        if validation is not None:
            Xv, yv = validation
            r = forward(spec, m.params, Xv) - np.asarray(yv)
            score = float(r @ r)
        else:
            score = m.train_meta["final_sse"]
        if score < best_sse:
            best, best_sse = m, score
    best.train_meta["restart_seeds"] = [int(s) for s in seeds]
    return best


def fit(train_ds: Dataset, cfg: TrainConfig = TrainConfig(), spec: NetworkSpec | None = None) -> SolarisNetModel:
    """Standardize on ``train_ds`` on the first ``spec.input_count`` features and train."""
    spec = spec or NetworkSpec()
    names = train_ds.feature_names[: spec.input_count]
    std = fit_standardizer(train_ds, names)
    X, y = std.apply(train_ds)
    return train(spec, X, y, cfg, std)


def predict(model: SolarisNetModel, ds: Dataset) -> np.ndarray:
    """GSR predictions in MJ m^-2 day^-1."""
    if len(ds) == 0:
        return np.zeros(0)
    if model.standardizer is None:
        raise ValueError("model has no standardizer; call forward() on standardized inputs")
    X = model.standardizer.transform(ds)
    return forward(model.spec, model.params, X) + model.standardizer.target_mean


def _cfg_dict(cfg: TrainConfig) -> dict:
    return {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}


def _checksum(params) -> str:
    text = ",".join(format(float(p), ".17g") for p in params)
    return hashlib.sha256(text.encode()).hexdigest()


def to_document(model: SolarisNetModel) -> dict:
    if model.standardizer is None:
        raise ValueError("only models with a standardizer can be serialized")
    return {
        "schema_version": SCHEMA_VERSION,
        "model_type": "solarisnet",
        "spec": model.spec.to_dict(),
        "param_count": int(model.params.size),
        "params": [float(p) for p in model.params],
        "checksum": _checksum(model.params),
        "standardizer": model.standardizer.to_dict(),
        "train_meta": dict(model.train_meta),
    }


def from_document(doc: dict) -> SolarisNetModel:
    jsonio.check_header(doc, "solarisnet", SCHEMA_VERSION)
    try:
        spec = NetworkSpec.from_dict(doc["spec"])
        params = [float(p) for p in doc["params"]]
        count = int(doc["param_count"])
        checksum = doc["checksum"]
        std = Standardizer.from_dict(doc["standardizer"])
    except (KeyError, TypeError, ValueError) as exc:
        raise jsonio.DocumentError(f"incomplete solarisnet document: {exc}") from None
    if count != len(params) or count != parameter_count(spec):
        raise jsonio.DocumentError(
            f"param_count {count} disagrees with {len(params)} stored parameters "
            f"(spec needs {parameter_count(spec)})"
        )
    if checksum != _checksum(params):
        raise jsonio.DocumentError("parameter checksum mismatch")
    return SolarisNetModel(spec, np.array(params), std, dict(doc.get("train_meta", {})))


def serialize(model: SolarisNetModel) -> str:
    return jsonio.dumps(to_document(model))


def deserialize(text: str) -> SolarisNetModel:
    return from_document(jsonio.loads(text))
