from .activations import logsig, tansig
from .lm import HistoryEntry, LmState, TrainConfig, TrainingDivergedError, levenberg_marquardt, lm_step
from .model import (
    SolarisNetModel,
    deserialize,
    fit,
    from_document,
    predict,
    serialize,
    to_document,
    train,
    train_restarts,
)
from .network import NetworkSpec, forward, init_params, jacobian, layout, parameter_count

__all__ = [
    "logsig", "tansig",
    "HistoryEntry", "LmState", "TrainConfig", "TrainingDivergedError", "levenberg_marquardt", "lm_step",
    "SolarisNetModel", "deserialize", "fit", "from_document", "predict", "serialize",
    "to_document", "train", "train_restarts",
    "NetworkSpec", "forward", "init_params", "jacobian", "layout", "parameter_count",
]
