from .kernel import KernelParams, gram, kernel
from .model import (
    GprFitConfig,
    GprFitError,
    GprModel,
    deserialize,
    fit,
    fit_dataset,
    from_document,
    lml_gradient,
    log_marginal_likelihood,
    predict,
    predict_dataset,
    serialize,
    to_document,
)
from .sensitivity import RankedFeature, SensitivityRanking, rank_length_scales, sensitivity_rank
