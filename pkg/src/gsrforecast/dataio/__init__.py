from .records import CORE_FEATURES, TARGET, DataError, Dataset, MeteoRecord
from .csvio import emit_csv, parse_csv, read_csv, write_csv
from .preprocess import (
    DEFAULT_DENOISE_WINDOW,
    SplitSpec,
    Standardizer,
    apply_standardizer,
    cumulate_daily,
    denoise_target,
    fit_standardizer,
    lowpass,
    mv_to_flux,
    split,
)
from .synth import PROFILES, generative_gsr, synth_generate

__all__ = [
    "CORE_FEATURES", "TARGET", "DataError", "Dataset", "MeteoRecord",
    "emit_csv", "parse_csv", "read_csv", "write_csv",
    "DEFAULT_DENOISE_WINDOW", "SplitSpec", "Standardizer", "apply_standardizer",
    "cumulate_daily", "denoise_target", "fit_standardizer", "lowpass", "mv_to_flux", "split",
    "PROFILES", "generative_gsr", "synth_generate",
]
