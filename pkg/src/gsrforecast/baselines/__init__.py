from .angstrom import (
    AngstromFitError,
    AngstromModel,
    SolarGeometry,
    extraterrestrial,
    fit_angstrom,
    predict_angstrom,
    solar_geometry,
)
from .ann import AnnModel, ann_forward, ann_jacobian, ann_parameter_count, fit_ann_baseline, predict_ann_baseline, train_ann
