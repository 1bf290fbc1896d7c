"""Angstrom-Prescott sunshine model.

``H / H0 = a + b * n / N`` where ``H0`` is the extraterrestrial radiation on
a horizontal surface and ``N`` the astronomical day length. Solar geometry
follows the usual FAO-56 formulas with a solar constant of
0.0820 MJ m^-2 min^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .. import jsonio
from ..dataio import Dataset

SOLAR_CONSTANT = 0.0820  # MJ m^-2 min^-1
SCHEMA_VERSION = 1


class AngstromFitError(ValueError):
    pass


class SolarGeometry(NamedTuple):
    day_of_year: int
    declination: float
    sunset_hour_angle: float
    inverse_relative_distance: float
    h0: float  # MJ m^-2 day^-1
    daylight_hours: float
    polar: bool  # True when the sunset hour angle had to be clamped


def declination(day_of_year) -> float:
    return 0.409 * math.sin(2.0 * math.pi * day_of_year / 365.0 - 1.39)


def inverse_relative_distance(day_of_year) -> float:
    return 1.0 + 0.033 * math.cos(2.0 * math.pi * day_of_year / 365.0)


def extraterrestrial(latitude: float, decl: float, dr: float) -> tuple[float, float, float, bool]:
    """``(ws, H0, N, polar)`` for latitude and declination in radians."""
    x = -math.tan(latitude) * math.tan(decl)
    polar = abs(x) > 1.0
    ws = math.acos(min(1.0, max(-1.0, x)))
    h0 = (24.0 * 60.0 / math.pi) * SOLAR_CONSTANT * dr * (
        ws * math.sin(latitude) * math.sin(decl) + math.cos(latitude) * math.cos(decl) * math.sin(ws)
    )
    return ws, max(h0, 0.0), 24.0 * ws / math.pi, polar


def solar_geometry(latitude: float, day_of_year: int) -> SolarGeometry:
    if not -math.pi / 2 <= latitude <= math.pi / 2:
        raise ValueError(f"latitude {latitude} rad outside [-pi/2, pi/2]")
    if not 1 <= day_of_year <= 366:
        raise ValueError(f"day of year {day_of_year} outside 1..366")
    decl = declination(day_of_year)
    dr = inverse_relative_distance(day_of_year)
    ws, h0, n, polar = extraterrestrial(latitude, decl, dr)
    return SolarGeometry(day_of_year, decl, ws, dr, h0, n, polar)


def _geometry_arrays(ds: Dataset, latitude: float) -> tuple[np.ndarray, np.ndarray]:
    geo = [solar_geometry(latitude, r.date.timetuple().tm_yday) for r in ds.records]
    return np.array([g.h0 for g in geo]), np.array([g.daylight_hours for g in geo])


@dataclass(frozen=True)
class AngstromModel:
    a: float
    b: float
    latitude: float  # radians

    def __post_init__(self):
        if not -math.pi / 2 <= self.latitude <= math.pi / 2:
            raise ValueError(f"latitude {self.latitude} rad outside [-pi/2, pi/2]")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("Angstrom coefficients must be finite")


def fit_angstrom(ds: Dataset, latitude: float) -> AngstromModel:
    """Ordinary least squares of ``gsr / H0`` on ``sunshine / N``."""
    if len(ds) < 2:
        raise AngstromFitError("need at least 2 records")
    h0, n_day = _geometry_arrays(ds, latitude)
    if np.any(h0 <= 0.0) or np.any(n_day <= 0.0):
        raise AngstromFitError("extraterrestrial radiation vanishes on some days (polar night)")
    x = np.array([r.sunshine for r in ds.records]) / n_day
    y = ds.target() / h0
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx <= 1e-12 * max(1.0, float(x @ x)):
        raise AngstromFitError("sunshine fraction is constant; slope is not identifiable")
    b = float(xc @ (y - y.mean())) / sxx
    a = float(y.mean() - b * x.mean())
    return AngstromModel(a, b, float(latitude))


def predict_angstrom(m: AngstromModel, ds: Dataset) -> np.ndarray:
    if len(ds) == 0:
        return np.zeros(0)
    h0, n_day = _geometry_arrays(ds, m.latitude)
    s = np.array([r.sunshine for r in ds.records])
    frac = np.divide(s, n_day, out=np.zeros_like(s), where=n_day > 0)
    return np.maximum(h0 * (m.a + m.b * frac), 0.0)


def to_document(m: AngstromModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "model_type": "angstrom",
        "a": m.a,
        "b": m.b,
        "latitude_degrees": math.degrees(m.latitude),
    }


def from_document(doc: dict) -> AngstromModel:
    jsonio.check_header(doc, "angstrom", SCHEMA_VERSION)
    try:
        return AngstromModel(float(doc["a"]), float(doc["b"]), math.radians(float(doc["latitude_degrees"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise jsonio.DocumentError(f"incomplete angstrom document: {exc}") from None
