"""Seeded synthetic weather/GSR series matched to the two station profiles.

Each core feature is ``mean + A sin(2 pi (doy - phase) / 365.25) + noise``
with the variance split evenly between the seasonal and the noise part, so
sample moments over whole years approach the profile targets. The target is

    gsr = c0 + c1 * sunshine + c2 * tmax - c3 * tmin + eps,   eps ~ N(0, sigma_eps^2)

clipped to the profile's GSR range. ``c0`` is chosen so that the noiseless
target is centred on the middle of that range.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from ..seeding import rng_for
from .records import DataError, Dataset, MeteoRecord


@dataclass(frozen=True)
class Profile:
    name: str
    days: int
    tmax: tuple[float, float]  # (mean, variance)
    tmin: tuple[float, float]
    sunshine: tuple[float, float]
    gsr_range: tuple[float, float]
    latitude_degrees: float


PROFILES = {
    "ds1": Profile("ds1", 1461, (31.92, 4.49), (21.11, 6.30), (6.42, 3.11), (9.69, 25.70), 22.97),
    "ds2": Profile("ds2", 1064, (32.23, 4.41), (23.29, 5.08), (5.13, 2.98), (5.60, 23.50), 22.52),
}

# Day of year at which each feature's seasonal cycle peaks.
PEAK_DAY = {"tmax": 125.0, "tmin": 185.0, "sunshine": 65.0}
SEASONAL_SHARE = 0.5
DEFAULT_COEFFICIENTS = (1.5, 0.4, 0.3)  # c1 (sunshine), c2 (tmax), c3 (tmin)
DEFAULT_NOISE = 0.5
DEFAULT_START = dt.date(2001, 1, 1)
MIN_DIURNAL_RANGE = 0.5


def _daylight_hours(latitude_deg: float, doy: np.ndarray) -> np.ndarray:
    phi = math.radians(latitude_deg)
    decl = 0.409 * np.sin(2 * np.pi * doy / 365 - 1.39)
    ws = np.arccos(np.clip(-math.tan(phi) * np.tan(decl), -1.0, 1.0))
    return 24.0 * ws / np.pi


def synth_generate(
    profile: str = "ds1",
    days: int | None = None,
    seed: int = 0,
    noise: float = DEFAULT_NOISE,
    coefficients: tuple[float, float, float] = DEFAULT_COEFFICIENTS,
    extras: int = 0,
    start: dt.date = DEFAULT_START,
) -> Dataset:
    """Generate a synthetic dataset for ``profile`` ("ds1" or "ds2").

    ``extras`` adds that many nuisance features (``extra_1`` ...) that do not
    enter the target. Generation constants and the indices of clipped rows
    are stored in ``Dataset.metadata``.
    """
    try:
        prof = PROFILES[profile]
    except KeyError:
        raise ValueError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}") from None
    days = prof.days if days is None else int(days)
    if days < 2:
        raise DataError("synthetic datasets need at least 2 days")
    if noise < 0:
        raise ValueError("noise must be non-negative")

    rng = rng_for(seed, "synth")
    dates = [start + dt.timedelta(days=i) for i in range(days)]
    doy = np.array([d.timetuple().tm_yday for d in dates], dtype=np.float64)

    def seasonal(key: str, mean: float, var: float) -> np.ndarray:
        amp = math.sqrt(2.0 * SEASONAL_SHARE * var)
        sd = math.sqrt((1.0 - SEASONAL_SHARE) * var)
        phase = PEAK_DAY[key] - 365.25 / 4
        return mean + amp * np.sin(2 * np.pi * (doy - phase) / 365.25) + rng.normal(0.0, sd, days)

    tmax = seasonal("tmax", *prof.tmax)
    tmin = seasonal("tmin", *prof.tmin)
    sun = seasonal("sunshine", *prof.sunshine)
    extra_cols = [rng.normal(0.0, 1.0, days) for _ in range(extras)]
    eps = rng.normal(0.0, 1.0, days) * noise

    n_swapped = int(np.sum(tmin > tmax - MIN_DIURNAL_RANGE))
    tmin = np.minimum(tmin, tmax - MIN_DIURNAL_RANGE)
    sun = np.clip(sun, 0.0, _daylight_hours(prof.latitude_degrees, doy))

    c1, c2, c3 = coefficients
    lo, hi = prof.gsr_range
    c0 = 0.5 * (lo + hi) - (c1 * prof.sunshine[0] + c2 * prof.tmax[0] - c3 * prof.tmin[0])
    clean = c0 + c1 * sun + c2 * tmax - c3 * tmin
    raw = clean + eps
    gsr = np.clip(raw, lo, hi)
    clipped = np.flatnonzero(gsr != raw)

    names = [f"extra_{k + 1}" for k in range(extras)]
    records = []
    for i, d in enumerate(dates):
        ex = tuple((names[k], float(extra_cols[k][i])) for k in range(extras))
        records.append(MeteoRecord(d, float(tmax[i]), float(tmin[i]), float(sun[i]), ex, float(gsr[i])))

    sd = {k: float(v.std()) for k, v in (("sunshine_h", sun), ("tmax_c", tmax), ("tmin_c", tmin))}
    metadata = {
        "profile": prof.name,
        "seed": int(seed),
        "days": days,
        "start": start.isoformat(),
        "latitude_degrees": prof.latitude_degrees,
        "target_function": "gsr = c0 + c1*sunshine_h + c2*tmax_c - c3*tmin_c + eps",
        "coefficients": {"c0": c0, "c1": c1, "c2": c2, "c3": c3},
        "standardized_coefficients": {
            "sunshine_h": c1 * sd["sunshine_h"],
            "tmax_c": c2 * sd["tmax_c"],
            "tmin_c": c3 * sd["tmin_c"],
        },
        "sigma_eps": float(noise),
        "gsr_range": [lo, hi],
        "clipped_rows": clipped.tolist(),
        "tmin_adjusted_rows": n_swapped,
        "extras": names,
    }
    return Dataset(tuple(records), f"synth-{prof.name}", metadata)


def generative_gsr(ds: Dataset) -> np.ndarray:
    """Noiseless, unclipped target of a synthetic dataset from its metadata."""
    c = ds.metadata["coefficients"]
    x = ds.features(("sunshine_h", "tmax_c", "tmin_c"))
    return c["c0"] + c["c1"] * x[:, 0] + c["c2"] * x[:, 1] - c["c3"] * x[:, 2]
