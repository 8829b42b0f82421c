"""Detector contrast from angular scattered-power scans.

The model ``a (1 + r cos(2(phi + phi0)))`` is fitted through its linear form
``a + b cos 2phi + c sin 2phi``, which has a unique least-squares optimum.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import TextIO, Union

import numpy as np

from .states import _round_json

MIN_SAMPLES = 5


class SeriesFormatError(ValueError):
    pass


class ContrastFitWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AngularPowerSeries:
    angles_deg: np.ndarray
    power_mw: np.ndarray

    def __post_init__(self):
        ang = np.asarray(self.angles_deg, dtype=float)
        pw = np.asarray(self.power_mw, dtype=float)
        if ang.shape != pw.shape or ang.ndim != 1:
            raise ValueError("angles and powers must be 1-D of equal length")
        if len(ang) < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {len(ang)}")
        if not (np.all(np.isfinite(ang)) and np.all(np.isfinite(pw))):
            raise ValueError("non-finite sample")
        if np.any(pw < 0):
            raise ValueError("negative power")
        if np.any((ang < 0) | (ang >= 360)):
            raise ValueError("angles must lie in [0, 360) degrees")
        ang.setflags(write=False)
        pw.setflags(write=False)
        object.__setattr__(self, "angles_deg", ang)
        object.__setattr__(self, "power_mw", pw)

    @property
    def angles_rad(self) -> np.ndarray:
        return np.radians(self.angles_deg)

    def __len__(self) -> int:
        return len(self.angles_deg)


def load_series(src: Union[str, Path, TextIO]) -> AngularPowerSeries:
    """Read ``angle_deg,power_mw`` CSV from a path or an open text stream."""
    text = src.read() if hasattr(src, "read") else Path(src).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != ["angle_deg", "power_mw"]:
        raise SeriesFormatError("line 1: expected header angle_deg,power_mw")
    ang, pw = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise SeriesFormatError(f"line {lineno}: expected 2 fields, got {len(row)}")
        try:
            a, p = float(row[0]), float(row[1])
        except ValueError:
            raise SeriesFormatError(f"line {lineno}: non-numeric value in {row}") from None
        if p < 0:
            raise SeriesFormatError(f"line {lineno}: negative power {p}")
        ang.append(a)
        pw.append(p)
    try:
        return AngularPowerSeries(np.array(ang), np.array(pw))
    except ValueError as exc:
        raise SeriesFormatError(str(exc)) from None


@dataclass(frozen=True)
class FitResult:
    a: float
    r: float
    phi0: float
    sigma_r: float
    residual_rms: float
    clamped: bool = False

    def to_json(self) -> str:
        return json.dumps(_round_json(asdict(self)), indent=2, sort_keys=True) + "\n"

    def model(self, phi_rad):
        return self.a * (1.0 + self.r * np.cos(2.0 * (np.asarray(phi_rad) + self.phi0)))


def fit_contrast(series: AngularPowerSeries) -> FitResult:
    """Least-squares contrast fit with a statistical (residual-based) ``sigma_r``."""
    phi = series.angles_rad
    y = series.power_mw
    design = np.column_stack([np.ones_like(phi), np.cos(2 * phi), np.sin(2 * phi)])
    if np.linalg.matrix_rank(design) < 3:
        raise ValueError("angles do not determine the modulation (all congruent mod pi/2)")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    a, b, c = coef
    if a <= 0:
        raise ValueError(f"non-physical baseline a={a:.6g}")
    resid = y - design @ coef
    dof = len(y) - 3
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(design.T @ design)
    amp = np.hypot(b, c)
    if amp <= 1e-12 * a:
        # no resolvable modulation; phase is undefined and reported as 0
        amp = 0.0
    r = amp / a
    if amp > 0:
        grad = np.array([-r / a, b / (a * amp), c / (a * amp)])
        var_r = float(grad @ cov @ grad)
    else:
        var_r = float(cov[1, 1] + cov[2, 2]) / a**2
    phi0 = float(np.mod(0.5 * np.arctan2(-c, b), np.pi)) if amp > 0 else 0.0
    if phi0 >= np.pi:
        phi0 = 0.0
    clamped = False
    if r > 1.0:
        warnings.warn(f"fitted contrast {r:.6g} clamped to 1", ContrastFitWarning, stacklevel=2)
        r, clamped = 1.0, True
    return FitResult(float(a), float(r), phi0, float(np.sqrt(max(var_r, 0.0))),
                     float(np.sqrt(np.mean(resid**2))), clamped)


def synthetic_series(a: float, r: float, phi0: float, angles_deg, noise: float = 0.0,
                     seed: int | None = None) -> AngularPowerSeries:
    """Model powers at ``angles_deg`` with optional relative Gaussian noise."""
    ang = np.asarray(angles_deg, dtype=float)
    p = a * (1.0 + r * np.cos(2.0 * (np.radians(ang) + phi0)))
    if noise:
        rng = np.random.default_rng(seed)
        p = p * (1.0 + noise * rng.standard_normal(p.shape))
    return AngularPowerSeries(ang, np.clip(p, 0.0, None))


def series_to_csv(series: AngularPowerSeries) -> str:
    lines = ["angle_deg,power_mw"]
    lines += [f"{a:.12g},{p:.12g}" for a, p in zip(series.angles_deg, series.power_mw)]
    return "\n".join(lines) + "\n"


def fitted_curve_csv(result: FitResult, angles_deg) -> str:
    ang = np.asarray(angles_deg, dtype=float)
    lines = ["angle_deg,power_fit_mw"]
    lines += [f"{a:.12g},{p:.12g}" for a, p in zip(ang, result.model(np.radians(ang)))]
    return "\n".join(lines) + "\n"
