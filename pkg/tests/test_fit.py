import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rocent.fit import (AngularPowerSeries, ContrastFitWarning, SeriesFormatError, fit_contrast, fitted_curve_csv,
                        load_series, series_to_csv, synthetic_series)

ANGLES = np.arange(0, 360, 5)


def test_load_series(tmp_path):
    s = synthetic_series(2.0, 0.5, 0.1, np.arange(0, 360, 10))
    p = tmp_path / "s.csv"
    p.write_text(series_to_csv(s))
    before = p.read_bytes()
    back = load_series(p)
    assert len(back) == 36
    assert np.allclose(back.power_mw, s.power_mw)
    assert p.read_bytes() == before
    assert len(load_series(io.StringIO(series_to_csv(s)))) == 36


@pytest.mark.parametrize("text,msg", [
    ("angle_deg,power_mw\n0,1\n10,1\n", "at least 5"),
    ("angle_deg,power_mw\n0,1\n10,1\n20,abc\n30,1\n40,1\n", "line 4"),
    ("angle_deg,power_mw\n0,1\n10,-1\n20,1\n30,1\n40,1\n", "line 3"),
    ("angle,power\n0,1\n", "line 1"),
])
def test_load_series_errors(text, msg):
    with pytest.raises(SeriesFormatError, match=msg):
        load_series(io.StringIO(text))


def test_series_validation():
    with pytest.raises(ValueError):
        AngularPowerSeries(np.arange(5.0), np.array([1, 1, 1, np.inf, 1]))
    with pytest.raises(ValueError):
        AngularPowerSeries(np.array([0, 10, 20, 30, 400.0]), np.ones(5))


@pytest.mark.parametrize("r", [0.704, 0.610])
def test_noiseless_roundtrip(r):
    res = fit_contrast(synthetic_series(1.0, r, 0.3, ANGLES))
    assert abs(res.r - r) < 1e-10
    assert abs(res.phi0 - 0.3) < 1e-10
    assert abs(res.a - 1.0) < 1e-10


def test_noisy_roundtrip():
    res = fit_contrast(synthetic_series(1.0, 0.610, 0.3, ANGLES, noise=0.01, seed=7))
    assert abs(res.r - 0.610) < 0.01
    assert res.sigma_r > 0


def test_constant_series_has_zero_contrast():
    res = fit_contrast(AngularPowerSeries(ANGLES.astype(float), np.full(len(ANGLES), 3.0)))
    assert res.r == pytest.approx(0.0, abs=1e-14) and res.phi0 == 0.0


def test_fit_errors():
    with pytest.raises(ValueError, match="congruent"):
        fit_contrast(AngularPowerSeries(np.array([0, 90, 180, 270, 0.0]), np.array([1, 2, 1, 2, 1.0])))
    with pytest.raises(ValueError, match="baseline"):
        fit_contrast(AngularPowerSeries(ANGLES.astype(float), np.zeros(len(ANGLES))))


def test_overmodulated_data_is_clamped():
    phi = np.radians(ANGLES)
    p = np.clip(1 + 1.3 * np.cos(2 * phi), 0, None)
    with pytest.warns(ContrastFitWarning):
        res = fit_contrast(AngularPowerSeries(ANGLES.astype(float), p))
    assert res.r == 1.0 and res.clamped


@settings(max_examples=100)
@given(st.floats(0.1, 10), st.floats(0, 1), st.floats(0, np.pi - 1e-6))
def test_roundtrip_property(a, r, phi0):
    res = fit_contrast(synthetic_series(a, r, phi0, ANGLES))
    assert abs(res.a - a) < 1e-9 * max(1, a)
    assert abs(res.r - r) < 1e-9
    if r > 1e-6:
        d = abs(res.phi0 - phi0)
        assert min(d, np.pi - d) < 1e-9 / r


@settings(max_examples=50)
@given(st.floats(0.2, 0.9), st.floats(0, np.pi - 1e-6), st.floats(0, np.pi))
def test_shift_equivariance(r, phi0, delta):
    ang = np.arange(0, 180, 7.5)
    base = fit_contrast(synthetic_series(1.0, r, phi0, ang))
    shifted_angles = np.mod(ang + np.degrees(delta), 360)
    p = synthetic_series(1.0, r, phi0, ang).power_mw
    moved = fit_contrast(AngularPowerSeries(shifted_angles, p))
    assert abs(moved.a - base.a) < 1e-9 and abs(moved.r - base.r) < 1e-9
    d = np.mod(moved.phi0 - (base.phi0 - delta), np.pi)
    assert min(d, np.pi - d) < 1e-9


def test_sigma_scales_with_sqrt_n():
    sig = []
    for reps in (1, 4, 16):
        ang = np.tile(ANGLES, reps)
        sig.append(np.mean([fit_contrast(synthetic_series(1.0, 0.6, 0.2, ang, noise=0.01, seed=s)).sigma_r
                            for s in range(20)]))
    for k, ratio in ((1, 2.0), (2, 4.0)):
        assert abs(sig[0] / sig[k] / ratio - 1) < 0.2


def test_outputs():
    res = fit_contrast(synthetic_series(1.0, 0.704, 0.3, ANGLES))
    d = json.loads(res.to_json())
    assert set(d) == {"a", "r", "phi0", "sigma_r", "residual_rms", "clamped"}
    lines = fitted_curve_csv(res, [0, 90]).splitlines()
    assert lines[0] == "angle_deg,power_fit_mw" and len(lines) == 3
