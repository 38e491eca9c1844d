import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hapticact.calibration import (
    FINGERS,
    DutyParams,
    FingerCurve,
    ForceCalibration,
    GaugeSample,
    UnderdeterminedFitError,
    default_calibration_path,
    fit_calibration,
    force_to_duty,
    load_calibration,
    motor_to_force,
    read_gauge_csv,
    write_gauge_csv,
)

THUMB = FingerCurve(2.25e-9, -5.28e-6, 8.03e-3, 3.23e-1)


def test_thumb_at_zero_is_constant_term():
    calib = ForceCalibration.default()
    assert motor_to_force(calib, "thumb", 0.0) == pytest.approx(0.323, rel=1e-9)


def test_thumb_at_1000():
    # 2.25e-9*1e9 - 5.28e-6*1e6 + 8.03e-3*1e3 + 0.323 = 5.323, checked externally
    calib = ForceCalibration.default()
    assert motor_to_force(calib, "thumb", 1000.0) == pytest.approx(5.323, rel=1e-9)


def test_negative_constant_term_clamps_to_zero():
    calib = ForceCalibration.default()
    assert motor_to_force(calib, "index", 0.0) == 0.0
    assert motor_to_force(calib, "middle", 0.0) == 0.0


def test_unknown_finger_rejected():
    calib = ForceCalibration.default()
    with pytest.raises(ValueError, match="unknown finger"):
        motor_to_force(calib, "palm", 100.0)


def test_negative_motor_value_rejected():
    calib = ForceCalibration.default()
    with pytest.raises(ValueError):
        motor_to_force(calib, "thumb", -1.0)


@given(
    finger=st.sampled_from(FINGERS),
    v=st.floats(min_value=0.0, max_value=2000.0, allow_nan=False),
)
def test_force_never_negative(finger, v):
    calib = ForceCalibration.default()
    assert motor_to_force(calib, finger, v) >= 0.0


# --- fitting -------------------------------------------------------------

def _samples_from_curve(curve, finger, motor_values):
    return [
        GaugeSample(finger, float(v), max(0.0, curve(float(v))))
        for v in motor_values
    ]


def _full_sample_set(motor_values):
    calib = ForceCalibration.default()
    out = []
    for f in FINGERS:
        out.extend(_samples_from_curve(calib.curve(f), f, motor_values))
    return out


def test_noiseless_fit_recovers_thumb_coefficients():
    vs = np.linspace(100, 2000, 20)
    fitted = fit_calibration(_full_sample_set(vs))
    got = fitted.curve("thumb")
    for name in ("a", "b", "c", "d"):
        assert getattr(got, name) == pytest.approx(getattr(THUMB, name), rel=1e-6)


# The thumb cubic is strictly increasing and positive over 0..2000; scaled
# copies stay positive, so clamping never distorts the generated samples.
# (Several shipped curves dip negative over the motor range, where a gauge
# would read 0 and the samples would no longer lie on the cubic.)
_POSITIVE_CURVES = ForceCalibration(
    tuple(
        FingerCurve(2.25e-9 * s, -5.28e-6 * s, 8.03e-3 * s, 3.23e-1 * s)
        for s in (1.0, 0.8, 1.2, 0.9, 1.1)
    )
)


def test_noiseless_fit_reproduces_predictions():
    vs = np.linspace(100, 2000, 20)
    samples = []
    for f in FINGERS:
        samples.extend(_samples_from_curve(_POSITIVE_CURVES.curve(f), f, vs))
    fitted = fit_calibration(samples)
    for f in FINGERS:
        for v in np.linspace(100, 2000, 57):
            assert fitted.curve(f)(v) == pytest.approx(_POSITIVE_CURVES.curve(f)(v), abs=1e-9)


def test_single_motor_value_underdetermined():
    samples = _full_sample_set([500.0] * 8)
    with pytest.raises(UnderdeterminedFitError, match="thumb"):
        fit_calibration(samples)


def test_missing_finger_underdetermined():
    vs = np.linspace(100, 2000, 10)
    calib = ForceCalibration.default()
    samples = []
    for f in FINGERS[:-1]:
        samples.extend(_samples_from_curve(calib.curve(f), f, vs))
    with pytest.raises(UnderdeterminedFitError, match="pinky"):
        fit_calibration(samples)


def test_noisy_fit_within_ten_percent():
    # 50 samples/finger from known positive cubics + N(0, 0.05) noise, fixed
    # seed; fit predictions must track the true cubic within 10% over the
    # sampled range.
    rng = np.random.default_rng(1234)
    vs = np.linspace(200, 2000, 50)
    samples = []
    for f in FINGERS:
        clean = np.array([_POSITIVE_CURVES.curve(f)(v) for v in vs])
        noisy = np.maximum(0.0, clean + rng.normal(0.0, 0.05, size=clean.shape))
        samples.extend(GaugeSample(f, float(v), float(y)) for v, y in zip(vs, noisy))
    fitted = fit_calibration(samples)
    for f in FINGERS:
        true = np.array([_POSITIVE_CURVES.curve(f)(v) for v in vs])
        pred = np.array([fitted.curve(f)(v) for v in vs])
        assert np.all(np.abs(pred - true) / true < 0.10)


# --- duty mapping --------------------------------------------------------

def test_duty_endpoints():
    p = DutyParams()
    assert force_to_duty(p, 1.72e-3) == pytest.approx(0.0, abs=1e-9)
    assert force_to_duty(p, 2.57172) == pytest.approx(1.0, rel=1e-9)


def test_duty_half():
    # invert the law at duty 0.5: f = m + 0.25*n = 0.64422, checked externally
    assert force_to_duty(DutyParams(), 0.64422) == pytest.approx(0.5, rel=1e-12)


def test_duty_clamps():
    p = DutyParams()
    assert force_to_duty(p, -5.0) == 0.0
    assert force_to_duty(p, 100.0) == 1.0


@settings(max_examples=200)
@given(st.floats(min_value=-10.0, max_value=10.0), st.floats(min_value=-10.0, max_value=10.0))
def test_duty_monotone_and_bounded(f1, f2):
    p = DutyParams()
    d1, d2 = force_to_duty(p, f1), force_to_duty(p, f2)
    assert 0.0 <= d1 <= 1.0
    if f1 <= f2:
        assert d1 <= d2


@given(st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
def test_duty_round_trip(d):
    p = DutyParams()
    assert force_to_duty(p, p.m + p.n * d * d) == pytest.approx(d, abs=1e-12)


def test_duty_params_validation():
    with pytest.raises(ValueError):
        DutyParams(0.0, 0.0)
    with pytest.raises(ValueError):
        DutyParams(0.0, -1.0)


# --- files ---------------------------------------------------------------

def test_shipped_calibration_file_matches_defaults():
    calib, duty = load_calibration(default_calibration_path())
    assert calib == ForceCalibration.default()
    assert duty == DutyParams()


def test_gauge_csv_round_trip(tmp_path):
    samples = _full_sample_set(np.linspace(0, 2000, 6))
    path = tmp_path / "gauge.csv"
    write_gauge_csv(path, samples)
    back = read_gauge_csv(path)
    assert back == samples


def test_gauge_csv_header_checked(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("finger,motor\nthumb,1\n")
    with pytest.raises(ValueError, match="columns"):
        read_gauge_csv(path)
