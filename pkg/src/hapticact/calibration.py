"""Motor-value-to-fingertip-force regression and force-to-duty-cycle haptic mapping."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FINGERS = ("thumb", "index", "middle", "ring", "pinky")

# Shipped per-finger cubic coefficients for the five-tendon hand,
# regressed from force-gauge measurements against raw motor values.
DEFAULT_FINGER_COEFFS = {
    "thumb": (2.25e-9, -5.28e-6, 8.03e-3, 3.23e-1),
    "index": (3.23e-10, -4.18e-7, 2.05e-3, -2.11e-2),
    "middle": (5.51e-10, -1.88e-6, 3.45e-4, -3.76e-2),
    "ring": (-4.98e-10, 2.40e-6, 1.71e-3, -1.13e-2),
    "pinky": (0.0, 5.73e-7, 1.43e-3, 2.39e-2),
}

DEFAULT_DUTY_M = 1.72e-3
DEFAULT_DUTY_N = 2.57

# Motor values are scaled by this before least-squares fitting so the
# Vandermonde columns stay well conditioned (raw values run 0..2000).
_FIT_SCALE = 1e-3


class UnderdeterminedFitError(ValueError):
    """Raised when a finger has too few distinct motor values for a cubic fit."""

    def __init__(self, finger: str, distinct: int):
        self.finger = finger
        self.distinct = distinct
        super().__init__(
            f"finger {finger!r}: {distinct} distinct motor value(s), need >= 4 for a cubic fit"
        )


@dataclass(frozen=True)
class FingerCurve:
    """Cubic force curve f(v) = a*v^3 + b*v^2 + c*v + d in newtons, v in motor units."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"coefficient {name} is not finite")

    def __call__(self, v: float) -> float:
        return ((self.a * v + self.b) * v + self.c) * v + self.d


@dataclass(frozen=True)
class ForceCalibration:
    """Per-finger cubic curves, fixed order thumb..pinky."""

    curves: tuple[FingerCurve, ...]

    def __post_init__(self):
        if len(self.curves) != len(FINGERS):
            raise ValueError(f"expected {len(FINGERS)} finger curves, got {len(self.curves)}")

    def curve(self, finger: str) -> FingerCurve:
        if finger not in FINGERS:
            raise ValueError(f"unknown finger {finger!r}, expected one of {FINGERS}")
        return self.curves[FINGERS.index(finger)]

    @classmethod
    def default(cls) -> "ForceCalibration":
        return cls(tuple(FingerCurve(*DEFAULT_FINGER_COEFFS[f]) for f in FINGERS))


@dataclass(frozen=True)
class DutyParams:
    """Constants of the square-root force-to-duty law: duty = sqrt((f - m) / n)."""

    m: float = DEFAULT_DUTY_M
    n: float = DEFAULT_DUTY_N

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.n)):
            raise ValueError("duty params must be finite")
        if self.n <= 0:
            raise ValueError(f"duty param n must be > 0, got {self.n}")


@dataclass(frozen=True)
class GaugeSample:
    """One force-gauge reading: finger id, raw motor value, measured force in N."""

    finger: str
    motor_value: float
    force_n: float

    def __post_init__(self):
        if self.finger not in FINGERS:
            raise ValueError(f"unknown finger {self.finger!r}, expected one of {FINGERS}")
        if self.motor_value < 0:
            raise ValueError(f"motor value must be >= 0, got {self.motor_value}")
        if self.force_n < 0:
            raise ValueError(f"measured force must be >= 0, got {self.force_n}")


def motor_to_force(calib: ForceCalibration, finger: str, v: float) -> float:
    """Fingertip force in N for a raw motor value, clamped at zero.

    The raw regression can go negative at small motor values (several fingers
    have a negative constant term); physical contact force cannot.
    """
    if v < 0:
        raise ValueError(f"motor value must be >= 0, got {v}")
    return max(0.0, calib.curve(finger)(v))


def force_to_duty(params: DutyParams, f: float) -> float:
    """Duty-cycle fraction in [0, 1] for a fingertip force in N.

    Out-of-range forces are clamped, never raised: this runs on the live
    teleop stream and must absorb transient spikes.
    """
    if not math.isfinite(f):
        raise ValueError(f"force must be finite, got {f}")
    x = (f - params.m) / params.n
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    return math.sqrt(x)


def fit_calibration(samples: list[GaugeSample]) -> ForceCalibration:
    """Least-squares cubic fit per finger from gauge samples.

    Needs >= 4 samples with >= 4 distinct motor values per finger; raises
    UnderdeterminedFitError naming the first finger that falls short.
    Solves the normal equations on a Vandermonde system with motor values
    scaled to keep the columns comparable in magnitude.
    """
    by_finger: dict[str, list[GaugeSample]] = {f: [] for f in FINGERS}
    for s in samples:
        by_finger[s.finger].append(s)

    curves = []
    for finger in FINGERS:
        group = by_finger[finger]
        distinct = len({s.motor_value for s in group})
        if distinct < 4:
            raise UnderdeterminedFitError(finger, distinct)
        v = np.array([s.motor_value for s in group], dtype=np.float64) * _FIT_SCALE
        f = np.array([s.force_n for s in group], dtype=np.float64)
        A = np.stack([v**3, v**2, v, np.ones_like(v)], axis=1)
        coef = np.linalg.solve(A.T @ A, A.T @ f)
        scale = np.array([_FIT_SCALE**3, _FIT_SCALE**2, _FIT_SCALE, 1.0])
        a, b, c, d = coef * scale
        curves.append(FingerCurve(float(a), float(b), float(c), float(d)))
    return ForceCalibration(tuple(curves))


# ---------------------------------------------------------------------------
# File formats: calib.json and the gauge-sample CSV.

def calibration_to_dict(calib: ForceCalibration, duty: DutyParams) -> dict:
    return {
        "fingers": {
            f: {"a": c.a, "b": c.b, "c": c.c, "d": c.d}
            for f, c in zip(FINGERS, calib.curves)
        },
        "duty": {"m": duty.m, "n": duty.n},
    }


def calibration_from_dict(data: dict) -> tuple[ForceCalibration, DutyParams]:
    fingers = data["fingers"]
    curves = []
    for f in FINGERS:
        rec = fingers[f]
        curves.append(FingerCurve(float(rec["a"]), float(rec["b"]), float(rec["c"]), float(rec["d"])))
    duty = data.get("duty", {})
    params = DutyParams(float(duty.get("m", DEFAULT_DUTY_M)), float(duty.get("n", DEFAULT_DUTY_N)))
    return ForceCalibration(tuple(curves)), params


def save_calibration(path: str | Path, calib: ForceCalibration, duty: DutyParams) -> None:
    Path(path).write_text(json.dumps(calibration_to_dict(calib, duty), indent=2) + "\n", encoding="utf-8")


def load_calibration(path: str | Path) -> tuple[ForceCalibration, DutyParams]:
    return calibration_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_calibration_path() -> Path:
    return Path(__file__).parent / "assets" / "calib.json"


def read_gauge_csv(path: str | Path) -> list[GaugeSample]:
    """Read gauge samples from a CSV with header finger,motor_value,force_n."""
    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = {"finger", "motor_value", "force_n"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise ValueError(f"gauge CSV must have columns {sorted(expected)}, got {reader.fieldnames}")
        for row in reader:
            samples.append(
                GaugeSample(row["finger"], float(row["motor_value"]), float(row["force_n"]))
            )
    return samples


def write_gauge_csv(path: str | Path, samples: list[GaugeSample]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["finger", "motor_value", "force_n"])
        for s in samples:
            writer.writerow([s.finger, s.motor_value, s.force_n])
