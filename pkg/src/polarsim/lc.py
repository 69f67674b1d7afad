"""Liquid-crystal variable retarder: voltage calibration and switching dynamics.

Switching is modelled as first-order relaxation of the retardance toward the
commanded target with time constant ``tau``. Relaxation runs on the unwrapped
retardance; wrapping onto [0, 2pi) only happens when the value is read.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .stokes import TWO_PI, wrap_retardance

CALIBRATION_HEADER = ("voltage_v", "retardance_rad")


class CalibrationRangeError(ValueError):
    """Voltage or retardance outside the calibrated range."""


@dataclass(frozen=True)
class CalibrationCurve:
    voltages: tuple[float, ...]
    retardances: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.voltages, dtype=float)
        r = np.asarray(self.retardances, dtype=float)
        if v.shape != r.shape or v.ndim != 1:
            raise ValueError("voltages and retardances must be 1-D and of equal length")
        if len(v) < 2:
            raise ValueError("calibration curve needs at least 2 samples")
        if np.any(np.diff(v) <= 0):
            raise ValueError("calibration voltages must be strictly increasing")
        dr = np.diff(r)
        if not (np.all(dr > 0) or np.all(dr < 0)):
            raise ValueError("calibration retardance must be strictly monotone")

    @classmethod
    def from_samples(cls, samples: Sequence[tuple[float, float]]) -> "CalibrationCurve":
        return cls(tuple(float(v) for v, _ in samples), tuple(float(r) for _, r in samples))

    @classmethod
    def default(cls) -> "CalibrationCurve":
        """Two-point linear curve covering retardances [0, 2pi] over 0..10 V."""
        return cls((0.0, 10.0), (0.0, TWO_PI))

    @property
    def decreasing(self) -> bool:
        return self.retardances[-1] < self.retardances[0]

    def retardance_range(self) -> tuple[float, float]:
        return min(self.retardances), max(self.retardances)


def load_calibration(path: str | Path) -> CalibrationCurve:
    """Read a ``voltage_v,retardance_rad`` CSV."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CALIBRATION_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CALIBRATION_HEADER)}")
        rows = [(float(r["voltage_v"]), float(r["retardance_rad"])) for r in reader]
    return CalibrationCurve.from_samples(rows)


def save_calibration(curve: CalibrationCurve, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CALIBRATION_HEADER)
        for v, r in zip(curve.voltages, curve.retardances):
            w.writerow([repr(v), repr(r)])


def retardance_from_voltage(curve: CalibrationCurve, v: float) -> float:
    lo, hi = curve.voltages[0], curve.voltages[-1]
    if not lo <= v <= hi:
        raise CalibrationRangeError(f"voltage {v} V outside calibrated range [{lo}, {hi}] V")
    return float(np.interp(v, curve.voltages, curve.retardances))


def voltage_for_retardance(curve: CalibrationCurve, delta: float) -> float:
    lo, hi = curve.retardance_range()
    if not lo <= delta <= hi:
        raise CalibrationRangeError(f"retardance {delta} rad outside calibrated range [{lo}, {hi}] rad")
    r, v = np.asarray(curve.retardances), np.asarray(curve.voltages)
    if curve.decreasing:
        r, v = r[::-1], v[::-1]
    return float(np.interp(delta, r, v))


@dataclass(frozen=True)
class LcRetarder:
    """Value-type device state. ``tau == 0`` models an ideal, instantly switching LC."""

    orientation: float = 0.0
    tau: float = 0.05
    current: float = 0.0
    target: float = 0.0
    calibration: CalibrationCurve = CalibrationCurve.default()

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be non-negative")

    @property
    def current_retardance(self) -> float:
        return wrap_retardance(self.current)

    @property
    def target_retardance(self) -> float:
        return wrap_retardance(self.target)

    @property
    def settled(self) -> bool:
        return self.current == self.target

    def voltage(self) -> float:
        """Drive voltage that the controller applies for the current target."""
        return voltage_for_retardance(self.calibration, self.target_retardance)


def command(lc: LcRetarder, delta_target: float) -> LcRetarder:
    return replace(lc, target=float(delta_target))


def evolve(lc: LcRetarder, dt: float) -> LcRetarder:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if lc.current == lc.target:
        return lc
    if lc.tau == 0:
        return replace(lc, current=lc.target)
    decay = math.exp(-dt / lc.tau)
    return replace(lc, current=lc.target + (lc.current - lc.target) * decay)


def tau_for_switching_time(switching_time: float, interpretation: str = "time_constant") -> float:
    """Map a nominal LC switching time onto a relaxation time constant.

    ``time_constant`` uses it as-is; ``settle_95`` treats it as the 95 % settling
    time (three time constants).
    """
    if interpretation == "time_constant":
        return switching_time
    if interpretation == "settle_95":
        return switching_time / 3.0
    raise ValueError(f"unknown tau interpretation {interpretation!r}")
