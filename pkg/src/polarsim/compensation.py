"""Compensation parameters from beacon polarimetry and a closed tracking loop.

The channel and the compensator are both represented as rotations of the
Poincare sphere. Each loop tick measures the (already compensated) beacon,
estimates the rotation that brings it back onto the reference state and
prepends that correction to the compensator.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .lc import LcRetarder
from .metrics import ds as stokes_ds
from .polarimeter import DIRECT, FOURIER, NOISELESS, NoiseConfig, direct_schedule, fourier_schedule, measure
from .stokes import MuellerMatrix, StokesVector, from_sphere

AXIS_TOL = 1e-9
DEFAULT_FALLBACK_AXIS = (0.0, 0.0, 1.0)
TRACKING_HEADER = ("t_s", "ds_before", "ds_after")


class AmbiguousAxisError(ValueError):
    """Measured and reference states are antipodal; every orthogonal axis works."""


class LoopConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PoincareRotation:
    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        n = np.linalg.norm(a)
        if abs(n - 1.0) > AXIS_TOL:
            raise ValueError(f"rotation axis must be unit length, |axis|={n}")
        angle = float(self.angle)
        # canonical form: angle in [0, pi], sign carried by the axis
        angle = math.remainder(angle, 2 * math.pi)
        if angle < 0:
            a, angle = -a, -angle
        object.__setattr__(self, "axis", tuple(float(x) for x in a))
        object.__setattr__(self, "angle", angle)

    @classmethod
    def identity(cls) -> "PoincareRotation":
        return cls(DEFAULT_FALLBACK_AXIS, 0.0)

    def inverse(self) -> "PoincareRotation":
        return PoincareRotation(tuple(-x for x in self.axis), self.angle)

    def matrix3(self) -> np.ndarray:
        """Rodrigues rotation matrix acting on (s1, s2, s3)."""
        k = np.asarray(self.axis)
        kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
        return np.eye(3) + math.sin(self.angle) * kx + (1 - math.cos(self.angle)) * (kx @ kx)


def rotation_to_mueller(r: PoincareRotation) -> MuellerMatrix:
    m = np.eye(4)
    m[1:, 1:] = r.matrix3()
    return MuellerMatrix(m)


def rotation_from_matrix3(m: np.ndarray) -> PoincareRotation:
    """Axis/angle of a proper 3x3 rotation matrix."""
    cos_a = np.clip((np.trace(m) - 1) / 2, -1.0, 1.0)
    angle = math.acos(cos_a)
    if angle < 1e-12:
        return PoincareRotation.identity()
    if math.pi - angle < 1e-6:
        # near pi the antisymmetric part vanishes; use the symmetric part
        b = (m + np.eye(3)) / 2
        i = int(np.argmax(np.diag(b)))
        axis = b[:, i] / math.sqrt(b[i, i])
        return PoincareRotation(tuple(axis / np.linalg.norm(axis)), angle)
    w = np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])
    return PoincareRotation(tuple(w / np.linalg.norm(w)), angle)


def _unit(s: StokesVector) -> np.ndarray:
    p = s.polarized
    n = np.linalg.norm(p)
    if n == 0:
        raise ValueError("state has no polarized component")
    return p / n


def estimate_rotation(
    s_measured: StokesVector,
    s_reference: StokesVector,
    fallback_axis: Sequence[float] | None = None,
) -> PoincareRotation:
    """Minimal-angle rotation taking the measured state onto the reference.

    Antipodal inputs raise :class:`AmbiguousAxisError` unless ``fallback_axis``
    is given; it is then projected orthogonal to the measured state.
    """
    m, r = _unit(s_measured), _unit(s_reference)
    cross = np.cross(m, r)
    sin_a = float(np.linalg.norm(cross))
    cos_a = float(m @ r)
    angle = math.atan2(sin_a, cos_a)
    if sin_a > AXIS_TOL:
        return PoincareRotation(tuple(cross / sin_a), angle)
    if cos_a > 0:
        return PoincareRotation.identity()
    if fallback_axis is None:
        raise AmbiguousAxisError("measured and reference states are antipodal")
    f = np.asarray(fallback_axis, dtype=float)
    f = f - (f @ m) * m
    if np.linalg.norm(f) < AXIS_TOL:
        # fallback parallel to the states; any orthogonal axis will do
        f = np.cross(m, [1.0, 0.0, 0.0])
        if np.linalg.norm(f) < AXIS_TOL:
            f = np.cross(m, [0.0, 1.0, 0.0])
    return PoincareRotation(tuple(f / np.linalg.norm(f)), math.pi)


@dataclass(frozen=True)
class DriftModel:
    """Channel rotation as a function of time.

    ``static``: fixed ``angle``. ``linear-ramp``: ``angle + rate * t``.
    ``sinusoidal``: ``angle + amplitude * sin(2 pi frequency_hz t)``.
    The axis is fixed.
    """

    kind: str = "static"
    axis: tuple[float, float, float] = (0.0, 1.0, 0.0)
    angle: float = 0.0
    rate: float = 0.0
    amplitude: float = 0.0
    frequency_hz: float = 0.0

    def __post_init__(self):
        if self.kind not in ("static", "linear-ramp", "sinusoidal"):
            raise ValueError(f"unknown drift kind {self.kind!r}")
        a = np.asarray(self.axis, dtype=float)
        object.__setattr__(self, "axis", tuple(float(x) for x in a / np.linalg.norm(a)))

    def angle_at(self, t: float) -> float:
        if self.kind == "static":
            return self.angle
        if self.kind == "linear-ramp":
            return self.angle + self.rate * t
        return self.angle + self.amplitude * math.sin(2 * math.pi * self.frequency_hz * t)

    def at(self, t: float) -> PoincareRotation:
        return PoincareRotation(self.axis, self.angle_at(t))

    def max_angular_speed(self) -> float:
        if self.kind == "static":
            return 0.0
        if self.kind == "linear-ramp":
            return abs(self.rate)
        return abs(self.amplitude) * 2 * math.pi * self.frequency_hz


@dataclass(frozen=True)
class PolarimeterConfig:
    method: str = FOURIER
    n: int = 8
    exposure: float = 0.02
    dwell: float = 0.05
    tau: float = 0.0
    noise: NoiseConfig = field(default_factory=lambda: NOISELESS)

    def schedule(self):
        if self.method == DIRECT:
            return direct_schedule(self.exposure, self.dwell)
        return fourier_schedule(self.n, self.exposure, self.dwell)

    def measurement_time(self) -> float:
        return self.schedule().total_time


@dataclass(frozen=True)
class TrackingPoint:
    t: float
    ds_before: float
    ds_after: float


def run_tracking_loop(
    drift: DriftModel,
    polarimeter_config: PolarimeterConfig,
    loop_period: float,
    duration: float,
    rng_seed=0,
    reference: StokesVector = StokesVector(1.0, 1.0, 0.0, 0.0),
    fallback_axis: Sequence[float] = DEFAULT_FALLBACK_AXIS,
) -> list[TrackingPoint]:
    """Simulate the beacon-driven compensation loop.

    Tick k starts at ``t_k = k * loop_period``. ``ds_before`` is the residual of
    the compensated channel at ``t_k``; the beacon is then measured, and the
    updated compensator takes effect when the measurement finishes, which is
    where ``ds_after`` is evaluated. The quantum signal shares the beacon's
    reference polarization.
    """
    t_meas = polarimeter_config.measurement_time()
    if loop_period < t_meas:
        raise LoopConfigError(f"loop period {loop_period} s shorter than measurement time {t_meas} s")
    if duration <= 0:
        raise LoopConfigError("duration must be positive")

    rng = np.random.default_rng(rng_seed)
    ref = reference.normalize()
    comp = np.eye(3)
    lc1 = LcRetarder(orientation=0.0, tau=polarimeter_config.tau)
    lc2 = LcRetarder(orientation=math.pi / 4, tau=polarimeter_config.tau)
    n_ticks = int(math.floor(duration / loop_period + 1e-9))
    out = []

    def residual(t: float, c: np.ndarray) -> StokesVector:
        chan = drift.at(t).matrix3()
        return from_sphere(c @ chan @ ref.polarized)

    for k in range(n_ticks):
        t = k * loop_period
        before = residual(t, comp)
        rec, acq = measure(
            before,
            polarimeter_config.method,
            polarimeter_config.n,
            lc1,
            lc2,
            polarimeter_config.noise,
            rng,
            polarimeter_config.exposure,
            polarimeter_config.dwell,
            t0=t,
        )
        lc1, lc2 = acq.lc1, acq.lc2
        correction = estimate_rotation(rec.stokes, ref, fallback_axis)
        comp = correction.matrix3() @ comp
        after = residual(t + t_meas, comp)
        out.append(TrackingPoint(t, stokes_ds(ref, before), stokes_ds(ref, after)))
    return out


def write_tracking_csv(points: Sequence[TrackingPoint], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACKING_HEADER)
        for p in points:
            w.writerow([repr(p.t), repr(p.ds_before), repr(p.ds_after)])


def read_tracking_csv(path: str | Path) -> list[TrackingPoint]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACKING_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TRACKING_HEADER)}")
        return [TrackingPoint(float(r["t_s"]), float(r["ds_before"]), float(r["ds_after"])) for r in reader]
