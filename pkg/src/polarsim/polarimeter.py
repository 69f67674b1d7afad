"""Two-LC polarimeter: the intensity model, measurement schedules and Stokes reconstruction.

The analyser chain is LC1 (fast axis 0 deg) -> LC2 (45 deg) -> PBS -> detector.
Both reconstructions use the *commanded* retardances; any settling error of the
LCs therefore shows up as a reconstruction error.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lc import LcRetarder, command, evolve
from .stokes import (
    TWO_PI,
    DegenerateIntensityError,
    MuellerMatrix,
    StokesVector,
    compose,
    linear_retarder,
    normalize,
    pbs_transmit,
    wrap_retardance,
)

DIRECT = "direct"
FOURIER = "fourier"


class InsufficientSamplesError(ValueError):
    pass


@dataclass(frozen=True)
class LcSetting:
    delta1: float
    delta2: float

    def __post_init__(self):
        object.__setattr__(self, "delta1", wrap_retardance(self.delta1))
        object.__setattr__(self, "delta2", wrap_retardance(self.delta2))


@dataclass(frozen=True)
class ScheduleEntry:
    setting: LcSetting
    dwell: float
    exposure: float

    @property
    def duration(self) -> float:
        return self.dwell + self.exposure


@dataclass(frozen=True)
class MeasurementSchedule:
    entries: tuple[ScheduleEntry, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("measurement schedule must not be empty")
        for e in self.entries:
            if e.dwell < 0 or e.exposure <= 0:
                raise ValueError("dwell must be >= 0 and exposure > 0")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def total_time(self) -> float:
        return sum(e.duration for e in self.entries)


@dataclass(frozen=True)
class IntensitySample:
    commanded: LcSetting
    actual: LcSetting
    intensity: float
    t: float = 0.0


@dataclass(frozen=True)
class ReconstructedState:
    stokes: StokesVector
    method: str
    n_samples: int


@dataclass(frozen=True)
class NoiseConfig:
    """Additive Gaussian detector noise plus optional sinusoidal source-power drift.

    Drift multiplies the intensity by ``1 + drift_amplitude * sin(2 pi f t)``.
    """

    sigma_i: float = 0.01
    drift_amplitude: float = 0.0
    drift_frequency_hz: float = 0.0

    def __post_init__(self):
        if self.sigma_i < 0 or self.drift_amplitude < 0 or self.drift_frequency_hz < 0:
            raise ValueError("noise parameters must be non-negative")


NOISELESS = NoiseConfig(sigma_i=0.0)


@dataclass(frozen=True)
class Acquisition:
    samples: tuple[IntensitySample, ...]
    lc1: LcRetarder
    lc2: LcRetarder
    t_end: float


def analyzer_matrix(setting: LcSetting) -> MuellerMatrix:
    return compose([linear_retarder(setting.delta1, 0.0), linear_retarder(setting.delta2, np.pi / 4), pbs_transmit()])


def ideal_intensity(setting: LcSetting, s: StokesVector) -> float:
    d1, d2 = setting.delta1, setting.delta2
    sin2 = np.sin(d2)
    return 0.5 * (s.s0 + s.s1 * np.cos(d2) + s.s2 * sin2 * np.sin(d1) + s.s3 * sin2 * np.cos(d1))


def direct_schedule(exposure: float, dwell: float, delta_arb: float = 0.0) -> MeasurementSchedule:
    settings = [
        LcSetting(delta_arb, 0.0),
        LcSetting(delta_arb, np.pi),
        LcSetting(np.pi / 2, np.pi / 2),
        LcSetting(0.0, np.pi / 2),
    ]
    return MeasurementSchedule(tuple(ScheduleEntry(s, dwell, exposure) for s in settings))


def fourier_positions(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def fourier_schedule(n: int, exposure: float, dwell: float) -> MeasurementSchedule:
    if n < 4:
        raise InsufficientSamplesError(f"Fourier analysis needs at least 4 samples, got {n}")
    return MeasurementSchedule(
        tuple(ScheduleEntry(LcSetting(d, d), dwell, exposure) for d in fourier_positions(n))
    )


def acquire_sweep(
    s_in: StokesVector,
    schedule: MeasurementSchedule,
    lc1: LcRetarder,
    lc2: LcRetarder,
    noise: NoiseConfig = NOISELESS,
    rng_seed=None,
    t0: float = 0.0,
) -> Acquisition:
    """Run a schedule through the devices, carrying their state from entry to entry.

    Each intensity is read at the exposure midpoint. ``rng_seed`` may be
    anything :func:`numpy.random.default_rng` accepts, including a Generator.
    """
    rng = np.random.default_rng(rng_seed)
    t = t0
    samples = []
    for entry in schedule:
        lc1 = command(lc1, entry.setting.delta1)
        lc2 = command(lc2, entry.setting.delta2)
        half = entry.exposure / 2
        lc1, lc2 = evolve(lc1, entry.dwell + half), evolve(lc2, entry.dwell + half)
        t_read = t + entry.dwell + half
        actual = LcSetting(lc1.current_retardance, lc2.current_retardance)
        intensity = ideal_intensity(actual, s_in)
        if noise.drift_amplitude:
            intensity *= 1.0 + noise.drift_amplitude * np.sin(TWO_PI * noise.drift_frequency_hz * t_read)
        if noise.sigma_i:
            intensity += noise.sigma_i * rng.standard_normal()
        samples.append(IntensitySample(entry.setting, actual, max(float(intensity), 0.0), t_read))
        lc1, lc2 = evolve(lc1, half), evolve(lc2, half)
        t += entry.duration
    return Acquisition(tuple(samples), lc1, lc2, t)


def acquire(
    s_in: StokesVector,
    schedule: MeasurementSchedule,
    lc1: LcRetarder,
    lc2: LcRetarder,
    noise: NoiseConfig = NOISELESS,
    rng_seed=None,
) -> list[IntensitySample]:
    return list(acquire_sweep(s_in, schedule, lc1, lc2, noise, rng_seed).samples)


def direct_reconstruct(i0: float, i1: float, i2: float, i3: float) -> ReconstructedState:
    s0 = i0 + i1
    if not s0 > 0:
        raise DegenerateIntensityError(f"direct analysis gave S0={s0!r}")
    raw = StokesVector(s0, i0 - i1, 2 * i2 - s0, 2 * i3 - s0)
    return ReconstructedState(normalize(raw), DIRECT, 4)


def direct_from_samples(samples: Sequence[IntensitySample]) -> ReconstructedState:
    if len(samples) != 4:
        raise InsufficientSamplesError(f"direct analysis takes exactly 4 samples, got {len(samples)}")
    return direct_reconstruct(*(s.intensity for s in samples))


def fourier_coefficients(samples: Sequence[IntensitySample]) -> tuple[float, float, float, float]:
    """Riemann-sum estimates of (a0, a1, a2, b2) at the commanded positions."""
    n = len(samples)
    if n < 4:
        raise InsufficientSamplesError(f"Fourier analysis needs at least 4 samples, got {n}")
    i = np.array([s.intensity for s in samples])
    d = np.array([s.commanded.delta1 for s in samples])
    step = TWO_PI / n
    a0 = np.sum(i) * step / TWO_PI
    a1 = np.sum(i * np.cos(d)) * step / np.pi
    a2 = np.sum(i * np.cos(2 * d)) * step / np.pi
    b2 = np.sum(i * np.sin(2 * d)) * step / np.pi
    return float(a0), float(a1), float(a2), float(b2)


def fourier_reconstruct(coeffs: Sequence[float], n_samples: int = 4) -> ReconstructedState:
    a0, a1, a2, b2 = coeffs
    s0 = 2 * a0 + 2 * a2
    if not s0 > 0:
        raise DegenerateIntensityError(f"Fourier analysis gave S0={s0!r}")
    return ReconstructedState(normalize(StokesVector(s0, 2 * a1, -4 * a2, 4 * b2)), FOURIER, n_samples)


def fourier_from_samples(samples: Sequence[IntensitySample]) -> ReconstructedState:
    return fourier_reconstruct(fourier_coefficients(samples), len(samples))


def decimate(samples: Sequence[IntensitySample], factor: int) -> list[IntensitySample]:
    """Keep every ``factor``-th sample of a Fourier sweep (still equally spaced)."""
    if len(samples) % factor:
        raise ValueError(f"{len(samples)} samples cannot be decimated by {factor}")
    return list(samples[::factor])


def measure(
    s_in: StokesVector,
    method: str,
    n: int,
    lc1: LcRetarder,
    lc2: LcRetarder,
    noise: NoiseConfig = NOISELESS,
    rng_seed=None,
    exposure: float = 0.02,
    dwell: float = 0.0,
    t0: float = 0.0,
) -> tuple[ReconstructedState, Acquisition]:
    """Acquire a full schedule for ``method`` and reconstruct the input state."""
    if method == DIRECT:
        sched = direct_schedule(exposure, dwell)
    elif method == FOURIER:
        sched = fourier_schedule(n, exposure, dwell)
    else:
        raise ValueError(f"unknown method {method!r}")
    acq = acquire_sweep(s_in, sched, lc1, lc2, noise, rng_seed, t0)
    rec = direct_from_samples(acq.samples) if method == DIRECT else fourier_from_samples(acq.samples)
    return rec, acq
