"""Stokes vectors, Mueller matrices and the optical elements used in the setup.

Retarder handedness follows the convention under which the polarimeter chain
PBS . LC2(45 deg) . LC1(0 deg) yields

    I = 1/2 (S0 + S1 cos d2 + S2 sin d2 sin d1 + S3 sin d2 cos d1)

term for term; ``tests/test_stokes.py`` pins this against the closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi

#: default tolerance for the s1^2+s2^2+s3^2 <= s0^2 check on analytic vectors
DEFAULT_EPS = 1e-9


class DegenerateIntensityError(ValueError):
    """Raised when a Stokes vector has no usable total intensity (s0 <= 0)."""


def wrap_retardance(delta: float) -> float:
    """Wrap a retardance in radians onto [0, 2pi)."""
    wrapped = float(np.mod(delta, TWO_PI))
    # np.mod can round up to exactly 2pi for tiny negative inputs
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


@dataclass(frozen=True)
class StokesVector:
    s0: float
    s1: float
    s2: float
    s3: float

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "StokesVector":
        a = np.asarray(arr, dtype=float)
        if a.shape != (4,):
            raise ValueError(f"Stokes vector needs 4 components, got shape {a.shape}")
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.s0, self.s1, self.s2, self.s3], dtype=float)

    @property
    def polarized(self) -> np.ndarray:
        """The (s1, s2, s3) part, i.e. the point on/in the Poincare sphere."""
        return np.array([self.s1, self.s2, self.s3], dtype=float)

    @property
    def degree_of_polarization(self) -> float:
        if self.s0 <= 0:
            raise DegenerateIntensityError("degree of polarization undefined for s0 <= 0")
        return float(np.linalg.norm(self.polarized) / self.s0)

    def is_physical(self, eps: float = DEFAULT_EPS) -> bool:
        p2 = float(self.polarized @ self.polarized)
        return self.s0 >= 0 and p2 <= self.s0**2 + eps

    def is_fully_polarized(self, eps: float = DEFAULT_EPS) -> bool:
        p2 = float(self.polarized @ self.polarized)
        return abs(p2 - self.s0**2) <= eps

    def normalize(self) -> "StokesVector":
        return normalize(self)


# a few named states used throughout
H = StokesVector(1.0, 1.0, 0.0, 0.0)
V = StokesVector(1.0, -1.0, 0.0, 0.0)
D = StokesVector(1.0, 0.0, 1.0, 0.0)
A = StokesVector(1.0, 0.0, -1.0, 0.0)
R = StokesVector(1.0, 0.0, 0.0, 1.0)
L = StokesVector(1.0, 0.0, 0.0, -1.0)
UNPOLARIZED = StokesVector(1.0, 0.0, 0.0, 0.0)


class MuellerMatrix:
    """Immutable 4x4 real Mueller matrix.

    ``M @ s`` applies the matrix to a :class:`StokesVector`; ``M2 @ M1`` is the
    ordinary matrix product (M1 acts first).
    """

    __slots__ = ("_m",)

    def __init__(self, m: np.ndarray | Sequence[Sequence[float]]):
        arr = np.array(m, dtype=float)
        if arr.shape != (4, 4):
            raise ValueError(f"Mueller matrix must be 4x4, got shape {arr.shape}")
        arr.setflags(write=False)
        self._m = arr

    @property
    def m(self) -> np.ndarray:
        return self._m

    def __matmul__(self, other):
        if isinstance(other, MuellerMatrix):
            return MuellerMatrix(self._m @ other._m)
        if isinstance(other, StokesVector):
            return apply(self, other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, MuellerMatrix):
            return NotImplemented
        return bool(np.array_equal(self._m, other._m))

    def __hash__(self) -> int:
        return hash(self._m.tobytes())

    def allclose(self, other: "MuellerMatrix", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._m, other._m, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        return f"MuellerMatrix({self._m.tolist()!r})"


def identity() -> MuellerMatrix:
    return MuellerMatrix(np.eye(4))


def apply(m: MuellerMatrix, s: StokesVector) -> StokesVector:
    """Return ``m . s`` with s as a column vector."""
    return StokesVector.from_array(m.m @ s.as_array())


def linear_retarder(delta: float, theta: float) -> MuellerMatrix:
    """Linear retarder with retardance ``delta`` and fast axis at ``theta`` (radians)."""
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    cd, sd = np.cos(delta), np.sin(delta)
    return MuellerMatrix(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c * c + s * s * cd, c * s * (1 - cd), s * sd],
            [0.0, c * s * (1 - cd), s * s + c * c * cd, -c * sd],
            [0.0, -s * sd, c * sd, cd],
        ]
    )


def quarter_wave_plate(theta: float) -> MuellerMatrix:
    return linear_retarder(np.pi / 2, theta)


def half_wave_plate(theta: float) -> MuellerMatrix:
    return linear_retarder(np.pi, theta)


def rotator(theta: float) -> MuellerMatrix:
    """Optical rotator turning the polarization plane by ``theta`` (2*theta on the sphere)."""
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return MuellerMatrix(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c, -s, 0.0],
            [0.0, s, c, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def polarizer(theta: float) -> MuellerMatrix:
    """Ideal linear polarizer with transmission axis at ``theta``."""
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return MuellerMatrix(
        0.5
        * np.array(
            [
                [1.0, c, s, 0.0],
                [c, c * c, c * s, 0.0],
                [s, c * s, s * s, 0.0],
                [0.0, 0.0, 0.0, 0.0],
            ]
        )
    )


def pbs_transmit() -> MuellerMatrix:
    """Transmitted port of a polarizing beam splitter (passes horizontal)."""
    return polarizer(0.0)


def compose(elements: Iterable[MuellerMatrix]) -> MuellerMatrix:
    """Collapse a beam path into one matrix.

    ``elements`` are listed in the order light meets them, so the first
    element ends up as the rightmost factor.
    """
    elements = list(elements)
    if not elements:
        raise ValueError("cannot compose an empty list of elements")
    out = elements[0].m
    for el in elements[1:]:
        out = el.m @ out
    return MuellerMatrix(out)


def normalize(s: StokesVector) -> StokesVector:
    """Divide all components by s0."""
    if not s.s0 > 0:
        raise DegenerateIntensityError(f"cannot normalize Stokes vector with s0={s.s0!r}")
    return StokesVector(1.0, s.s1 / s.s0, s.s2 / s.s0, s.s3 / s.s0)


def from_sphere(point: Sequence[float]) -> StokesVector:
    """Fully polarized unit-intensity state for a point (s1, s2, s3) on the sphere."""
    p = np.asarray(point, dtype=float)
    n = np.linalg.norm(p)
    if n == 0:
        raise DegenerateIntensityError("zero polarized component has no direction")
    p = p / n
    return StokesVector(1.0, float(p[0]), float(p[1]), float(p[2]))
