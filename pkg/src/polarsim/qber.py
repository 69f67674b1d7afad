"""E91 coincidences for the Phi+ pair state under a residual polarization error.

Alice's photon is untouched; Bob's photon carries the residual rotation that
an imperfect compensation leaves behind. Both parties measure in H/V or D/A
with equal probability, and only matched-basis coincidences are tallied.

Stokes axes map onto Pauli operators as s1 -> Z (H/V), s2 -> X (D/A),
s3 -> Y, which keeps the frame right-handed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .compensation import PoincareRotation

FIELDS = ("c_hh", "c_vv", "c_hv", "c_vh", "c_dd", "c_aa", "c_da", "c_ad")
CURVE_HEADER = ("ds", "dqber_mean", "dqber_std", "qber_printed_mean")

#: rotation-angle conventions for turning a chord error dS into a residual
POINCARE = "poincare"  # sphere rotation angle 2*asin(dS/2)
JONES = "jones"  # 2*asin(dS/2) used as the SU(2) angle, i.e. twice that on the sphere

_SQ2 = 1.0 / math.sqrt(2.0)
_KETS = {
    "h": np.array([1.0, 0.0], dtype=complex),
    "v": np.array([0.0, 1.0], dtype=complex),
    "d": np.array([_SQ2, _SQ2], dtype=complex),
    "a": np.array([_SQ2, -_SQ2], dtype=complex),
}
_PHI_PLUS = np.array([_SQ2, 0.0, 0.0, _SQ2], dtype=complex)
_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class ProbabilityError(ValueError):
    pass


class NoCoincidencesError(ValueError):
    pass


@dataclass(frozen=True)
class CoincidenceCounts:
    c_hh: int = 0
    c_vv: int = 0
    c_hv: int = 0
    c_vh: int = 0
    c_dd: int = 0
    c_aa: int = 0
    c_da: int = 0
    c_ad: int = 0

    def __post_init__(self):
        if any(c < 0 for c in astuple(self)):
            raise ValueError("coincidence counts must be non-negative")

    @classmethod
    def from_sequence(cls, counts: Sequence[int]) -> "CoincidenceCounts":
        return cls(*(int(c) for c in counts))

    def as_tuple(self) -> tuple[int, ...]:
        return astuple(self)

    @property
    def total(self) -> int:
        return sum(astuple(self))


@dataclass(frozen=True)
class QberReport:
    qber_printed: float
    qber_conventional: float
    dqber: float = 0.0


def bob_unitary(residual: PoincareRotation) -> np.ndarray:
    nz, nx, ny = residual.axis
    gen = nx * _PAULI_X + ny * _PAULI_Y + nz * _PAULI_Z
    half = residual.angle / 2
    return math.cos(half) * np.eye(2) - 1j * math.sin(half) * gen


def coincidence_probabilities(residual: PoincareRotation) -> np.ndarray:
    """Probabilities of the 8 classes in ``FIELDS`` order; each basis carries 1/2."""
    state = np.kron(np.eye(2), bob_unitary(residual)) @ _PHI_PLUS
    probs = []
    for pair in ("hh", "vv", "hv", "vh", "dd", "aa", "da", "ad"):
        bra = np.kron(_KETS[pair[0]], _KETS[pair[1]]).conj()
        probs.append(0.5 * abs(bra @ state) ** 2)
    p = np.array(probs)
    p[p < 1e-16] = 0.0
    return p / p.sum()


def sample_coincidences(probs: Sequence[float], n_pairs: int, rng_seed=None) -> CoincidenceCounts:
    p = np.asarray(probs, dtype=float)
    if p.shape != (8,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ProbabilityError("need 8 non-negative probabilities summing to 1")
    if n_pairs < 0:
        raise ValueError("n_pairs must be non-negative")
    rng = np.random.default_rng(rng_seed)
    return CoincidenceCounts.from_sequence(rng.multinomial(n_pairs, p / p.sum()))


def qber_fractions(c: CoincidenceCounts) -> tuple[Fraction, Fraction]:
    """Exact (printed, conventional) QBER from integer counts."""
    a = c.c_hh + c.c_vv - c.c_hv - c.c_vh
    b = c.c_dd + c.c_aa - c.c_da - c.c_ad
    total = c.total
    if total == 0:
        raise NoCoincidencesError("no coincidences recorded")
    wrong = c.c_hv + c.c_vh + c.c_da + c.c_ad
    return Fraction(a + b, total), Fraction(wrong, total)


def qber_from_counts(c: CoincidenceCounts, baseline: float = 0.0) -> QberReport:
    """Printed ratio (A+B)/(C+D) and conventional wrong/total; dqber against ``baseline``."""
    printed, conventional = qber_fractions(c)
    conv = float(conventional)
    return QberReport(float(printed), conv, conv - baseline)


def residual_angle(ds: float, convention: str = JONES) -> float:
    """Rotation angle on the Poincare sphere for a chord error ``ds``."""
    if not 0.0 <= ds <= 2.0:
        raise ValueError(f"dS must lie in [0, 2], got {ds}")
    chord_angle = 2.0 * math.asin(ds / 2.0)
    if convention == POINCARE:
        return chord_angle
    if convention == JONES:
        return 2.0 * chord_angle
    raise ValueError(f"unknown angle convention {convention!r}")


def random_axis(rng: np.random.Generator) -> tuple[float, float, float]:
    v = rng.standard_normal(3)
    while np.linalg.norm(v) < 1e-12:
        v = rng.standard_normal(3)
    return tuple(v / np.linalg.norm(v))


@dataclass(frozen=True)
class CurvePoint:
    ds: float
    dqber_mean: float
    dqber_std: float
    qber_printed_mean: float


def _trial(ds: float, n_pairs: int, seed: Sequence[int], convention: str) -> tuple[float, float, CoincidenceCounts]:
    rng = np.random.default_rng(seed)
    residual = PoincareRotation(random_axis(rng), residual_angle(ds, convention))
    counts = sample_coincidences(coincidence_probabilities(residual), n_pairs, rng)
    rep = qber_from_counts(counts)
    return rep.qber_conventional, rep.qber_printed, counts


def baseline_qber(n_pairs: int, trials: int, rng_seed: int) -> float:
    """Mean conventional QBER with perfect compensation (zero in this model)."""
    p = coincidence_probabilities(PoincareRotation.identity())
    vals = [
        qber_from_counts(sample_coincidences(p, n_pairs, [rng_seed, 2**31 - 1, j])).qber_conventional
        for j in range(trials)
    ]
    return float(np.mean(vals))


def dqber_curve(
    ds_values: Sequence[float],
    n_pairs: int,
    trials: int,
    rng_seed: int,
    convention: str = JONES,
) -> list[CurvePoint]:
    """Mean/std of the QBER increase over the perfect-compensation baseline."""
    for d in ds_values:
        if not 0.0 <= d <= 2.0:
            raise ValueError(f"dS must lie in [0, 2], got {d}")
    if trials < 1:
        raise ValueError("need at least one trial")
    base = baseline_qber(n_pairs, trials, rng_seed)
    out = []
    for i, d in enumerate(ds_values):
        conv, printed = [], []
        for j in range(trials):
            c, p, _ = _trial(d, n_pairs, [rng_seed, i, j], convention)
            conv.append(c)
            printed.append(p)
        dq = np.asarray(conv) - base
        out.append(CurvePoint(float(d), float(dq.mean()), float(dq.std()), float(np.mean(printed))))
    return out


def showcase_counts(ds: float, n_pairs: int, rng_seed: int, convention: str = JONES) -> CoincidenceCounts:
    """One representative coincidence histogram at a given dS."""
    return _trial(ds, n_pairs, [rng_seed, 2**31 - 2, int(round(ds * 1e6))], convention)[2]


def write_curve_csv(points: Sequence[CurvePoint], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_HEADER)
        for p in points:
            w.writerow([repr(p.ds), repr(p.dqber_mean), repr(p.dqber_std), repr(p.qber_printed_mean)])


def read_curve_csv(path: str | Path) -> list[CurvePoint]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CURVE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CURVE_HEADER)}")
        return [CurvePoint(*(float(r[k]) for k in CURVE_HEADER)) for r in reader]


