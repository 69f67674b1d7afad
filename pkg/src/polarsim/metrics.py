"""Accuracy metric: chord distance between calculated and measured Stokes vectors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stokes import StokesVector

NORMALIZED_TOL = 1e-12


class NotNormalizedError(ValueError):
    pass


@dataclass(frozen=True)
class NormResult:
    ds: float
    difference: StokesVector


def stokes_distance(s_c: StokesVector, s_m: StokesVector) -> NormResult:
    """dS = ||S_C - S_M|| over all four components; inputs must have s0 = 1."""
    for name, s in (("calculated", s_c), ("measured", s_m)):
        if abs(s.s0 - 1.0) > NORMALIZED_TOL:
            raise NotNormalizedError(f"{name} Stokes vector has s0={s.s0!r}; normalize first")
    diff = s_c.as_array() - s_m.as_array()
    return NormResult(float(np.sqrt(diff @ diff)), StokesVector.from_array(diff))


def ds(s_c: StokesVector, s_m: StokesVector) -> float:
    return stokes_distance(s_c, s_m).ds
