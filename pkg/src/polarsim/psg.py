"""Polarization state generator: PBS, then a motorized QWP, then a motorized HWP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stokes import H, StokesVector, apply, compose, half_wave_plate, normalize, quarter_wave_plate


@dataclass(frozen=True)
class WaveplateSetting:
    theta_qwp: float
    theta_hwp: float

    @classmethod
    def from_degrees(cls, qwp_deg: float, hwp_deg: float) -> "WaveplateSetting":
        return cls(float(np.deg2rad(qwp_deg)), float(np.deg2rad(hwp_deg)))

    def degrees(self) -> tuple[float, float]:
        return float(np.rad2deg(self.theta_qwp)), float(np.rad2deg(self.theta_hwp))


#: the two states of the switching-time study
STATE_I = WaveplateSetting(0.0, 0.0)
STATE_II = WaveplateSetting(np.pi / 16, np.pi / 16)


def expected_state(setting: WaveplateSetting) -> StokesVector:
    """Stokes vector leaving the generator, S_C = M_HWP . M_QWP . S_H."""
    chain = compose([quarter_wave_plate(setting.theta_qwp), half_wave_plate(setting.theta_hwp)])
    return normalize(apply(chain, H))


def state_grid(n_qwp: int, n_hwp: int, max_angle: float) -> list[WaveplateSetting]:
    """QWP-major Cartesian grid, each axis spanning [0, max_angle] inclusive."""
    if n_qwp < 1 or n_hwp < 1:
        raise ValueError("grid needs at least one value per axis")
    qwp = np.linspace(0.0, max_angle, n_qwp) if n_qwp > 1 else np.zeros(1)
    hwp = np.linspace(0.0, max_angle, n_hwp) if n_hwp > 1 else np.zeros(1)
    return [WaveplateSetting(float(q), float(h)) for q in qwp for h in hwp]
