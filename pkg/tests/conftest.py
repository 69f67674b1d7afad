import numpy as np
import pytest
from hypothesis import strategies as st

from polarsim.stokes import StokesVector, from_sphere

angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi, allow_nan=False)
retardances = st.floats(min_value=0.0, max_value=2 * np.pi, allow_nan=False, exclude_max=True)


@st.composite
def pure_states(draw):
    """Fully polarized, normalized Stokes vectors."""
    v = np.array([draw(st.floats(-1, 1)) for _ in range(3)])
    if np.linalg.norm(v) < 1e-3:
        v = np.array([1.0, 0.0, 0.0])
    return from_sphere(v)


def random_pure_state(rng: np.random.Generator) -> StokesVector:
    return from_sphere(rng.standard_normal(3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def jones_retarder(delta: float, theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, s], [-s, c]])
    return rot.T @ np.diag([1.0, np.exp(1j * delta)]) @ rot


# Jones vector (Ex, Ey) -> Stokes via coherency vector; the sign of the third
# row is the handedness convention and is pinned by the intensity formula.
_A = np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1j, -1j, 0],
    ]
)


def mueller_from_jones(j: np.ndarray) -> np.ndarray:
    m = _A @ np.kron(j, j.conj()) @ np.linalg.inv(_A)
    assert np.allclose(m.imag, 0, atol=1e-12)
    return m.real


def stokes_from_jones(e: np.ndarray) -> np.ndarray:
    s = _A @ np.kron(e, e.conj())
    return s.real


# acceptance verdicts, echoed in the terminal summary so they show without -s
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
