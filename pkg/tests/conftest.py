import math

import numpy as np
import pytest

from piezogreen.greens import GreensFunction
from piezogreen.materials import MaterialModuli, builtin_material, validate
from piezogreen.spectrum import DegenerateSpectrum, solve_spectrum


def random_material(rng, coupled=True, min_gap=1e-3):
    """Admissible hexagonal material with O(1) constants in SI-like magnitudes."""
    while True:
        c66 = rng.uniform(0.3, 2.0)
        c11 = c66 * rng.uniform(1.2, 4.0)
        c44 = rng.uniform(0.3, 2.0)
        c33 = rng.uniform(0.5, 3.0)
        c12 = c11 - 2.0 * c66
        c13 = rng.uniform(-0.9, 0.9) * math.sqrt(c33 * (c11 + c12) / 2.0)
        e15, e31, e33 = rng.normal(scale=0.7, size=3) if coupled else (0.0, 0.0, 0.0)
        m = MaterialModuli(
            c11=c11 * 1e10, c33=c33 * 1e10, c44=c44 * 1e10, c66=c66 * 1e10, c13=c13 * 1e10,
            e15=float(e15), e31=float(e31), e33=float(e33),
            eta11=rng.uniform(0.3, 3.0) * 1e-10, eta33=rng.uniform(0.3, 3.0) * 1e-10,
        )
        if not validate(m):
            continue
        try:
            solve_spectrum(m, min_gap=min_gap)
        except DegenerateSpectrum:
            continue
        return m


def random_points(rng, n, rmin=0.2, rmax=5.0):
    d = rng.standard_normal((n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * rng.uniform(rmin, rmax, size=(n, 1))


def rot_z(phi):
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@pytest.fixture(scope="session")
def zno():
    return builtin_material("zno")


@pytest.fixture(scope="session")
def pzt4():
    return builtin_material("pzt4")


@pytest.fixture(scope="session")
def green(zno):
    return GreensFunction(zno)


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


# one summary line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    def record(number, title, value, tol, passed=None):
        ok = bool(value <= tol) if passed is None else bool(passed)
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}: {value:.3e} (tol {tol:g})"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
