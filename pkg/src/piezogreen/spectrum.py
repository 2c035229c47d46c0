"""Characteristic cubic and the four material roots A_1..A_4.

The determinant of the 4x4 symbol matrix at ``xi = (sqrt(a), 0, 1)`` factors
as ``c66 * (a + A_1) * P(a)`` with ``A_1 = c44/c66`` and
``P(a) = A a^3 + B a^2 + C a + D = A (a + A_2)(a + A_3)(a + A_4)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .materials import MaterialModuli, require_valid

DEGENERACY_THRESHOLD = 1e-8


class DegenerateSpectrum(ValueError):
    """Two material roots (nearly) coincide.

    The closed form is a sum of simple residues and assumes that the
    determinant has no multiple zeros; it is not evaluated in that case.
    """

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


def cubic_coefficients(m: MaterialModuli) -> tuple[float, float, float, float]:
    """Coefficients ``(A, B, C, D)`` of ``P(a) = A a^3 + B a^2 + C a + D``."""
    c11, c33, c44, c13 = m.c11, m.c33, m.c44, m.c13
    e15, e31, e33 = m.e15, m.e31, m.e33
    n11, n33 = m.eta11, m.eta33
    ee = e31 + e15
    cc = c13 + c44
    k = c11 * c33 - 2.0 * c13 * c44 - c13 ** 2
    coeff_a = -n11 * c11 * c44 - c11 * e15 ** 2
    coeff_b = (-n33 * c11 * c44 - n11 * k - c44 * e15 ** 2 - 2.0 * c11 * e15 * e33
               + 2.0 * cc * e15 * ee - c44 * ee ** 2)
    coeff_c = (-n33 * k - n11 * c33 * c44 - 2.0 * e15 * e33 * c44 - e33 ** 2 * c11
               + 2.0 * e33 * ee * cc - c33 * ee ** 2)
    coeff_d = -n33 * c33 * c44 - e33 ** 2 * c44
    return coeff_a, coeff_b, coeff_c, coeff_d


def _horner(coeffs, x):
    p = 0.0
    dp = 0.0
    for c in coeffs:
        dp = dp * x + p
        p = p * x + c
    return p, dp


def _polish(coeffs, x, steps=3):
    """Newton refinement, kept only while the residual shrinks."""
    p, dp = _horner(coeffs, x)
    for _ in range(steps):
        if p == 0 or dp == 0:
            break
        y = x - p / dp
        q, dq = _horner(coeffs, y)
        if abs(q) >= abs(p):
            break
        x, p, dp = y, q, dq
    return x


def solve_cubic(a, b, c, d) -> np.ndarray:
    """Roots of ``a x^3 + b x^2 + c x + d`` for real coefficients, ``a != 0``.

    Cardano / trigonometric form for one real root, deflation to a real
    quadratic for the other two, then Newton polish on the full cubic.
    Non-real roots are returned as an exact conjugate pair.
    """
    if a == 0:
        raise ZeroDivisionError("leading coefficient is zero")
    b, c, d = b / a, c / a, d / a
    # substitute x = k y with k a power of two (exact) so that y = O(1)
    size = max(abs(b), math.sqrt(abs(c)), abs(d) ** (1.0 / 3.0))
    if size == 0:
        return np.zeros(3, dtype=complex)
    k = 2.0 ** math.frexp(size)[1]
    return k * _solve_monic(b / k, c / k / k, d / k / k / k)


def _solve_monic(b, c, d) -> np.ndarray:
    mono = (1.0, b, c, d)
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0:
        u = np.cbrt(-q / 2.0 - math.copysign(math.sqrt(disc), q))
        t = u - p / (3.0 * u) if u != 0 else 0.0
    elif p < 0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        theta = math.acos(min(1.0, max(-1.0, arg)))
        # largest-magnitude root of the three
        if theta <= math.pi / 2.0:
            t = m * math.cos(theta / 3.0)
        else:
            t = m * math.cos(theta / 3.0 + 2.0 * math.pi / 3.0)
    else:
        t = 0.0
    x0 = _polish(mono, t - shift)

    # x^3 + b x^2 + c x + d = (x - x0)(x^2 + beta x + gamma)
    beta = b + x0
    # -d/x0 inherits the relative accuracy of x0; c + x0 beta may cancel
    gamma = -d / x0 if x0 != 0 else c
    qd = beta * beta - 4.0 * gamma
    if qd >= 0:
        s = -(beta + math.copysign(math.sqrt(qd), beta)) / 2.0
        x1 = s
        x2 = gamma / s if s != 0 else 0.0
        x1 = _polish(mono, x1)
        x2 = _polish(mono, x2)
        roots = [complex(x0), complex(x1), complex(x2)]
    else:
        z = complex(-beta / 2.0, math.sqrt(-qd) / 2.0)
        z = _polish(mono, z)
        z = complex(z.real, abs(z.imag))
        roots = [complex(x0), z, z.conjugate()]
    return np.array(roots, dtype=complex)


def _sorted(roots):
    roots = np.asarray(roots, dtype=complex)
    return roots[np.lexsort((roots.imag, roots.real))]


def degeneracy_gap(roots) -> float:
    """``min |A_j - A_l| / max |A_l|`` over distinct pairs."""
    roots = np.asarray(roots, dtype=complex)
    diff = np.abs(roots[:, None] - roots[None, :])
    iu = np.triu_indices(len(roots), 1)
    return float(diff[iu].min() / np.abs(roots).max())


@dataclass(frozen=True, eq=False)
class CharacteristicSpectrum:
    """Cubic coefficients (SI) and the four roots ``A_1..A_4``.

    ``roots[0]`` is ``c44/c66``; ``roots[1:]`` solve
    ``A a^3 - B a^2 + C a - D = 0`` and are ordered by ascending real part,
    then ascending imaginary part.
    """

    coefficients: tuple[float, float, float, float]
    roots: np.ndarray
    degeneracy_gap: float

    def __post_init__(self):
        self.roots.setflags(write=False)

    @property
    def coeffA(self):
        return self.coefficients[0]

    @property
    def coeffB(self):
        return self.coefficients[1]

    @property
    def coeffC(self):
        return self.coefficients[2]

    @property
    def coeffD(self):
        return self.coefficients[3]

    @property
    def a1(self):
        return self.roots[0]

    @property
    def a2(self):
        return self.roots[1]

    @property
    def a3(self):
        return self.roots[2]

    @property
    def a4(self):
        return self.roots[3]

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.roots.imag == 0))

    @property
    def degenerate(self) -> bool:
        return self.degeneracy_gap < DEGENERACY_THRESHOLD

    def denominators(self) -> np.ndarray:
        """``prod_{j != l} (A_j - A_l)`` for each l."""
        a = self.roots
        return np.array([np.prod([a[j] - a[l] for j in range(4) if j != l]) for l in range(4)])


def solve_spectrum(m: MaterialModuli, *, min_gap: float = DEGENERACY_THRESHOLD) -> CharacteristicSpectrum:
    """Solve the characteristic cubic of ``m``.

    The roots are computed from the coefficients of the rescaled
    (dimensionless) material; they are invariant under that rescaling.

    Raises
    ------
    DegenerateSpectrum
        If the relative gap between two of the four roots is below ``min_gap``.
    """
    require_valid(m)
    coeffs = cubic_coefficients(m)
    sa, sb, sc, sd = cubic_coefficients(m.rescaled())
    cubic = solve_cubic(sa, -sb, sc, -sd)
    roots = np.concatenate([[complex(m.c44 / m.c66)], _sorted(cubic)])
    spec = CharacteristicSpectrum(coeffs, roots, degeneracy_gap(roots))
    if spec.degeneracy_gap < min_gap:
        raise DegenerateSpectrum(
            f"material roots nearly coincide (relative gap {spec.degeneracy_gap:.3e} < {min_gap:g}); "
            "the closed form assumes four distinct roots (no multiple zeros of the determinant)",
            spec,
        )
    return spec


def residue_zero_diagnostic(spec: CharacteristicSpectrum, rho: float, z: float) -> np.ndarray:
    """Zeros ``s_l = (R_l - r)/(R_l + r)`` with ``R_l = sqrt(A_l rho^2 + z^2)``.

    ``R_l`` is taken on the principal branch; every ``|s_l|`` must be < 1.
    """
    r = math.hypot(rho, z)
    if r == 0:
        raise ValueError("residue zeros are undefined at the origin")
    out = np.empty(4, dtype=complex)
    for l, a in enumerate(spec.roots):
        big_r = cmath.sqrt(a * rho * rho + z * z)
        out[l] = (big_r - r) / (big_r + r)
    return out
