"""Reference formulas for vanishing piezoelectric coupling.

With e = 0 the symbol matrix is block diagonal: the elastic 3x3 block gives
Kroener's Green's tensor of the hexagonal medium, and the dielectric entry
gives the potential of a point charge in a uniaxial dielectric,

    G44 = -1 / (4 pi eta11 sqrt(a4 rho^2 + z^2)),   a4 = eta33/eta11.

Kroener's denominators are used in corrected form,
``E_l = 4 pi c11 c44 c66 prod_{j != l} (a_j - a_l)``; the original
definition lacks the factor ``-c11 c44 c66``.

Everything here is computed from the elastic/dielectric constants directly,
independent of the coupled spectrum and kernel machinery.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .materials import MaterialModuli, require_valid
from .spectrum import DEGENERACY_THRESHOLD, DegenerateSpectrum, degeneracy_gap


def _require_decoupled(m: MaterialModuli):
    if not m.is_decoupled:
        raise ValueError("decoupled reference needs e15 = e31 = e33 = 0")


def elastic_roots(m: MaterialModuli) -> np.ndarray:
    """``a1 = c44/c66`` and the two zeros of
    ``c11 c44 a^2 + (c13^2 + 2 c13 c44 - c11 c33) a + c33 c44``.

    The quadratic's zeros are real for many materials but a complex
    conjugate pair is admissible as well.
    """
    qa = m.c11 * m.c44
    qb = m.c13 ** 2 + 2.0 * m.c13 * m.c44 - m.c11 * m.c33
    qc = m.c33 * m.c44
    disc = qb * qb - 4.0 * qa * qc
    if disc >= 0:
        big = -(qb + np.copysign(np.sqrt(disc), qb)) / 2.0
        pair = [big / qa, qc / big]
    else:
        re = -qb / (2.0 * qa)
        im = np.sqrt(-disc) / (2.0 * qa)
        pair = [complex(re, -im), complex(re, im)]
    roots = np.array([m.c44 / m.c66, *pair], dtype=complex)
    return roots


def dielectric_root(m: MaterialModuli) -> float:
    return m.eta33 / m.eta11


@dataclass(frozen=True, eq=False)
class KroenerConstants:
    """Per-root constants ``script_A_l, B_l, C_l, D_l, E_l`` (l = 1, 2, 3)."""

    roots: np.ndarray
    script_a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray = field(repr=False)


def kroener_constants(m: MaterialModuli) -> KroenerConstants:
    _require_decoupled(m)
    require_valid(m)
    a = elastic_roots(m)
    gap = degeneracy_gap(a)
    if gap < DEGENERACY_THRESHOLD:
        raise DegenerateSpectrum(f"elastic roots nearly coincide (relative gap {gap:.3e})")
    c11, c33, c44, c66, c13 = m.c11, m.c33, m.c44, m.c66, m.c13
    prod = np.array([np.prod([a[j] - a[l] for j in range(3) if j != l]) for l in range(3)])
    e = 4.0 * np.pi * c11 * c44 * c66 * prod
    script_a = ((c66 - c11) * (c33 - a * c44) + (c13 + c44) ** 2) / e
    b = (c11 * c44 * a ** 2 + (c13 ** 2 + 2.0 * c13 * c44 - c11 * c33) * a + c33 * c44) / e
    c = (c44 - a * c66) * (c13 + c44) / e
    d = (c44 - a * c66) * (c44 - a * c11) / e
    return KroenerConstants(a, script_a, b, c, d, e)


def kroener_tensor(m: MaterialModuli, r) -> np.ndarray:
    """Elastic 3x3 Green's tensor, ``(3, 3)`` or ``(N, 3, 3)`` for ``(N, 3)`` input.

    The formula has explicit ``1/rho^2`` and ``1/rho^4`` factors, so points
    on the z-axis are rejected.
    """
    k = kroener_constants(m)
    p = np.asarray(r, dtype=float)
    single = p.ndim == 1
    p = p.reshape(-1, 3)
    x, y, z = (p[:, i, None] for i in range(3))
    rho2 = x * x + y * y
    if np.any(rho2 == 0):
        raise ValueError("Kroener's formula is singular on the z-axis (rho = 0)")
    a = k.roots
    r2 = a * rho2 + z * z
    w = 1.0 / np.sqrt(r2 + 0j)
    rho4 = rho2 * rho2
    terms = np.empty((len(p), 3, 3, 3), dtype=complex)
    terms[:, 0, 0] = k.script_a * (x * x * z * z - y * y * r2) / rho4 + k.b
    terms[:, 1, 1] = k.script_a * (y * y * z * z - x * x * r2) / rho4 + k.b
    terms[:, 0, 1] = terms[:, 1, 0] = k.script_a * x * y * (a * rho2 + 2.0 * z * z) / rho4
    terms[:, 0, 2] = terms[:, 2, 0] = k.c * x * z / rho2
    terms[:, 1, 2] = terms[:, 2, 1] = k.c * y * z / rho2
    terms[:, 2, 2] = k.d
    g = (terms * w[:, None, None, :]).sum(-1)
    size = (np.abs(terms) * np.abs(w)[:, None, None, :]).sum(-1)
    if np.any(np.abs(g.imag) > 1e-10 * size):
        raise ArithmeticError("Kroener sum is not real")
    g = g.real
    return g[0] if single else g


def poisson_kernel(eta11: float, eta33: float, r) -> np.ndarray | float:
    """Potential of a unit point charge, ``-1/(4 pi eta11 sqrt(a4 rho^2 + z^2))``.

    The sign follows the generalized force ``(K, -rho_e)``: the potential of
    a positive charge is ``-G44``.
    """
    if not (eta11 > 0 and eta33 > 0):
        raise ValueError("permittivities must be positive")
    p = np.asarray(r, dtype=float)
    rho2 = p[..., 0] ** 2 + p[..., 1] ** 2
    z2 = p[..., 2] ** 2
    if np.any(rho2 + z2 == 0):
        raise ValueError("point-charge potential is singular at the origin")
    a4 = eta33 / eta11
    out = -1.0 / (4.0 * np.pi * eta11 * np.sqrt(a4 * rho2 + z2))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)

    def __str__(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.3e} (tol {self.tol:g})"


@dataclass(frozen=True)
class ConsistencyReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self):
        return "\n".join(str(c) for c in self.checks)


_PROBE_POINTS = np.array([[1.0, 0.0, 0.5], [0.3, -0.7, 0.2], [-0.4, 0.1, -1.3],
                          [0.0, 2.0, 0.0], [0.9, 0.9, 0.9], [-1.1, -0.2, 0.05]])


def decoupled_consistency(m: MaterialModuli, tol: float = 1e-10) -> ConsistencyReport:
    """Check the zero-coupling properties of the full closed form.

    (i) coupling entries ``G_j4`` of the full evaluator vanish;
    (ii) the dielectric root ``a4`` drops out of the elastic kernels;
    (iii) the elastic roots drop out of ``Lambda_4``;
    (iv) ``Lambda_4(-a4)/E_4 = -1/(4 pi eta11)``.
    """
    from .greens import GreensFunction
    from .kernels import KernelSet

    _require_decoupled(m)
    require_valid(m)
    checks = []

    g = GreensFunction(m).evaluate(_PROBE_POINTS, threads=1)
    d = np.sqrt(np.abs(np.diagonal(g, axis1=1, axis2=2)))
    coupling = np.abs(g[:, :3, 3]) / (d[:, :3] * d[:, 3:4])
    checks.append(Check("G_j4 = 0 (j = 1..3)", float(coupling.max()), tol))

    roots = np.concatenate([elastic_roots(m), [dielectric_root(m)]])
    gap = degeneracy_gap(roots)
    if gap < DEGENERACY_THRESHOLD:
        raise DegenerateSpectrum(f"decoupled roots nearly coincide (relative gap {gap:.3e})")
    k = KernelSet(m)
    lead = -m.eta11 * m.c11 * m.c44
    prod = np.array([np.prod([roots[j] - roots[l] for j in range(4) if j != l]) for l in range(4)])
    energy = 4.0 * np.pi * m.c66 * lead * prod

    worst = 0.0
    for name in ("Lambda_bperp", "Lambda_b", "Gamma_b", "Gamma_bc", "Lambda_c"):
        vals = np.abs(getattr(k, name)(-roots) / energy)
        worst = max(worst, vals[3] / vals[:3].max())
    checks.append(Check("a4 term absent from elastic block", float(worst), tol))

    l4 = np.abs(k.Lambda_4(-roots) / energy)
    checks.append(Check("a1..a3 terms absent from G44", float(l4[:3].max() / l4[3]), tol))

    ratio = (k.Lambda_4(-roots[3]) / energy[3]).real
    expected = -1.0 / (4.0 * np.pi * m.eta11)
    checks.append(Check("Lambda_4(-a4)/E_4 = -1/(4 pi eta11)", float(abs(ratio - expected) / abs(expected)), tol))
    return ConsistencyReport(tuple(checks))
