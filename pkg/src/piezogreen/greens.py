"""Closed-form electroelastic Green's function of the hexagonal medium.

For every off-origin point the 4x4 Green's matrix is a sum over the four
material roots ``A_l``::

    G = sum_l  g^(l)(x, y, z) / sqrt(A_l rho^2 + z^2),
    g^(l) built from kernel values K(-A_l) / E_l,
    E_l = 4 pi c66 A prod_{j != l} (A_j - A_l).

The square root is taken on the principal branch, so conjugate roots give
conjugate summands and the sum is real.

Terms carrying the quadratic kernels ``Gamma_b, Gamma_bc, Gamma_b4`` come
with explicit ``1/rho^2`` factors. Their weights w_l = Gamma(-A_l)/E_l
satisfy ``sum_l w_l = 0`` exactly (divided difference of a quadratic over
four nodes), hence

    sum_l w_l / R_l = rho^2 * sum_l w_l (1 - A_l) / (R_l r (r + R_l)),

which is what is evaluated here: identical to the textbook sums, but free
of cancellation as rho -> 0. The in-plane shear entry ``G12`` vanishes like
``rho^2`` on the axis; with ``f(A) = (A rho^2 + 2 z^2)/R = R + z^2/R`` its
sum ``sum_l w_l f(A_l) = sum_l w_l (f(A_l) - f(1))`` is evaluated as

    f(A) - f(1) = (A - 1) rho^4 (A rho^2 + (A + 1) z^2) / ((R + r)(R r + z^2) R r),

so that ``G12`` keeps full relative accuracy as well.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .kernels import KernelSet
from .materials import MaterialModuli, expand_voigt
from .oracle import DEFAULT_NODES, OriginSingularity, integrate, symmetrized
from .spectrum import CharacteristicSpectrum, DegenerateSpectrum, solve_spectrum

EPS_AXIS = 1e-4
IMAG_TOL = 1e-10
CHUNK = 4096

_KERNELS = ("Lambda_bperp", "Lambda_b", "Lambda_c", "Lambda_c4", "Lambda_4",
            "Gamma_b", "Gamma_bc", "Gamma_b4")


class RealnessError(ArithmeticError):
    """The root sum has a non-negligible imaginary part."""


@dataclass(frozen=True)
class CylindricalComponents:
    """Green's function on the (e_rho, e_phi, e_z, e_4) frame."""

    G_phiphi: float
    G_rhorho: float
    G_rhoz: float
    G_zz: float
    G_rho4: float
    G_z4: float
    G_44: float
    rho: float
    z: float

    def assemble(self, phi: float = 0.0) -> np.ndarray:
        """Cartesian 4x4 matrix at azimuth ``phi``."""
        c, s = np.cos(phi), np.sin(phi)
        e_rho = np.array([c, s, 0.0, 0.0])
        e_phi = np.array([-s, c, 0.0, 0.0])
        e_z = np.array([0.0, 0.0, 1.0, 0.0])
        e_4 = np.array([0.0, 0.0, 0.0, 1.0])

        def sym(u, v):
            return np.outer(u, v) + np.outer(v, u)

        return (self.G_phiphi * np.outer(e_phi, e_phi) + self.G_rhorho * np.outer(e_rho, e_rho)
                + self.G_rhoz * sym(e_rho, e_z) + self.G_zz * np.outer(e_z, e_z)
                + self.G_rho4 * sym(e_rho, e_4) + self.G_z4 * sym(e_z, e_4)
                + self.G_44 * np.outer(e_4, e_4))


def thread_count() -> int:
    """Worker cap from ``PIEZOGREEN_THREADS`` (unset or 0 means all cores)."""
    raw = os.environ.get("PIEZOGREEN_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"PIEZOGREEN_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("PIEZOGREEN_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _real(terms, name):
    """Sum the four root terms (in order) and drop a roundoff-level imaginary part."""
    total = terms[..., 0] + terms[..., 1] + terms[..., 2] + terms[..., 3]
    if np.iscomplexobj(total):
        size = np.abs(terms).sum(-1)
        bad = np.abs(total.imag) > IMAG_TOL * size
        if np.any(bad):
            i = np.flatnonzero(bad.ravel())[0]
            raise RealnessError(
                f"{name}: imaginary part {total.imag.ravel()[i]:.3e} exceeds "
                f"{IMAG_TOL:g} x {size.ravel()[i]:.3e}")
        total = total.real
    return total


class GreensFunction:
    """Evaluator for one material; holds only immutable precomputed data.

    Parameters
    ----------
    moduli : MaterialModuli
    spectrum : CharacteristicSpectrum, optional
        Computed from ``moduli`` when omitted.
    eps_axis : float
        Points with ``rho/r < eps_axis`` are evaluated by the quadrature
        oracle instead of the closed form (set 0 to disable).
    oracle_nodes : int
        Trapezoid nodes for those points.
    """

    def __init__(self, moduli: MaterialModuli, spectrum: CharacteristicSpectrum | None = None,
                 *, eps_axis: float = EPS_AXIS, oracle_nodes: int = DEFAULT_NODES):
        if spectrum is None:
            spectrum = solve_spectrum(moduli)
        elif spectrum.degenerate:
            raise DegenerateSpectrum(
                f"relative root gap {spectrum.degeneracy_gap:.3e}; the closed form assumes "
                "four distinct roots", spectrum)
        self.moduli = moduli
        self.spectrum = spectrum
        self.cartesian = expand_voigt(moduli)
        self.eps_axis = eps_axis
        self.oracle_nodes = oracle_nodes

        roots = spectrum.roots
        kernels = KernelSet(moduli)
        energy = 4.0 * np.pi * moduli.c66 * spectrum.coeffA * spectrum.denominators()
        self.roots = roots.copy()
        self.weights = {k: getattr(kernels, k)(-roots) / energy for k in _KERNELS}
        self._ua = self.weights["Gamma_b"] * roots
        for arr in (self.roots, self._ua, *self.weights.values()):
            arr.setflags(write=False)

    # --- root sums -------------------------------------------------------

    def _sums(self, rho, z):
        rho = np.asarray(rho, dtype=float)[..., None]
        z = np.asarray(z, dtype=float)[..., None]
        a = self.roots
        r = np.sqrt(rho * rho + z * z)
        big_r = np.sqrt(a * (rho * rho) + z * z + 0j)
        inv_r = 1.0 / big_r
        damp = (1.0 - a) / (big_r * r * (r + big_r))
        shear = (a - 1.0) * (a * (rho * rho) + (a + 1.0) * (z * z)) / (
            (big_r + r) * (big_r * r + z * z) * big_r * r)
        w = self.weights
        return {
            "S_bperp": _real(w["Lambda_bperp"] * inv_r, "Lambda_bperp"),
            "S_b": _real(w["Lambda_b"] * inv_r, "Lambda_b"),
            "S_c": _real(w["Lambda_c"] * inv_r, "Lambda_c"),
            "S_c4": _real(w["Lambda_c4"] * inv_r, "Lambda_c4"),
            "S_4": _real(w["Lambda_4"] * inv_r, "Lambda_4"),
            "U": _real(self._ua * inv_r, "A*Gamma_b"),
            "Q_b": _real(w["Gamma_b"] * damp, "Gamma_b"),
            "V": _real(w["Gamma_b"] * shear, "Gamma_b shear"),
            "Q_bc": _real(w["Gamma_bc"] * damp, "Gamma_bc"),
            "Q_b4": _real(w["Gamma_b4"] * damp, "Gamma_b4"),
        }

    # --- cylindrical -----------------------------------------------------

    def cylindrical(self, rho: float, z: float) -> CylindricalComponents:
        """The seven scalar components at cylindrical coordinates ``(rho, z)``."""
        rho = float(rho)
        z = float(z)
        if rho < 0:
            raise ValueError("rho must be non-negative")
        if rho == 0 and z == 0:
            raise OriginSingularity("Green's function is singular at the origin")
        s = {k: float(v) for k, v in self._sums(rho, z).items()}
        return CylindricalComponents(
            G_phiphi=s["S_b"] + z * z * s["Q_b"],
            G_rhorho=s["S_bperp"] - z * z * s["Q_b"],
            G_rhoz=-z * rho * s["Q_bc"],
            G_zz=s["S_c"],
            G_rho4=-z * rho * s["Q_b4"],
            G_z4=s["S_c4"],
            G_44=s["S_4"],
            rho=rho, z=z,
        )

    # --- cartesian -------------------------------------------------------

    def closed_form(self, points) -> np.ndarray:
        """Closed form at every point of an ``(N, 3)`` array (no axis switch)."""
        p = np.asarray(points, dtype=float).reshape(-1, 3)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        rho = np.hypot(x, y)
        on_axis = rho == 0
        safe = np.where(on_axis, 1.0, rho)
        c = np.where(on_axis, 1.0, x / safe)
        s = np.where(on_axis, 0.0, y / safe)
        t = self._sums(rho, z)
        zz = z * z
        zr = z * rho
        cc_ss = c * c - s * s
        g = np.empty((len(p), 4, 4))
        g[:, 0, 0] = t["S_bperp"] - cc_ss * zz * t["Q_b"] + s * s * t["U"]
        g[:, 1, 1] = t["S_bperp"] + cc_ss * zz * t["Q_b"] + c * c * t["U"]
        g[:, 0, 1] = g[:, 1, 0] = -c * s * rho * rho * t["V"]
        g[:, 0, 2] = g[:, 2, 0] = -c * zr * t["Q_bc"]
        g[:, 1, 2] = g[:, 2, 1] = -s * zr * t["Q_bc"]
        g[:, 2, 2] = t["S_c"]
        g[:, 0, 3] = g[:, 3, 0] = -c * zr * t["Q_b4"]
        g[:, 1, 3] = g[:, 3, 1] = -s * zr * t["Q_b4"]
        g[:, 2, 3] = g[:, 3, 2] = t["S_c4"]
        g[:, 3, 3] = t["S_4"]
        return g

    def _evaluate_chunk(self, p, offset=0):
        r = np.sqrt((p * p).sum(-1))
        zero = np.flatnonzero(r == 0)
        if len(zero):
            raise OriginSingularity(f"point {offset + zero[0]} is at the origin")
        g = self.closed_form(p)
        near = np.flatnonzero(np.hypot(p[:, 0], p[:, 1]) < self.eps_axis * r)
        for i in near:
            g[i] = integrate(self.cartesian, p[i], self.oracle_nodes)
        return g

    def evaluate(self, points, threads: int | None = None) -> np.ndarray:
        """Green's matrices ``(N, 4, 4)`` at ``(N, 3)`` points, in input order."""
        p = np.asarray(points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(p)):
            raise ValueError("points must be finite")
        if threads is None:
            threads = thread_count()
        if threads <= 1 or len(p) <= CHUNK:
            return self._evaluate_chunk(p)
        starts = range(0, len(p), CHUNK)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda i: self._evaluate_chunk(p[i:i + CHUNK], i), starts))
        return np.concatenate(parts)

    def __call__(self, x, y=None, z=None) -> np.ndarray:
        """4x4 Green's matrix at one point, given as ``(x, y, z)`` or a 3-vector."""
        point = np.array([x, y, z], dtype=float) if y is not None else np.asarray(x, dtype=float)
        return self.evaluate(point.reshape(1, 3), threads=1)[0]

    def residue_zeros(self, rho, z):
        from .spectrum import residue_zero_diagnostic

        return residue_zero_diagnostic(self.spectrum, rho, z)


@lru_cache(maxsize=16)
def _evaluator(m: MaterialModuli, spec: CharacteristicSpectrum | None) -> GreensFunction:
    return GreensFunction(m, spec)


def eval_cylindrical(m: MaterialModuli, spec: CharacteristicSpectrum | None, rho: float, z: float) -> CylindricalComponents:
    return _evaluator(m, spec).cylindrical(rho, z)


def eval_cartesian(m: MaterialModuli, spec: CharacteristicSpectrum | None, x: float, y: float, z: float) -> np.ndarray:
    return _evaluator(m, spec)(x, y, z)


def eval_batch(m: MaterialModuli, spec: CharacteristicSpectrum | None, points, threads: int | None = None) -> np.ndarray:
    return _evaluator(m, spec).evaluate(points, threads)


def upper_triangle(g) -> np.ndarray:
    """The 10 entries ``G11, G12, G13, G14, G22, ..., G44`` (row-major)."""
    iu = np.triu_indices(4)
    return np.asarray(g)[..., iu[0], iu[1]]


UPPER_LABELS = tuple(f"G{i + 1}{j + 1}" for i, j in zip(*np.triu_indices(4)))
