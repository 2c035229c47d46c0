"""Hexagonal (6mm) piezoelectric material constants.

The ten independent constants are stored in Voigt form. The 3-axis is the
c-axis / poling direction. Everything is SI: Pa, C/m^2, F/m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

KEYS = ("c11", "c33", "c44", "c66", "c13", "e15", "e31", "e33", "eta11", "eta33")

# Voigt index for each Cartesian pair
_VOIGT = np.array([[0, 5, 4],
                   [5, 1, 3],
                   [4, 3, 2]])


class ValidationError(ValueError):
    """Material constants violate a physical admissibility condition."""


class MaterialFileError(ValueError):
    """A material file could not be parsed."""


@dataclass(frozen=True)
class ValidationReport:
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "invalid: " + "; ".join(self.failures)


@dataclass(frozen=True)
class MaterialModuli:
    """Ten independent constants of a hexagonal piezoelectric medium.

    Attributes
    ----------
    c11, c33, c44, c66, c13 : float
        Elastic stiffnesses [Pa]. ``c12`` is derived as ``c11 - 2*c66``.
    e15, e31, e33 : float
        Piezoelectric stress constants [C/m^2].
    eta11, eta33 : float
        Dielectric permittivities [F/m].

    Construction does not validate; use :func:`validate` or
    :func:`load_material`, which refuses inadmissible constants.
    """

    c11: float
    c33: float
    c44: float
    c66: float
    c13: float
    e15: float = 0.0
    e31: float = 0.0
    e33: float = 0.0
    eta11: float = 1.0
    eta33: float = 1.0

    @property
    def c12(self) -> float:
        return self.c11 - 2.0 * self.c66

    @property
    def is_decoupled(self) -> bool:
        return self.e15 == 0.0 and self.e31 == 0.0 and self.e33 == 0.0

    def decoupled(self) -> MaterialModuli:
        """Copy with all piezoelectric constants set to zero."""
        return replace(self, e15=0.0, e31=0.0, e33=0.0)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def voigt_stiffness(self) -> np.ndarray:
        """6x6 Voigt stiffness matrix."""
        c = np.zeros((6, 6))
        c[0, 0] = c[1, 1] = self.c11
        c[0, 1] = c[1, 0] = self.c12
        c[0, 2] = c[2, 0] = c[1, 2] = c[2, 1] = self.c13
        c[2, 2] = self.c33
        c[3, 3] = c[4, 4] = self.c44
        c[5, 5] = self.c66
        return c

    def voigt_piezo(self) -> np.ndarray:
        """3x6 piezoelectric matrix e_{iA}."""
        e = np.zeros((3, 6))
        e[0, 4] = e[1, 3] = self.e15
        e[2, 0] = e[2, 1] = self.e31
        e[2, 2] = self.e33
        return e

    def scales(self) -> tuple[float, float, float]:
        """Characteristic (elastic, piezoelectric, dielectric) magnitudes.

        Geometric means of the positive diagonal constants; the piezo scale
        is ``sqrt(elastic * dielectric)`` so that rescaled constants are
        dimensionless and of order one.
        """
        s_c = (self.c11 * self.c33 * self.c44 * self.c66) ** 0.25
        s_eta = math.sqrt(self.eta11 * self.eta33)
        return s_c, math.sqrt(s_c * s_eta), s_eta

    def rescaled(self) -> MaterialModuli:
        """Dimensionless copy obtained by dividing by :meth:`scales`."""
        s_c, s_e, s_eta = self.scales()
        return MaterialModuli(
            c11=self.c11 / s_c, c33=self.c33 / s_c, c44=self.c44 / s_c,
            c66=self.c66 / s_c, c13=self.c13 / s_c,
            e15=self.e15 / s_e, e31=self.e31 / s_e, e33=self.e33 / s_e,
            eta11=self.eta11 / s_eta, eta33=self.eta33 / s_eta,
        )


@dataclass(frozen=True, eq=False)
class CartesianModuli:
    """Full index tensors ``c[i,p,j,q]``, ``e[p,i,q]`` and ``eta[p,q]``."""

    c: np.ndarray
    e: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        for arr in (self.c, self.e, self.eta):
            arr.setflags(write=False)

    @cached_property
    def generalized(self) -> np.ndarray:
        """Combined 4x3x4x3 moduli ``M[I,p,J,q]``.

        ``M[I,p,J,q] xi_p xi_q`` is the 4x4 symbol matrix: elastic block
        ``c_ipjq``, coupling ``e_piq`` and dielectric block ``-eta_pq``.
        """
        m = np.zeros((4, 3, 4, 3))
        m[:3, :, :3, :] = self.c
        coupling = np.transpose(self.e, (1, 0, 2))  # [i,p,q] = e_piq
        m[:3, :, 3, :] = coupling
        m[3, :, :3, :] = self.e  # [p,j,q] = e_pjq
        m[3, :, 3, :] = -self.eta
        m.setflags(write=False)
        return m

    def symbol(self, xi) -> np.ndarray:
        """Symbol matrix T(xi) for one wave vector or a stack ``(..., 3)``."""
        xi = np.asarray(xi, dtype=float)
        return np.einsum("IpJq,...p,...q->...IJ", self.generalized, xi, xi)

    def rotated(self, rot) -> CartesianModuli:
        """Tensors transformed by the orthogonal 3x3 matrix ``rot``."""
        r = np.asarray(rot, dtype=float)
        c = np.einsum("ia,pb,jc,qd,abcd->ipjq", r, r, r, r, self.c)
        e = np.einsum("pa,ib,qc,abc->piq", r, r, r, self.e)
        eta = r @ self.eta @ r.T
        return CartesianModuli(c, e, eta)


def validate(m: MaterialModuli) -> ValidationReport:
    """Check admissibility; never raises."""
    failures = []
    values = m.as_dict()
    bad = [k for k, v in values.items()
           if not isinstance(v, (int, float, np.floating)) or not math.isfinite(v)]
    if bad:
        return ValidationReport(tuple(f"{k} is not a finite number" for k in bad))
    if not m.eta11 > 0:
        failures.append(f"eta11 > 0 violated (eta11 = {m.eta11!r})")
    if not m.eta33 > 0:
        failures.append(f"eta33 > 0 violated (eta33 = {m.eta33!r})")
    if not m.c44 > 0:
        failures.append(f"c44 > 0 violated (c44 = {m.c44!r})")
    if not m.c66 > 0:
        failures.append(f"c66 > 0 violated (c66 = {m.c66!r})")
    if not m.c11 > m.c66:
        failures.append(f"c11 > c66 violated (c11 = {m.c11!r}, c66 = {m.c66!r})")
    if not m.c33 * (m.c11 + m.c12) > 2.0 * m.c13 ** 2:
        failures.append("c33*(c11 + c12) > 2*c13^2 violated")
    if not failures:
        eig = np.linalg.eigvalsh(m.voigt_stiffness())
        if not eig.min() > 0:
            failures.append(f"6x6 stiffness not positive definite (min eigenvalue {eig.min():.6g})")
    return ValidationReport(tuple(failures))


def require_valid(m: MaterialModuli) -> None:
    report = validate(m)
    if not report.ok:
        raise ValidationError(str(report))


def expand_voigt(m: MaterialModuli) -> CartesianModuli:
    """Full Cartesian tensors from the Voigt constants."""
    require_valid(m)
    cv = m.voigt_stiffness()
    ev = m.voigt_piezo()
    c = cv[_VOIGT[:, :, None, None], _VOIGT[None, None, :, :]]
    e = ev[:, _VOIGT]
    eta = np.diag([m.eta11, m.eta11, m.eta33])
    return CartesianModuli(c.copy(), e.copy(), eta)


def parse_material(text: str) -> MaterialModuli:
    """Parse ``key = value`` material text (``#`` starts a comment)."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MaterialFileError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in KEYS:
            raise MaterialFileError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise MaterialFileError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(value)
        except ValueError:
            raise MaterialFileError(f"line {lineno}: {key} has non-numeric value {value!r}") from None
    missing = [k for k in KEYS if k not in values]
    if missing:
        raise MaterialFileError("missing keys: " + ", ".join(missing))
    return MaterialModuli(**values)


def format_material(m: MaterialModuli) -> str:
    return "".join(f"{k} = {getattr(m, k)!r}\n" for k in KEYS)


def load_material(path) -> MaterialModuli:
    """Read and validate a material file."""
    m = parse_material(Path(path).read_text(encoding="utf-8"))
    require_valid(m)
    return m


def builtin_material(name: str) -> MaterialModuli:
    """One of the bundled material files (``"zno"``, ``"pzt4"``)."""
    text = resources.files("piezogreen.data").joinpath(f"{name}.mat").read_text(encoding="utf-8")
    m = parse_material(text)
    require_valid(m)
    return m


def reference_material() -> MaterialModuli:
    """ZnO, the default reference material used throughout the tests."""
    return builtin_material("zno")
