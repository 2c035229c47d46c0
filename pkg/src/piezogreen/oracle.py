"""Green's function by direct angular quadrature.

    G(r) = 1/(8 pi^2 |r|) * int_0^{2 pi} T(xi(alpha))^{-1} d alpha,
    xi(alpha) = e1 cos(alpha) + e2 sin(alpha),

where (e1, e2) span the plane normal to r. The integrand is smooth and
2pi-periodic, so the trapezoid rule on equispaced nodes converges
geometrically. Only the full Cartesian moduli are used here, never the
material roots or kernel polynomials.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .materials import CartesianModuli

log = logging.getLogger(__name__)

DEFAULT_NODES = 2048
COND_WARN = 1e12
ON_AXIS = 1e-12


class OriginSingularity(ValueError):
    """The Green's function is singular at r = 0."""


@dataclass(frozen=True, eq=False)
class AngularFrame:
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    rho: float
    r: float


def frame_at(r) -> AngularFrame:
    """Orthonormal right-handed frame with ``e3 = r/|r|``.

    Off the z-axis ``e1`` is the azimuthal direction and ``e2`` lies in the
    meridian plane. On the axis ``e1`` is ``(1, 0, 0)`` made orthogonal to
    ``e3`` and ``e2 = e3 x e1``.
    """
    x, y, z = (float(v) for v in r)
    rho = float(np.hypot(x, y))
    rr = float(np.sqrt(rho * rho + z * z))
    if rr == 0:
        raise OriginSingularity("frame undefined at the origin")
    e3 = np.array([x, y, z]) / rr
    if rho / rr < ON_AXIS:
        e1 = np.array([1.0, 0.0, 0.0]) - e3[0] * e3
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(e3, e1)
    else:
        e1 = np.array([-y, x, 0.0]) / rho
        e2 = np.array([-z * x, -z * y, rho * rho]) / (rho * rr)
    return AngularFrame(e1, e2, e3, rho, rr)


def nodes(n_nodes: int) -> np.ndarray:
    if n_nodes < 8 or n_nodes % 2:
        raise ValueError(f"n_nodes must be even and >= 8, got {n_nodes}")
    return 2.0 * np.pi * np.arange(n_nodes) / n_nodes


def integrate(cm: CartesianModuli, r, n_nodes: int = DEFAULT_NODES) -> np.ndarray:
    """4x4 Green's function at ``r`` by ``n_nodes``-point trapezoid quadrature."""
    fr = frame_at(r)
    alpha = nodes(n_nodes)
    xi = np.cos(alpha)[:, None] * fr.e1 + np.sin(alpha)[:, None] * fr.e2
    t = cm.symbol(xi)
    try:
        inv = np.linalg.inv(t)
    except np.linalg.LinAlgError:
        dets = np.linalg.det(t)
        k = int(np.argmin(np.abs(dets)))
        raise np.linalg.LinAlgError(f"singular symbol matrix at node {k} (alpha = {alpha[k]:.6g})") from None
    if log.isEnabledFor(logging.WARNING):
        # inf-norm condition number after symmetric diagonal scaling (the raw
        # SI blocks differ by ~20 orders of magnitude)
        d = 1.0 / np.sqrt(np.abs(np.diagonal(t, axis1=1, axis2=2)))
        dd = d[:, :, None] * d[:, None, :]
        cond = np.abs(t * dd).sum(-1).max(-1) * np.abs(inv / dd).sum(-1).max(-1)
        k = int(np.argmax(cond))
        if cond[k] > COND_WARN:
            log.warning("symbol matrix condition number %.3e at node %d", cond[k], k)
    g = inv.sum(axis=0) * (2.0 * np.pi / n_nodes) / (8.0 * np.pi ** 2 * fr.r)
    return symmetrized(g)


def symmetrized(g, tol=1e-10) -> np.ndarray:
    """``(G + G^T)/2``; an asymmetry above ``tol`` (diagonal-scaled) is an error."""
    gs = 0.5 * (g + np.swapaxes(g, -1, -2))
    if np.any(gs != g) and scaled_deviation(g, gs) > tol:
        raise ArithmeticError(f"Green's matrix asymmetric beyond {tol:g}")
    return gs


def integrate_many(cm: CartesianModuli, points, n_nodes: int = DEFAULT_NODES) -> np.ndarray:
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    return np.stack([integrate(cm, p, n_nodes) for p in points]) if len(points) else np.zeros((0, 4, 4))


def scaled_deviation(g, ref) -> float:
    """Largest entrywise deviation, each entry scaled by ``sqrt(|ref_pp ref_qq|)``.

    The blocks of G carry different units (m/N, m/C, V m/C), so plain
    relative errors are either dominated by one block or blow up at entries
    that vanish by symmetry. The diagonal scaling is unit-consistent.
    """
    g = np.asarray(g)
    ref = np.asarray(ref)
    d = np.sqrt(np.abs(np.diagonal(ref, axis1=-2, axis2=-1)))
    scale = d[..., :, None] * d[..., None, :]
    return float(np.max(np.abs(g - ref) / scale))
