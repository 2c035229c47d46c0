"""Finite-difference residual of the field equations applied to G.

Off the origin every column of G solves ``T(grad) G = 0``. Second-order
central differences leave an O(h^2) truncation residual, so halving h
should cut the residual by four.
"""
from __future__ import annotations

import numpy as np

_UNIT = np.eye(3)


def hessian_fd(f, point, h: float) -> np.ndarray:
    """Central-difference Hessian ``H[p, q, ...]`` of ``f`` at ``point``.

    ``f`` maps an ``(N, 3)`` array of points to an ``(N, ...)`` array.
    """
    x0 = np.asarray(point, dtype=float)
    stencil = [x0]
    for p in range(3):
        stencil += [x0 + h * _UNIT[p], x0 - h * _UNIT[p]]
    pairs = [(p, q) for p in range(3) for q in range(p + 1, 3)]
    for p, q in pairs:
        for sp in (1, -1):
            for sq in (1, -1):
                stencil.append(x0 + h * (sp * _UNIT[p] + sq * _UNIT[q]))
    vals = f(np.array(stencil))
    center = vals[0]
    hess = np.empty((3, 3) + center.shape)
    for p in range(3):
        hess[p, p] = (vals[1 + 2 * p] - 2.0 * center + vals[2 + 2 * p]) / (h * h)
    base = 7
    for k, (p, q) in enumerate(pairs):
        pp, pm, mp, mm = vals[base + 4 * k: base + 4 * k + 4]
        hess[p, q] = hess[q, p] = (pp - pm - mp + mm) / (4.0 * h * h)
    return hess


def operator_residual(green, point, h: float) -> float:
    """Relative residual of ``T(grad) G`` at ``point`` with step ``h``.

    ``R[I, K] = M[I,p,J,q] d_p d_q G[J, K]`` is divided entrywise by the
    unit-consistent scale ``sum_{J,p,q} |M[I,p,J,q]| sqrt|G_JJ G_KK| / r^2``
    (entries that vanish by symmetry would make a term-wise scale zero).
    """
    point = np.asarray(point, dtype=float)
    hess = hessian_fd(green.evaluate, point, h)  # [p, q, J, K]
    moduli = green.cartesian.generalized
    res = np.einsum("IpJq,pqJK->IK", moduli, hess)
    g0 = green.evaluate(point[None], threads=1)[0]
    d = np.sqrt(np.abs(np.diag(g0)))
    size = np.einsum("IJ,J,K->IK", np.abs(moduli).sum(axis=(1, 3)), d, d) / (point @ point)
    return float(np.max(np.abs(res) / size))


def poisson_residual(eta11: float, eta33: float, potential, point, h: float) -> float:
    """Relative residual of ``-(eta11 (d_xx + d_yy) + eta33 d_zz) phi``."""
    hess = hessian_fd(potential, point, h)
    terms = np.array([eta11 * hess[0, 0], eta11 * hess[1, 1], eta33 * hess[2, 2]])
    return float(abs(terms.sum()) / np.abs(terms).sum())


def richardson_slopes(residuals, ratio: float = 2.0) -> np.ndarray:
    """Observed orders ``log(r_k / r_{k+1}) / log(ratio)`` for successive refinements."""
    r = np.asarray(residuals, dtype=float)
    return np.log(r[:-1] / r[1:]) / np.log(ratio)
