"""Generalized displacement U = (u, Phi) of discrete point sources.

A source carries the generalized force ``F = (K1, K2, K3, -q)``: a point
force ``K`` [N] and a point charge ``q`` [C] stored with a minus sign. The
field is the superposition ``U(r) = sum_s G(r - r_s) F_s``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .greens import GreensFunction


@dataclass(frozen=True, eq=False)
class GeneralizedSource:
    position: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        f = np.asarray(self.F, dtype=float).reshape(4)
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(f))):
            raise ValueError("source entries must be finite")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "F", f)

    @classmethod
    def force(cls, position, k) -> GeneralizedSource:
        return cls(position, np.append(np.asarray(k, dtype=float), 0.0))

    @classmethod
    def charge(cls, position, q: float) -> GeneralizedSource:
        return cls(position, [0.0, 0.0, 0.0, -q])

    @property
    def charge_value(self) -> float:
        return -float(self.F[3])


def superpose(green: GreensFunction, sources, points, threads: int | None = None) -> np.ndarray:
    """``(N, 4)`` array of ``(u1, u2, u3, Phi)`` at ``(N, 3)`` points.

    Sources are summed in input order.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    out = np.zeros((len(pts), 4))
    for k, src in enumerate(sources):
        rel = pts - src.position
        hit = np.flatnonzero(np.all(rel == 0, axis=1))
        if len(hit):
            raise ValueError(f"evaluation point {hit[0]} coincides with source {k}")
        out += green.evaluate(rel, threads) @ src.F
    return out


def fd_gradients(u, h):
    """Central-difference strain and electric field on a uniform grid.

    Parameters
    ----------
    u : array, shape (nx, ny, nz, 4)
        ``(u1, u2, u3, Phi)`` sampled on a regular grid.
    h : float or sequence of 3 floats
        Grid spacing per axis.

    Returns
    -------
    strain : (nx-2, ny-2, nz-2, 3, 3)
        ``(d_i u_j + d_j u_i)/2`` at interior nodes, O(h^2).
    efield : (nx-2, ny-2, nz-2, 3)
        ``-grad Phi`` at interior nodes, O(h^2).
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 4 or u.shape[-1] != 4:
        raise ValueError("expected samples of shape (nx, ny, nz, 4)")
    if min(u.shape[:3]) < 3:
        raise ValueError("need at least 3 grid points per axis")
    h = np.broadcast_to(np.asarray(h, dtype=float), (3,))
    inner = (slice(1, -1),) * 3
    grad = np.empty(tuple(n - 2 for n in u.shape[:3]) + (3, 4))
    for axis in range(3):
        fwd = list(inner)
        bwd = list(inner)
        fwd[axis] = slice(2, None)
        bwd[axis] = slice(None, -2)
        grad[..., axis, :] = (u[tuple(fwd)] - u[tuple(bwd)]) / (2.0 * h[axis])
    du = grad[..., :3]  # du[..., i, j] = d_i u_j
    strain = 0.5 * (du + np.swapaxes(du, -1, -2))
    efield = -grad[..., 3]
    return strain, efield


def load_sources(path) -> list[GeneralizedSource]:
    """Read ``x y z F1 F2 F3 F4`` lines (``F4 = -charge``, ``#`` comments)."""
    sources = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if len(line) != 7:
            raise ValueError(f"{path}:{lineno}: expected 7 numbers, got {len(line)}")
        try:
            vals = [float(v) for v in line]
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric entry") from None
        sources.append(GeneralizedSource(vals[:3], vals[3:]))
    return sources


def load_points(path) -> np.ndarray:
    """Whitespace- or comma-separated ``x y z`` rows (``#`` comments)."""
    rows = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].replace(",", " ").split()
        if not line:
            continue
        if len(line) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 coordinates")
        rows.append([float(v) for v in line])
    return np.array(rows, dtype=float).reshape(-1, 3)
