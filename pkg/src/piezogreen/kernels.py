"""Scalar kernel polynomials of the hexagonal symbol matrix.

With ``xi_b = sqrt(xi_1^2 + xi_2^2)``, ``xi_c = xi_3`` and
``a = xi_b^2 / xi_c^2`` (``xi_c = 1``) the symbol matrix and its adjugate
decompose on the frame (b-perp, b, c, 4) into scalar functions of ``a``.
Everything here accepts complex ``a`` (scalars or arrays).

The off-diagonal adjugate entries in the (b, c) and (b, 4) slots carry a
factor ``sqrt(a)``; only the polynomial cofactors ``Gamma_bc`` and
``Gamma_b4`` are exposed, so no branch of ``sqrt(a)`` is ever chosen.
"""
from __future__ import annotations

import numpy as np

from .materials import CartesianModuli, MaterialModuli, expand_voigt, require_valid
from .spectrum import cubic_coefficients


class KernelSet:
    """Kernel polynomials for one material."""

    def __init__(self, m: MaterialModuli):
        require_valid(m)
        self.moduli = m
        self.coefficients = cubic_coefficients(m)

    # symbol-matrix components on the (b-perp, b, c, 4) frame

    def T_bperp(self, a):
        m = self.moduli
        return m.c66 * a + m.c44

    def T_b(self, a):
        m = self.moduli
        return m.c11 * a + m.c44

    def T_bc_sq(self, a):
        m = self.moduli
        return (m.c13 + m.c44) ** 2 * a

    def T_c(self, a):
        m = self.moduli
        return m.c44 * a + m.c33

    def t_b4_sq(self, a):
        m = self.moduli
        return (m.e31 + m.e15) ** 2 * a

    def t_bc_b4(self, a):
        """Product ``T_bc * t_b4``, free of ``sqrt(a)``."""
        m = self.moduli
        return (m.c13 + m.c44) * (m.e31 + m.e15) * a

    def t_c4(self, a):
        m = self.moduli
        return m.e15 * a + m.e33

    def tau(self, a):
        m = self.moduli
        return -(m.eta11 * a + m.eta33)

    # adjugate components

    def P(self, a):
        ca, cb, cc, cd = self.coefficients
        return ((ca * a + cb) * a + cc) * a + cd

    def Lambda_bperp(self, a):
        return self.P(a)

    def Lambda_bperp_from_T(self, a):
        """Determinant of the (b, c, 4) block assembled from the T's."""
        tb, tc, tau, tc4 = self.T_b(a), self.T_c(a), self.tau(a), self.t_c4(a)
        return (tau * (tb * tc - self.T_bc_sq(a))
                - (tc4 ** 2 * tb - 2.0 * tc4 * self.t_bc_b4(a) + self.t_b4_sq(a) * tc))

    def Lambda_b(self, a):
        m = self.moduli
        return -(m.c66 * a + m.c44) * ((m.eta11 * a + m.eta33) * (m.c44 * a + m.c33)
                                       + (m.e15 * a + m.e33) ** 2)

    def Lambda_c(self, a):
        m = self.moduli
        return -(m.c66 * a + m.c44) * ((m.eta11 * a + m.eta33) * (m.c11 * a + m.c44)
                                       + a * (m.e31 + m.e15) ** 2)

    def Lambda_c4(self, a):
        m = self.moduli
        return -(m.c66 * a + m.c44) * ((m.c11 * a + m.c44) * (m.e15 * a + m.e33)
                                       - a * (m.c13 + m.c44) * (m.e31 + m.e15))

    def Lambda_4(self, a):
        m = self.moduli
        k = m.c11 * m.c33 - 2.0 * m.c13 * m.c44 - m.c13 ** 2
        return (m.c66 * a + m.c44) * (a * a * m.c11 * m.c44 + a * k + m.c33 * m.c44)

    def Gamma_b(self, a):
        """Quadratic with ``Lambda_bperp(a) - Lambda_b(a) = a * Gamma_b(a)``.

        Note the minus sign on the last term; expanding the difference of
        the two cofactors gives ``-(e31 + e15)^2 T_c``.
        """
        m = self.moduli
        cc = m.c13 + m.c44
        ee = m.e31 + m.e15
        tc, tau, tc4 = self.T_c(a), self.tau(a), self.t_c4(a)
        return ((m.c11 - m.c66) * (tc * tau - tc4 ** 2) - cc ** 2 * tau
                + 2.0 * cc * ee * tc4 - ee ** 2 * tc)

    def Gamma_bc(self, a):
        m = self.moduli
        return (m.c66 * a + m.c44) * ((m.e31 + m.e15) * (m.e15 * a + m.e33)
                                      + (m.eta11 * a + m.eta33) * (m.c13 + m.c44))

    def Gamma_b4(self, a):
        m = self.moduli
        return (m.c66 * a + m.c44) * ((m.c13 + m.c44) * (m.e15 * a + m.e33)
                                      - (m.c44 * a + m.c33) * (m.e31 + m.e15))

    def frame_matrix(self, a) -> np.ndarray:
        """Symbol matrix on the (b-perp, b, c, 4) frame at ``xi = (sqrt(a), 0, 1)``.

        Only defined for real ``a >= 0``.
        """
        a = float(a)
        sa = np.sqrt(a)
        m = self.moduli
        t = np.zeros((4, 4))
        t[0, 0] = self.T_bperp(a)
        t[1, 1] = self.T_b(a)
        t[2, 2] = self.T_c(a)
        t[3, 3] = self.tau(a)
        t[1, 2] = t[2, 1] = (m.c13 + m.c44) * sa
        t[1, 3] = t[3, 1] = (m.e31 + m.e15) * sa
        t[2, 3] = t[3, 2] = self.t_c4(a)
        return t


def kernels_from(m: MaterialModuli) -> KernelSet:
    return KernelSet(m)


def assemble_Toperator(cm: CartesianModuli, xi) -> np.ndarray:
    """4x4 symbol matrix ``[[c_ipjq xi_p xi_q, e_piq xi_p xi_q], [., -eta_pq xi_p xi_q]]``."""
    return cm.symbol(xi)


def determinant_identity_check(m: MaterialModuli, a: float) -> float:
    """Relative residual of ``det T(sqrt(a), 0, 1) = c66 (a + c44/c66) P(a)``.

    Both sides are homogeneous in the moduli, so the check runs on the
    dimensionless rescaled material where the 4x4 entries are O(1).
    """
    if not (np.isfinite(a) and a >= 0):
        raise ValueError("a must be finite and non-negative")
    ms = m.rescaled()
    det = np.linalg.det(expand_voigt(ms).symbol([np.sqrt(a), 0.0, 1.0]))
    rhs = ms.c66 * (a + ms.c44 / ms.c66) * KernelSet(ms).P(a)
    return float(abs(det - rhs) / max(abs(det), abs(rhs)))
