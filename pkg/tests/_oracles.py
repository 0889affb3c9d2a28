"""Independent reference values for the tests.

Hydrogen orbitals come from sympy's closed forms; matrix elements are
brute-force products of Gauss-Laguerre (r), Gauss-Legendre (cos theta) and a
uniform phi rule, with Cartesian derivatives taken symbolically.  None of
this shares code with the package.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import sympy as sp
from scipy.special import roots_genlaguerre, roots_legendre
from sympy.physics.hydrogen import Psi_nlm, R_nl

r, th, ph = sp.symbols("r theta phi", positive=True)


@lru_cache(maxsize=None)
def radial_closed_form(n: int, l: int, Z: float = 1):
    return sp.lambdify(r, R_nl(n, l, r, Z), "numpy")


@lru_cache(maxsize=None)
def _psi(n, l, m, Z):
    return sp.simplify(Psi_nlm(n, l, m, r, ph, th, Z))


def _cartesian_grad(f):
    fr, ft, fp = sp.diff(f, r), sp.diff(f, th), sp.diff(f, ph)
    st, ct, sph, cph = sp.sin(th), sp.cos(th), sp.sin(ph), sp.cos(ph)
    gx = st * cph * fr + ct * cph / r * ft - sph / (r * st) * fp
    gy = st * sph * fr + ct * sph / r * ft + cph / (r * st) * fp
    gz = ct * fr - st / r * ft
    return gx, gy, gz


_COORD = {
    "x": r * sp.sin(th) * sp.cos(ph),
    "y": r * sp.sin(th) * sp.sin(ph),
    "z": r * sp.cos(th),
}


def _operator_image(op: str, f):
    """op applied to f for op in {identity, x, y, z, p_x.., xy-type products, q*p_j}."""
    if op == "identity":
        return f
    if op in _COORD:
        return _COORD[op] * f
    if op.startswith("p_"):
        return -sp.I * _cartesian_grad(f)["xyz".index(op[2])]
    if "*p_" in op:
        q, p = op.split("*")
        return _COORD[q] * _operator_image(p, f)
    a, b = op.split("*")
    return _COORD[a] * _COORD[b] * f


def matrix_element(op: str, a, b, Z: float = 1, n_r: int = 40, n_t: int = 48, n_p: int = 24) -> complex:
    """<a| op |b> by brute-force quadrature; q*p_j is returned symmetrized."""
    if "*p_" in op:
        m1 = _raw(op, a, b, Z, n_r, n_t, n_p)
        m2 = np.conj(_raw(op, b, a, Z, n_r, n_t, n_p))
        return 0.5 * (m1 + m2)
    return _raw(op, a, b, Z, n_r, n_t, n_p)


def _raw(op, a, b, Z, n_r, n_t, n_p):
    fa = sp.conjugate(_psi(*a, Z))
    fb = _operator_image(op, _psi(*b, Z))
    integrand = sp.lambdify((r, th, ph), fa * fb * r**2 * sp.sin(th), "numpy")
    s = float(Z) * (1.0 / a[0] + 1.0 / b[0])
    t, wt = roots_genlaguerre(n_r, 0.0)
    rr, wr = t / s, wt * np.exp(t) / s
    x, wx = roots_legendre(n_t)
    tt = np.arccos(x)
    wth = wx / np.sin(tt)  # d theta = dx / sin(theta); integrand already carries sin(theta)
    pp = np.arange(n_p) * 2 * np.pi / n_p
    R, T, P = np.meshgrid(rr, tt, pp, indexing="ij")
    vals = np.asarray(integrand(R, T, P), dtype=complex) * np.ones_like(R)
    w = wr[:, None, None] * wth[None, :, None] * (2 * np.pi / n_p)
    return complex(np.sum(vals * w))
