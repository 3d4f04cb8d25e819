"""N-point resolvent-kernel integrals J_n(g; z) = int g(v) prod_k (v - z_k)^{-n_k-1} dv.

Three independent routes are implemented and cross-validated:

  * direct adaptive quadrature over the real line (j_n);
  * the gap-power expansion obtained by differentiating the simple-pole
    partial fractions (j_partial_fraction off axis, j_sigma_direct for
    boundary values);
  * the everywhere-analytic part plus explicit half-plane residues
    (j_sigma_decomposed), built on a simplex representation of the pole
    product.

Boundary values J^sigma are assembled from exact formulas, never from a
numerical limit along Im z -> 0.  The decomposition

    J^sigma = J_reg + i pi sum_k sigma_k Res_k

has residues Res_k carrying the binomial gap-power weights produced by
the Leibniz rule; the all-plus case collapses to J_reg + i pi R with R a
simplex average of a single high derivative of g.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from . import _quad, cauchy1
from .densities import StripFunction
from .errors import CoincidentPoints, ConvexHullViolation, RealAxisInput
from .multiindex import EnergyVector, MultiIndex, SignVector, compositions

__all__ = [
    "MultiIndex", "SignVector", "EnergyVector",
    "j_n", "j_partial_fraction", "j_sigma_direct", "j_sigma_decomposed",
    "j_reg", "residue_part", "simplex_pole_product", "restricted_multiindex_sum",
    "simplex_rule",
]


# ---------------------------------------------------------------------------
# simplex quadrature

@lru_cache(maxsize=None)
def simplex_rule(npoints: int, order: int):
    """Quadrature rule for the standard simplex {s >= 0, sum s = 1}.

    Returns (S, w) with S of shape (M, npoints) and weights w summing to
    the simplex volume 1/(npoints-1)!.  Built from a tensor Gauss-Legendre
    rule on [0,1]^{npoints-1} through the iterated substitution
    s_1 = t_1, s_2 = t_2 (1 - t_1), ..., whose Jacobian is
    prod_j (1 - t_j)^{npoints-1-j}.
    """
    if npoints == 1:
        return np.ones((1, 1)), np.ones(1)
    x, w = _quad.gauss_nodes(order)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    grids = np.meshgrid(*([t] * (npoints - 1)), indexing="ij")
    wgrids = np.meshgrid(*([wt] * (npoints - 1)), indexing="ij")
    ts = np.stack([g.ravel() for g in grids], axis=1)          # (M, npoints-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)

    S = np.empty((ts.shape[0], npoints))
    remaining = np.ones(ts.shape[0])
    jac = np.ones(ts.shape[0])
    for k in range(npoints - 1):
        S[:, k] = remaining * ts[:, k]
        jac *= remaining
        remaining = remaining * (1.0 - ts[:, k])
    S[:, -1] = remaining
    return S, weights * jac


def _simplex_integral(fn, npoints: int, *, tol: float, start_order: int = 16,
                      max_order: int = None):
    """Integrate fn(S) over the simplex with order doubling until `tol`.

    fn maps node arrays of shape (M, npoints) to values of shape (M,).
    """
    if max_order is None:
        max_order = 256 if npoints <= 2 else (128 if npoints == 3 else 64)
    order = start_order
    prev = None
    while True:
        S, w = simplex_rule(npoints, order)
        cur = complex(np.sum(w * fn(S)))
        if prev is not None and abs(cur - prev) <= tol * (1.0 + abs(cur)):
            return cur
        if order >= max_order:
            return cur
        prev = cur
        order *= 2


# ---------------------------------------------------------------------------
# validation helpers

def _coerce(n, z_or_e):
    n = MultiIndex.of(n)
    pts = tuple(z_or_e)
    if len(n) != len(pts):
        raise ValueError(f"multi-index length {len(n)} != point count {len(pts)}")
    return n, pts


def _require_distinct(points, what="points"):
    pts = list(points)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if pts[i] == pts[j]:
                raise CoincidentPoints(f"coincident {what}: index {i} equals index {j}")


# ---------------------------------------------------------------------------
# off-axis values

def j_n(g: StripFunction, n, z) -> complex:
    """Direct quadrature of int g(v) prod (v - z_k)^{-n_k-1} dv, Im z_k != 0.

    The integration line is shifted inside the strip of g to stay away
    from the poles (as far as their half-plane split allows).
    """
    n, zs = _coerce(n, z)
    zs = tuple(complex(zk) for zk in zs)
    if any(zk.imag == 0.0 for zk in zs):
        raise RealAxisInput("j_n needs all Im z_k != 0")
    if len(zs) == 1:
        return cauchy1.i_n(g, n[0], zs[0])
    return cauchy1._pole_line_integral(g, tuple(n), zs)


def j_partial_fraction(g: StripFunction, n, z) -> complex:
    """Gap-power expansion of J_n for pairwise distinct off-axis z.

    J_n = sum_i sum_{|m|=n_i} prod_{j != i} (-1)^{m_j} C(m_j+n_j, m_j)
          (z_i - z_j)^{-(m_j+n_j+1)}  *  I_0(g^{(m_i)}; z_i) / m_i!
    """
    n, zs = _coerce(n, z)
    zs = tuple(complex(zk) for zk in zs)
    if any(zk.imag == 0.0 for zk in zs):
        raise RealAxisInput("j_partial_fraction needs all Im z_k != 0")
    if len(zs) == 1:
        return cauchy1.i_n(g, n[0], zs[0])
    _require_distinct(zs, "pole locations")

    def i0_of_deriv(m, i):
        return cauchy1.i_n(g.derivative(m), 0, zs[i]) / math.factorial(m)

    return _gap_power_sum(g, n, zs, i0_of_deriv)


def _gap_power_sum(g, n, pts, i0_factory) -> complex:
    """Shared kernel of the partial-fraction expansions.

    i0_factory(m, point_index_value) supplies I_0(g^{(m)}; .)/m! either off
    axis or as a boundary value.
    """
    N = len(pts)
    total = 0.0 + 0.0j
    for i in range(N):
        for m in compositions(n[i], N):
            coef = 1.0 + 0.0j
            for j in range(N):
                if j == i:
                    continue
                coef *= ((-1.0) ** m[j]) * math.comb(m[j] + n[j], m[j]) \
                    * (pts[i] - pts[j]) ** (-(m[j] + n[j] + 1))
            total += coef * i0_factory(m[i], i)
    return total


# ---------------------------------------------------------------------------
# boundary values

def j_sigma_direct(g: StripFunction, n, sigma, E) -> complex:
    """Boundary value J^sigma from gap powers and one-variable boundary values."""
    n, es = _coerce(n, E)
    sig = SignVector.of(sigma)
    if len(sig) != len(es):
        raise ValueError("sign vector length must match energy count")
    es = tuple(float(e) for e in es)
    if len(es) == 1:
        return cauchy1.in_boundary(g, n[0], sig[0], es[0])
    _require_distinct(es, "energies")

    def i0_of_deriv(m, i):
        return cauchy1.in_boundary(g, m, sig[i], es[i])

    return _gap_power_sum(g, n, es, i0_of_deriv)


def _residue_sum(g: StripFunction, n: MultiIndex, es, signs) -> complex:
    """sum_k sign_k Res_k of g(z) prod (z - E_j)^{-n_j-1} at z = E_k."""
    N = len(es)
    total = 0.0 + 0.0j
    for k in range(N):
        for m in compositions(n[k], N):
            term = signs[k] * complex(g.derivative(m[k]).value(es[k])) \
                / math.factorial(m[k])
            for j in range(N):
                if j == k:
                    continue
                term *= ((-1.0) ** m[j]) * math.comb(m[j] + n[j], m[j]) \
                    * (es[k] - es[j]) ** (-(n[j] + m[j] + 1))
            total += term
    return total


def j_sigma_decomposed(g: StripFunction, n, sigma, E) -> complex:
    """Boundary value as everywhere-analytic part plus half-plane residues."""
    n, es = _coerce(n, E)
    sig = SignVector.of(sigma)
    if len(sig) != len(es):
        raise ValueError("sign vector length must match energy count")
    es = tuple(float(e) for e in es)
    if len(es) > 1:
        _require_distinct(es, "energies")
    reg = j_reg(g, n, es)
    sing = _residue_sum(g, n, es, tuple(sig))
    return reg + 1j * math.pi * sing


def j_reg(g: StripFunction, n, E, *, tol: float = 1e-11) -> complex:
    """Everywhere-analytic part: simplex average of the symmetric
    principal-value integral of g^(N+|n|-1), defined for any real E."""
    n, es = _coerce(n, E)
    es_arr = np.asarray(es, dtype=float)
    N = len(es)
    k = N + n.total - 1
    h = g.derivative(k)
    nfact = n.factorial

    def fn(S):
        base = S @ es_arr
        vals = cauchy1.principal_value_batch(h, base, tol=tol)
        mono = np.ones(S.shape[0])
        for idx, nk in enumerate(n):
            if nk:
                mono = mono * S[:, idx] ** nk
        return vals * (mono / nfact)

    return _simplex_integral(fn, N, tol=1e-10)


def residue_part(g: StripFunction, n, E) -> complex:
    """Simplex average of g^(N+|n|-1) at the barycentric combinations of E.

    Coincides with the total residue sum when the energies are distinct and
    stays finite on the coincidence planes (confluent divided difference).
    """
    n, es = _coerce(n, E)
    es_arr = np.asarray(es, dtype=float)
    N = len(es)
    k = N + n.total - 1
    h = g.derivative(k)
    nfact = n.factorial

    def fn(S):
        vals = np.asarray(h.value(S @ es_arr))
        mono = np.ones(S.shape[0])
        for idx, nk in enumerate(n):
            if nk:
                mono = mono * S[:, idx] ** nk
        return vals * (mono / nfact)

    return _simplex_integral(fn, N, tol=1e-12)


# ---------------------------------------------------------------------------
# structural identities

def _in_convex_hull(v: complex, points, tol: float = 1e-12) -> bool:
    pts = [complex(p) for p in points]
    c = np.zeros(len(pts))
    A_eq = np.array([[p.real for p in pts],
                     [p.imag for p in pts],
                     [1.0] * len(pts)])
    b_eq = np.array([complex(v).real, complex(v).imag, 1.0])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * len(pts),
                  method="highs")
    return bool(res.status == 0)


def simplex_pole_product(n, z, v) -> tuple[complex, complex]:
    """Both sides of the simplex representation of a pole product.

    lhs = prod (v - z_k)^{-n_k-1}
    rhs = (N+|n|-1)!/n! * int_simplex s^n (v - sum s_k z_k)^{-(N+|n|)}

    Requires v outside the convex hull of {z_k}.
    """
    n, zs = _coerce(n, z)
    zs = tuple(complex(zk) for zk in zs)
    v = complex(v)
    if _in_convex_hull(v, zs):
        raise ConvexHullViolation(f"{v} lies in the convex hull of {zs}")

    lhs = 1.0 + 0.0j
    for nk, zk in zip(n, zs):
        lhs *= (v - zk) ** (-(nk + 1))

    N = len(zs)
    power = N + n.total
    pref = math.factorial(power - 1) / n.factorial
    zs_arr = np.asarray(zs, dtype=complex)

    def fn(S):
        mono = np.ones(S.shape[0])
        for idx, nk in enumerate(n):
            if nk:
                mono = mono * S[:, idx] ** nk
        return mono * (v - S @ zs_arr) ** (-power)

    rhs = pref * _simplex_integral(fn, N, tol=1e-12)
    return lhs, rhs


def restricted_multiindex_sum(n, r: int) -> int:
    """sum over |m| = r of prod_k C(m_k + n_k, m_k), exactly.

    Computed by stars-and-bars enumeration and checked against the closed
    form (r + |n| + L - 1)! / (r! (|n| + L - 1)!).
    """
    n = MultiIndex.of(n)
    if r < 0:
        raise ValueError("need r >= 0")
    L = len(n)
    total = 0
    for m in compositions(r, L):
        term = 1
        for mk, nk in zip(m, n):
            term *= math.comb(mk + nk, mk)
        total += term
    closed = math.comb(r + n.total + L - 1, r)
    if total != closed:
        raise ArithmeticError(
            f"enumeration {total} disagrees with closed form {closed}")
    return total
