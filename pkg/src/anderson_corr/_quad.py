"""Gauss-Legendre quadrature kernels used by the integral modules.

All integrands here are analytic on the integration path (or have a
removable singularity that the caller has already patched), so panel-wise
Gauss-Legendre with order doubling converges geometrically.  Integrands
must accept a 1-d numpy array of nodes and return an array of values.
"""

from __future__ import annotations

import heapq
import math
from functools import lru_cache

import numpy as np

from .errors import ToleranceNotMet

MAX_PANEL_ORDER = 1024


@lru_cache(maxsize=None)
def gauss_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel(f, a: float, b: float, order: int) -> complex:
    x, w = gauss_nodes(order)
    half = 0.5 * (b - a)
    vals = f(0.5 * (a + b) + half * x)
    return half * np.sum(w * vals)


def _initial_edges(a: float, b: float, breakpoints) -> list[float]:
    """Panel edges: endpoints, caller breakpoints, and a dyadic scaffold so
    slowly decaying tails over huge intervals start well partitioned."""
    edges = {a, b}
    for p in breakpoints or ():
        if a < p < b:
            edges.add(float(p))
    mag = max(abs(a), abs(b))
    k = 0
    while 2.0 ** k < mag:
        for signed in (2.0 ** k, -(2.0 ** k)):
            if a < signed < b:
                edges.add(signed)
        k += 1
    return sorted(edges)


def adaptive(f, a: float, b: float, *, rel_tol: float = 1e-12,
             abs_floor: float = 1e-15, breakpoints=None,
             base_order: int = 24, max_panels: int = 4000) -> complex:
    """Integrate f over [a, b] with global-error panel refinement.

    Each panel's error is estimated by comparing Gauss-Legendre of order p
    against order 2p; the panel with the worst error is bisected until the
    summed error drops below the tolerance.  The tolerance has a roundoff
    floor proportional to the integral of |f|: once cancellation between
    the panels dominates, refining further cannot help.
    """
    def measure(lo, hi):
        x1, w1 = gauss_nodes(base_order)
        x2, w2 = gauss_nodes(2 * base_order)
        half = 0.5 * (hi - lo)
        mid = 0.5 * (lo + hi)
        v1 = f(mid + half * x1)
        v2 = f(mid + half * x2)
        coarse = half * np.sum(w1 * v1)
        fine = half * np.sum(w2 * v2)
        mass = half * float(np.sum(w2 * np.abs(v2)))
        return abs(fine - coarse), fine, mass

    heap = []
    total = 0.0 + 0.0j
    total_err = 0.0
    total_mass = 0.0
    counter = 0
    for lo, hi in zip(*(lambda e: (e[:-1], e[1:]))(_initial_edges(a, b, breakpoints))):
        err, val, mass = measure(lo, hi)
        total += val
        total_err += err
        total_mass += mass
        counter += 1
        heapq.heappush(heap, (-err, counter, lo, hi, val, mass))

    def tolerance():
        return max(abs_floor, rel_tol * abs(total), 3e-16 * total_mass)

    npanels = len(heap)
    while npanels < max_panels:
        if total_err <= tolerance():
            break
        neg_err, _, lo, hi, val, mass = heapq.heappop(heap)
        width = hi - lo
        if width <= 1e-14 * (1.0 + abs(lo) + abs(hi)):
            # panel at floating-point resolution; its error is roundoff
            total_err += neg_err
            continue
        mid = 0.5 * (lo + hi)
        total -= val
        total_err += neg_err  # remove this panel's error
        total_mass -= mass
        for c_lo, c_hi in ((lo, mid), (mid, hi)):
            err, cval, cmass = measure(c_lo, c_hi)
            total += cval
            total_err += err
            total_mass += cmass
            counter += 1
            heapq.heappush(heap, (-err, counter, c_lo, c_hi, cval, cmass))
        npanels += 1
    else:
        if total_err > 1e3 * tolerance():
            raise ToleranceNotMet(
                f"adaptive quadrature stalled: error {total_err:.3e} "
                f"with {npanels} panels (tol {tolerance():.3e})")
    return total


def batch_panels(fvals, panels, shape, *, tol: float, start_order: int = 48,
                 dtype=complex):
    """Integrate a batched integrand over a union of panels.

    `fvals(u)` must map a node array of shape (m,) to values of shape
    shape + (m,); the integral is taken along the last axis.  Each panel's
    order is doubled until successive values agree to `tol` (absolute,
    uniformly over the batch) or MAX_PANEL_ORDER is hit.
    """
    total = np.zeros(shape, dtype=dtype)
    per_panel_tol = tol / max(len(panels), 1)
    for lo, hi in panels:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (lo + hi)
        order = start_order
        prev = None
        while True:
            x, w = gauss_nodes(order)
            vals = fvals(mid + half * x)
            cur = half * np.einsum('...k,k->...', vals, w)
            if prev is not None and np.max(np.abs(cur - prev)) <= per_panel_tol:
                break
            if order >= MAX_PANEL_ORDER:
                break
            prev = cur
            order *= 2
        total = total + cur
    return total


def geometric_panels(lo: float, hi: float):
    """Panel edges lo, 2*lo, 4*lo, ..., hi (for slowly decaying tails)."""
    edges = [lo]
    e = lo
    while e * 2 < hi:
        e *= 2
        edges.append(e)
    edges.append(hi)
    return list(zip(edges[:-1], edges[1:]))


def extrapolate_to_zero(f, eps_values) -> complex:
    """Neville extrapolation of f(eps) to eps = 0.

    Used only for cross-validation of boundary values; the production
    boundary routines use the explicit limit formulas instead.
    """
    eps = list(eps_values)
    table = [complex(f(e)) for e in eps]
    n = len(eps)
    for level in range(1, n):
        nxt = []
        for i in range(n - level):
            x0, x1 = eps[i], eps[i + level]
            nxt.append((x0 * table[i + 1] - x1 * table[i]) / (x0 - x1))
        table = nxt
    return table[0]
