"""One-variable resolvent-kernel integrals I_n(g; z) = int g(v) (v-z)^{-n-1} dv.

Off-axis values come from adaptive quadrature with a certified tail
truncation.  Boundary values as z approaches the real axis from the
half-plane picked by sigma are computed from the explicit split

    I_0(g; E + i sigma 0) = int_0^inf (g(E+u) - g(E-u))/u du  +  i pi sigma g(E),

never by taking a numerical limit; the symmetric difference quotient has a
removable singularity at u = 0 with value 2 g'(E).  Higher orders reduce
to I_n = I_0(g^(n))/n!.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from . import _quad
from .densities import StripFunction
from .errors import RealAxisInput, ToleranceNotMet

TAIL_TOL = 1e-13


class HalfPlaneSign(enum.IntEnum):
    PLUS = 1
    MINUS = -1


def _sign(sigma) -> int:
    s = int(sigma)
    if s not in (1, -1):
        raise ValueError(f"half-plane sign must be +1 or -1, got {sigma!r}")
    return s


def truncation_radius(g: StripFunction, *, tol: float = TAIL_TOL,
                      damping=lambda v0: 1.0, width: float = 0.0) -> float:
    """Smallest power-of-two radius V with the tail of g (measured on the
    lines |Im v| <= width) times damping(V) below tol."""
    v0 = 8.0
    while v0 < 1e15:
        mass = g.strip_tail_mass(v0, width) if width > 0.0 else g.tail_mass(v0)
        if mass * damping(v0) < tol:
            return v0
        v0 *= 2.0
    raise ToleranceNotMet("could not certify a quadrature truncation radius")


def shifted_line(zs, strip_radius: float) -> float:
    """Height c of the integration line Im v = c used for pole integrals.

    Shifting the line away from the poles (legitimate by analyticity of g
    in its strip) keeps the integrand's modulus comparable to the value;
    on the real line the near-pole peak costs n digits of cancellation for
    an order-n pole close to the axis.  With poles on both sides the line
    splits the difference between the two nearest ones.
    """
    cap = min(0.49 * strip_radius, 1.0) if math.isfinite(strip_radius) else 1.0
    above = min((zk.imag for zk in zs if zk.imag > 0), default=None)
    below = min((-zk.imag for zk in zs if zk.imag < 0), default=None)
    if below is None:
        return -cap
    if above is None:
        return cap
    c = 0.5 * (above - below)
    return min(max(c, -cap), cap)


def _pole_line_integral(g: StripFunction, orders, zs) -> complex:
    """int over Im v = c of g(v) prod_k (v - z_k)^{-orders_k-1} dv."""
    c = shifted_line(zs, g.strip_radius)
    total_order = sum(orders) + len(orders)
    min_gap = min(abs(zk.imag - c) for zk in zs)
    max_re = max(abs(zk.real) for zk in zs)

    def damping(v0):
        dist = max(min_gap, v0 - max_re)
        return dist ** (-total_order)

    hi = max(truncation_radius(g, damping=damping, width=abs(c)), max_re + 10.0)

    def f(t):
        v = t + 1j * c
        out = g.value(v)
        for nk, zk in zip(orders, zs):
            out = out * (v - zk) ** (-(nk + 1))
        return out

    return _quad.adaptive(f, -hi, hi, rel_tol=1e-12,
                          breakpoints=sorted({zk.real for zk in zs}))


def i_n(g: StripFunction, n: int, z: complex) -> complex:
    """int g(v) / (v - z)^{n+1} dv for Im z != 0."""
    if n < 0:
        raise ValueError("pole order must be >= 0")
    z = complex(z)
    if z.imag == 0.0:
        raise RealAxisInput("i_n needs Im z != 0; use in_boundary on the axis")
    return _pole_line_integral(g, (n,), (z,))


def principal_value_part(h: StripFunction, E: float) -> complex:
    """int_0^inf (h(E+u) - h(E-u))/u du, real for real-valued h.

    The near piece on [0, 1] integrates the difference quotient directly
    (its u -> 0 limit is 2 h'(E)); when the numerator cancels below 1e-8
    relative at the probe points, it switches to the twice
    integrated-by-parts form

        h'(E+1) + h'(E-1) - int_0^1 (h''(E+x) - h''(E-x)) (x - x ln x) dx,

    which trades the cancellation for a mild log kernel.
    """
    E = float(E)

    cancels = False
    for u in (1e-3, 1e-2):
        a, b = complex(h.value(E + u)), complex(h.value(E - u))
        denom = abs(a) + abs(b)
        if denom > 0 and abs(a - b) < 1e-8 * denom:
            cancels = True
            break

    if not cancels:
        def near(u):
            return (h.value(E + u) - h.value(E - u)) / u
        near_val = _quad.adaptive(near, 0.0, 1.0, rel_tol=1e-12, abs_floor=1e-16)
    else:
        h1 = h.derivative(1)
        h2 = h.derivative(2)

        def near_pp(x):
            return (h2.value(E + x) - h2.value(E - x)) * (x - x * np.log(x))
        near_val = complex(h1.value(E + 1.0)) + complex(h1.value(E - 1.0)) \
            - _quad.adaptive(near_pp, 0.0, 1.0, rel_tol=1e-12, abs_floor=1e-16)

    # far piece: residual beyond u = U is <= 2 tail_mass(U - |E|) / U
    hi = max(truncation_radius(h, damping=lambda v0: 2.0 / (v0 + abs(E))) + abs(E), 2.0)

    def far(u):
        return (h.value(E + u) - h.value(E - u)) / u

    far_val = _quad.adaptive(far, 1.0, hi, rel_tol=1e-12, abs_floor=1e-16)
    return complex(near_val) + complex(far_val)


def principal_value_batch(h: StripFunction, e0, *, tol: float = 1e-11):
    """Vectorized principal_value_part over an array of base points.

    Used by the simplex quadratures, where h is evaluated at many shifted
    points per call; panels are shared across the batch and doubled until
    the whole batch agrees to `tol`.
    """
    e0 = np.asarray(e0, dtype=float)
    emax = float(np.max(np.abs(e0))) if e0.size else 0.0

    def fvals(u):
        return (h.value(e0[..., None] + u[None, :])
                - h.value(e0[..., None] - u[None, :])) / u[None, :]

    near = _quad.batch_panels(fvals, [(0.0, 0.25), (0.25, 1.0)], e0.shape, tol=tol / 2)
    hi = max(truncation_radius(h, damping=lambda v0: 2.0 / (v0 + emax)) + emax, 2.0)
    far = _quad.batch_panels(fvals, _quad.geometric_panels(1.0, hi), e0.shape, tol=tol / 2)
    return near + far


def i0_boundary(g: StripFunction, sigma, E: float) -> complex:
    """Boundary value of I_0 from the half-plane sigma at real E."""
    s = _sign(sigma)
    pv = principal_value_part(g, E)
    return pv + 1j * math.pi * s * complex(g.value(float(E)))


def i0_bound(g) -> float:
    """Sup bound over real E for |I_0 boundary values|:
    ((8/pi + 2)/r^2 + 1/r + 1) * norm_r."""
    r = g.strip_radius
    return ((8.0 / math.pi + 2.0) / r ** 2 + 1.0 / r + 1.0) * g.norm_r()


def in_boundary(g: StripFunction, n: int, sigma, E: float) -> complex:
    """Boundary value of I_n = I_0(g^(n))/n! from the half-plane sigma."""
    if n < 0:
        raise ValueError("pole order must be >= 0")
    if n == 0:
        return i0_boundary(g, sigma, E)
    h = g.derivative(n)
    return i0_boundary(h, sigma, E) / math.factorial(n)
