"""Cross-route identity checks runnable as a batch.

Every integral identity in the library has at least two independent
computational routes; this module evaluates both sides on fixed grids and
reports the worst deviation against the stated tolerance.  The CLI
`identities` command prints the table; the acceptance suite asserts it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cauchy1, cauchy_n, walks
from ._quad import extrapolate_to_zero
from .densities import AnalyticDensity
from .multiindex import MultiIndex, compositions


@dataclass
class CheckResult:
    name: str
    tol: float
    worst: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:34s} worst={self.worst:.3e} tol={self.tol:.1e} {self.detail}"


def _result(name, tol, worst, detail=""):
    return CheckResult(name, tol, worst, worst <= tol, detail)


def _densities():
    return [AnalyticDensity.gaussian(1.0, 1.0), AnalyticDensity.cauchy(1.0, 0.5)]


def check_derivative_chain() -> CheckResult:
    """i_n(g, n, z) against I_0(g^(n); z)/n! for n <= 6 on 20 z points."""
    worst = 0.0
    for g in _densities():
        r = g.strip_radius
        zs = [complex(re, im * s)
              for re in (-1.2, 0.0, 0.8, 2.0)
              for im in (0.1 * r, 0.5 * r, 0.9 * r)
              for s in (1, -1)][:20]
        for n in range(7):
            h = g.derivative(n)
            for z in zs:
                a = cauchy1.i_n(g, n, z)
                b = cauchy1.i_n(h, 0, z) / math.factorial(n)
                worst = max(worst, abs(a - b) / (1.0 + abs(a)))
    return _result("derivative chain i_n", 1e-9, worst)


def check_partial_fractions() -> CheckResult:
    """Gap-power expansion against direct quadrature, N in {2, 3}."""
    worst = 0.0
    for g in _densities():
        cases = [
            ((0, 0), (0.3 + 0.6j, -0.5 - 0.8j)),
            ((1, 0), (1.0j, -1.0 + 2.0j)),
            ((2, 1), (0.5 + 0.7j, 1.5 + 0.9j)),
            ((0, 0, 0), (1.0j, 2.0j, 3.0j)),
            ((1, 0, 0), (1.0j, 2.0j, 3.0j)),
            ((1, 1, 0), (0.4 + 0.8j, -0.6 + 0.9j, 1.2 - 0.7j)),
        ]
        for n, z in cases:
            z = tuple(zk * g.strip_radius for zk in z)
            a = cauchy_n.j_partial_fraction(g, n, z)
            b = cauchy_n.j_n(g, n, z)
            worst = max(worst, abs(a - b) / (1.0 + abs(b)))
    return _result("gap-power expansion j_n", 1e-9, worst)


def check_simplex_identity() -> CheckResult:
    """Pole product against its simplex representation, N <= 4, |n| <= 4."""
    worst = 0.0
    cases = [
        ((0,), (0.7j,), 3.0),
        ((2,), (0.5 + 0.5j,), 2.0 - 1.0j),
        ((0, 0), (1.0j, 2.0j), 5.0),
        ((1, 2), (1.0j, 0.5 + 2.0j), -3.0 + 0.5j),
        ((1, 0, 2), (1.0j, 2.0j, 1.0 + 1.5j), 4.0 - 2.0j),
        ((1, 1, 1, 1), (1.0j, 2.0j, 1.0 + 1.0j, -0.5 + 1.5j), 6.0),
        ((0, 1, 0, 3), (0.8j, 1.7j, 0.6 + 1.1j, -0.4 + 2.1j), -5.0 - 1.0j),
    ]
    for n, z, v in cases:
        lhs, rhs = cauchy_n.simplex_pole_product(n, z, v)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return _result("simplex pole identity", 1e-10, worst)


def check_restricted_sums() -> CheckResult:
    """Stars-and-bars sum against the closed form, exactly."""
    bad = 0
    total = 0
    for L in range(1, 5):
        for s in range(7):
            for n in compositions(s, L):
                for r in range(7):
                    total += 1
                    got = cauchy_n.restricted_multiindex_sum(n, r)
                    want = math.comb(r + s + L - 1, r)
                    if got != want:
                        bad += 1
    return _result("restricted index sums", 0.0, float(bad), f"({total} cases)")


def check_boundary_imaginary_part() -> CheckResult:
    """Im I_0^+ = pi g(E) on a 200-point grid."""
    worst = 0.0
    for g in _densities():
        for E in np.linspace(-5.0, 5.0, 100):
            val = cauchy1.i0_boundary(g, +1, float(E))
            worst = max(worst, abs(val.imag - math.pi * float(np.real(g.value(E)))))
    return _result("boundary imaginary part", 1e-10, worst)


def check_boundary_sup_bound() -> CheckResult:
    """|I_0 boundary| below its closed-form sup bound on a 1000-point grid."""
    margin = -math.inf
    for g in _densities():
        bound = cauchy1.i0_bound(g)
        grid = np.linspace(-8.0, 8.0, 500)
        vals = [abs(cauchy1.i0_boundary(g, +1, float(E))) for E in grid]
        margin = max(margin, max(vals) - bound)
    return _result("boundary sup bound", 0.0, max(margin, 0.0))


def check_boundary_routes() -> CheckResult:
    """Gap-power route against regular-plus-residue route, gaps >= 0.5."""
    worst = 0.0
    for g in _densities():
        cases = [
            ((0, 0), (1, -1), (0.0, 1.0)),
            ((0, 0), (1, 1), (-0.6, 0.4)),
            ((1, 0), (1, -1), (-0.3, 0.9)),
            ((2, 1), (-1, 1), (0.2, 1.4)),
            ((0, 0, 0), (1, -1, 1), (-1.0, 0.0, 1.0)),
            ((1, 0, 0), (1, 1, -1), (-1.2, -0.2, 0.8)),
        ]
        for n, s, e in cases:
            a = cauchy_n.j_sigma_direct(g, n, s, e)
            b = cauchy_n.j_sigma_decomposed(g, n, s, e)
            worst = max(worst, abs(a - b) / (1.0 + abs(a)))
    return _result("boundary route equivalence", 1e-8, worst)


def check_axis_limit() -> CheckResult:
    """Off-axis values extrapolated to the axis against both boundary routes."""
    worst = 0.0
    eps_ladder = [0.1 * 2.0 ** (-j) for j in range(6)]
    for g in _densities():
        cases = [
            ((0, 0), (1, -1), (0.0, 1.0)),
            ((1, 0), (1, 1), (-0.4, 0.7)),
        ]
        for n, s, e in cases:
            direct = cauchy_n.j_sigma_direct(g, n, s, e)
            decomposed = cauchy_n.j_sigma_decomposed(g, n, s, e)

            def off_axis(eps):
                z = tuple(ek + 1j * sk * eps for ek, sk in zip(e, s))
                return cauchy_n.j_n(g, n, z)

            lim = extrapolate_to_zero(off_axis, eps_ladder)
            worst = max(worst, abs(lim - direct), abs(lim - decomposed))
    return _result("axis limit extrapolation", 1e-6, worst)


def check_schwarz_symmetry() -> CheckResult:
    """Flipping every half-plane sign conjugates the boundary value."""
    worst = 0.0
    for g in _densities():
        for E in (-1.3, 0.2, 2.1):
            a = cauchy1.i0_boundary(g, +1, E)
            b = cauchy1.i0_boundary(g, -1, E)
            worst = max(worst, abs(a - b.conjugate()))
        a = cauchy_n.j_sigma_direct(g, (1, 0), (1, -1), (0.0, 1.0))
        b = cauchy_n.j_sigma_direct(g, (1, 0), (-1, 1), (0.0, 1.0))
        worst = max(worst, abs(a - b.conjugate()))
    return _result("half-plane conjugation", 1e-9, worst)


def check_walk_counts() -> CheckResult:
    """Closed-walk counts: central binomial in d=1, enumeration in d=2,
    and the (2d)^n ceiling everywhere tested."""
    bad = 0
    for n in range(0, 13):
        want = math.comb(n, n // 2) if n % 2 == 0 else 0
        got = sum(1 for _ in walks.enumerate_closed_walks(1, n))
        if got != want or got > 2 ** n:
            bad += 1
    # closed walks on the square lattice factor into two line walks
    for n in range(0, 9):
        want = math.comb(n, n // 2) ** 2 if n % 2 == 0 else 0
        got = sum(1 for _ in walks.enumerate_closed_walks(2, n))
        if got != want or got > 4 ** n:
            bad += 1
    return _result("walk counts", 0.0, float(bad))


def check_visit_conservation() -> CheckResult:
    """sum_u |visit vector(u)| = total length + N on random families."""
    rng = np.random.default_rng(20240817)
    bad = 0
    for _ in range(1000):
        d = int(rng.integers(1, 4))
        n_walks = int(rng.integers(1, 4))
        ws = []
        start = (0,) * d
        offsets = []
        steps = walks._steps(d)
        for i in range(n_walks):
            length = int(rng.integers(0, 7))
            sites = [start]
            for _ in range(length):
                sites.append(walks._add(sites[-1], steps[rng.integers(len(steps))]))
            ws.append(walks.LatticeWalk(tuple(sites)))
            off = tuple(int(rng.integers(-2, 3)) for _ in range(d))
            offsets.append(off)
            start = walks._add(sites[-1], off)
        # close the cycle: last offset returns to the first walk's start
        offsets[-1] = tuple(a - b for a, b in zip(ws[0].start, ws[-1].end))
        fam = walks.NPathFamily(tuple(ws), tuple(offsets))
        counts = walks.visit_counts(fam)
        total = sum(sum(vec) for vec in counts.values())
        if total != fam.total_length + n_walks:
            bad += 1
    return _result("visit count conservation", 0.0, float(bad))


ALL_CHECKS = [
    check_derivative_chain,
    check_partial_fractions,
    check_simplex_identity,
    check_restricted_sums,
    check_boundary_imaginary_part,
    check_boundary_sup_bound,
    check_boundary_routes,
    check_axis_limit,
    check_schwarz_symmetry,
    check_walk_counts,
    check_visit_conservation,
]


def run_identity_suite(checks=None) -> list[CheckResult]:
    out = []
    for fn in (checks or ALL_CHECKS):
        out.append(fn())
    return out
