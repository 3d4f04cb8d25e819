"""Truncated walk expansion of the disorder-averaged N-point Green functions.

Each walk family Gamma of total length n contributes
(-lam)^n * prod_u J_{n_Gamma(u) - 1}(g_u; .) where the product runs over
visited sites, n_Gamma(u) is the per-walk visit vector at u, and g_u is
the density times whatever observable coefficients attach at u.  Sites
visited by a single walk reduce to one-variable integrals.  Families with
the same per-site visit/coefficient signature share one integral
evaluation (translation covariance), which is the dominant optimization:
family counts grow like (2d)^n while distinct signatures grow slowly.

Tail bounds are geometric.  For boundary values the per-order estimate is

    |order-n term| <= S * B^N * rho^n,   rho = 2 d N C1 e |lam| norm_r / (Delta - delta),

with C1 = 4 C / r, C = 8/pi + 2 + r + r^2, B = N C1 norm_r e / (Delta - delta),
S the product over observables of sum_t |weight_t| * (coefficient sups);
for N = 1 the same chain gives rho = 2 d |lam| e^3 C norm_r / r^2.  Off the
real axis the elementary distance bound |v - z_k| >= |Im z_k| gives

    |order-n term| <= S * prod_k |Im z_k|^{-1} * (2 d |lam| / min_k |Im z_k|)^n,

which is much tighter at moderate Im z and is what `green_series` reports.
Outside the geometric regime (rho >= 1) the series still evaluates but the
tail bound is +inf; `certified=True` turns that into an error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import cauchy1, cauchy_n, walks
from .covariant import CovariantPolynomial, identity as identity_observable
from .densities import AnalyticDensity, ProductFunction
from .errors import (CoincidentPoints, RadiusViolation, RealAxisInput)
from .multiindex import EnergyVector, SignVector

__all__ = [
    "ExpansionConfig", "SeriesValue", "dos_series", "dos_value", "green_series",
    "npoint_boundary_series", "radius_a0", "lambda_r_eps", "strip_constant",
    "moment_kernel",
]


def strip_constant(r: float) -> float:
    """C = 8/pi + 2 + r + r^2, the one-variable boundary sup constant."""
    return 8.0 / math.pi + 2.0 + r + r * r


def gap_constant(r: float) -> float:
    """C1 = 4 C / r, the per-site factor constant of the gap-power bounds."""
    return 4.0 * strip_constant(r) / r


@dataclass(frozen=True)
class ExpansionConfig:
    """Immutable description of one expansion run.

    `gap` is the declared lower bound Delta on energy separations for
    boundary-value runs; `delta` tunes the tail bound only (default
    gap/4, constrained to (0, gap/2)) and never changes series values.
    """

    density: AnalyticDensity
    d: int
    lam: float
    n_max: int
    observables: tuple[CovariantPolynomial, ...] = ()
    gap: float | None = None
    delta: float | None = None
    budget: int = walks.DEFAULT_BUDGET

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("need lattice dimension d >= 1")
        if self.n_max < 0:
            raise ValueError("need n_max >= 0")
        obs = tuple(self.observables) or (identity_observable(self.d),)
        object.__setattr__(self, "observables", obs)
        if not math.isfinite(self.density.second_moment):
            raise ValueError(
                "expansion requires a density with finite second moment; "
                "heavy-tailed densities are allowed only in the integral modules")
        if self.gap is not None and self.gap <= 0:
            raise ValueError("gap must be positive")
        if self.delta is not None:
            if self.gap is None:
                raise ValueError("delta without gap makes no sense")
            if not (0.0 < self.delta < self.gap / 2.0):
                raise ValueError("need 0 < delta < gap/2")

    @property
    def N(self) -> int:
        return len(self.observables)

    def weight_sup(self, w_strip: float) -> float:
        out = 1.0
        for obs in self.observables:
            out *= obs.weight_sup_sum(w_strip)
        return out


@dataclass
class SeriesValue:
    """Partial sum of the walk series plus its certification data.

    ratio_data holds the magnitudes of the partial sums through each
    order; order_terms the per-order contributions, so cheaper truncations
    can be reconstructed without re-summing.
    """

    value: complex
    order: int
    tail_bound: float
    ratio_data: tuple[float, ...]
    order_terms: tuple[complex, ...]
    tail_prefactor: float
    tail_ratio: float
    lam: float
    energies: tuple | None = None
    sigmas: tuple[int, ...] | None = None

    def partial(self, n: int) -> complex:
        """Partial sum through order n <= order."""
        if n > self.order:
            raise ValueError(f"only orders <= {self.order} were computed")
        return sum(self.order_terms[: n + 1])

    def tail_at(self, n: int) -> float:
        """Geometric bound on everything discarded beyond order n."""
        if not (0.0 <= self.tail_ratio < 1.0):
            return math.inf
        return self.tail_prefactor * self.tail_ratio ** (n + 1) / (1.0 - self.tail_ratio)

    def to_record(self) -> dict:
        rec = {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "order": self.order,
            "tail_bound": self.tail_bound,
            "lambda": self.lam,
        }
        if self.energies is not None:
            rec["energies"] = [[complex(e).real, complex(e).imag] for e in self.energies]
        if self.sigmas is not None:
            rec["sigmas"] = list(self.sigmas)
        return rec


# ---------------------------------------------------------------------------
# engine

def _monomial_combos(observables):
    for combo in itertools.product(*[obs.terms for obs in observables]):
        weight = 1.0 + 0.0j
        for w, _ in combo:
            weight *= w
        yield weight, tuple(m for _, m in combo)


def _site_data(family, monos):
    """Per-site (visit vector, coefficient keys, coefficient fns) plus the
    translation-invariant signature used for sharing integral values."""
    vecs = walks.visit_counts(family)
    sites = []
    for u in sorted(vecs):
        keys = []
        fns = []
        for walk, mono in zip(family.walks, monos):
            off = tuple(a - b for a, b in zip(u, walk.end))
            fn = mono.coefficient_map.get(off)
            if fn is not None:
                keys.append(getattr(fn, "key", ("anon", id(fn))))
                fns.append(fn)
        order = sorted(range(len(keys)), key=lambda i: repr(keys[i]))
        sites.append((vecs[u], tuple(keys[i] for i in order),
                      tuple(fns[i] for i in order)))
    sig = tuple(sorted(((vec, keys) for vec, keys, _ in sites), key=repr))
    return sig, sites


def _per_order_sums(cfg: ExpansionConfig, site_factor) -> np.ndarray:
    """Aggregated per-order family sums (without the (-lam)^n weight)."""
    coeffs = np.zeros(cfg.n_max + 1, dtype=complex)
    memo: dict = {}
    for weight, monos in _monomial_combos(cfg.observables):
        if weight == 0:
            continue
        offsets = tuple(m.displacement for m in monos)
        for n in range(cfg.n_max + 1):
            for family in walks.enumerate_npaths(cfg.d, offsets, n, cfg.budget):
                sig, sites = _site_data(family, monos)
                val = memo.get(sig)
                if val is None:
                    val = 1.0 + 0.0j
                    for vec, _, fns in sites:
                        g_u = ProductFunction([cfg.density, *fns]) if fns else cfg.density
                        val *= site_factor(g_u, vec)
                    memo[sig] = val
                coeffs[n] += weight * val
    return coeffs


def _finish(cfg, coeffs, prefactor, ratio, energies, sigmas, certified, what) -> SeriesValue:
    terms = tuple(((-cfg.lam) ** n) * coeffs[n] for n in range(cfg.n_max + 1))
    partials = np.cumsum(np.asarray(terms))
    if not (0.0 <= ratio < 1.0):
        if certified:
            raise RadiusViolation(
                f"{what}: geometric ratio {ratio:.4g} >= 1; no certified tail "
                f"bound at lam = {cfg.lam}")
        tail = math.inf
    else:
        tail = prefactor * ratio ** (cfg.n_max + 1) / (1.0 - ratio)
    return SeriesValue(
        value=complex(partials[-1]),
        order=cfg.n_max,
        tail_bound=tail,
        ratio_data=tuple(float(abs(p)) for p in partials),
        order_terms=terms,
        tail_prefactor=prefactor,
        tail_ratio=ratio,
        lam=cfg.lam,
        energies=energies,
        sigmas=sigmas,
    )


def _reduced(vec, values):
    ks = [k for k, v in enumerate(vec) if v > 0]
    red_n = tuple(vec[k] - 1 for k in ks)
    red_vals = tuple(values[k] for k in ks)
    return ks, red_n, red_vals


# ---------------------------------------------------------------------------
# public series

def dos_series(cfg: ExpansionConfig, sigma, E: float, *,
               certified: bool = False) -> SeriesValue:
    """Boundary-value series for the one-point function at real E.

    Requires N = 1 with the identity observable; the density of states is
    Im(value)/pi for sigma = +1 (see dos_value).
    """
    if cfg.N != 1:
        raise ValueError("dos_series needs exactly one observable")
    (obs,) = cfg.observables
    if any(m.coefficients or any(c != 0 for c in m.displacement)
           for _, m in obs.terms):
        raise ValueError("dos_series needs the identity observable")
    s = int(sigma)

    def site_factor(g_u, vec):
        return cauchy1.in_boundary(g_u, vec[0] - 1, s, float(E))

    coeffs = _per_order_sums(cfg, site_factor)
    r = cfg.density.strip_radius
    b0 = math.e ** 3 * strip_constant(r) * cfg.density.norm_r() / r ** 2
    ratio = 2.0 * cfg.d * abs(cfg.lam) * b0
    return _finish(cfg, coeffs, b0, ratio, (float(E),), (s,), certified, "dos_series")


def dos_value(cfg: ExpansionConfig, E: float, eps: float = 0.0) -> tuple[float, float]:
    """Density of states at E (Lorentzian-smoothed when eps > 0).

    Normalized so the lam = 0 limit is exactly g (resp. g convolved with
    the Poisson kernel of width eps); returns (dos, tail_bound / pi).
    """
    if eps > 0.0:
        sv = green_series(cfg, (complex(E, eps),))
    else:
        sv = dos_series(cfg, +1, E)
    return sv.value.imag / math.pi, sv.tail_bound / math.pi


def green_series(cfg: ExpansionConfig, z, *, certified: bool = False) -> SeriesValue:
    """Off-axis N-point series at z = (z_1, ..., z_N), Im z_k != 0."""
    zs = tuple(complex(zk) for zk in z)
    if len(zs) != cfg.N:
        raise ValueError(f"need {cfg.N} spectral parameters, got {len(zs)}")
    if any(zk.imag == 0.0 for zk in zs):
        raise RealAxisInput("green_series needs Im z_k != 0; "
                            "use npoint_boundary_series on the axis")

    def site_factor(g_u, vec):
        ks, red_n, red_z = _reduced(vec, zs)
        if len(ks) == 1:
            return cauchy1.i_n(g_u, red_n[0], red_z[0])
        if len(set(red_z)) == len(red_z):
            return cauchy_n.j_partial_fraction(g_u, red_n, red_z)
        return cauchy_n.j_n(g_u, red_n, red_z)

    coeffs = _per_order_sums(cfg, site_factor)
    zeta = [abs(zk.imag) for zk in zs]
    prefactor = cfg.weight_sup(0.0) * math.prod(1.0 / zk for zk in zeta)
    ratio = 2.0 * cfg.d * abs(cfg.lam) / min(zeta)
    return _finish(cfg, coeffs, prefactor, ratio, zs, None, certified, "green_series")


def npoint_boundary_series(cfg: ExpansionConfig, sigma, E, *,
                           certified: bool = False) -> SeriesValue:
    """Boundary-value N-point series at distinct real energies."""
    sig = SignVector.of(sigma)
    ev = EnergyVector.of(E)
    if len(sig) != cfg.N or len(ev) != cfg.N:
        raise ValueError(f"need {cfg.N} signs and energies")
    if cfg.N > 1 and not ev.distinct():
        raise CoincidentPoints("boundary series needs pairwise distinct energies")

    es = tuple(ev)
    ss = tuple(sig)

    def site_factor(g_u, vec):
        ks, red_n, red_e = _reduced(vec, es)
        if len(ks) == 1:
            return cauchy1.in_boundary(g_u, red_n[0], ss[ks[0]], red_e[0])
        red_s = tuple(ss[k] for k in ks)
        return cauchy_n.j_sigma_decomposed(g_u, red_n, red_s, red_e)

    coeffs = _per_order_sums(cfg, site_factor)
    r = cfg.density.strip_radius
    norm = cfg.density.norm_r()
    if cfg.N == 1:
        b = math.e ** 3 * strip_constant(r) * norm / r ** 2
        prefactor = cfg.weight_sup(r) * b
        ratio = 2.0 * cfg.d * abs(cfg.lam) * b
    else:
        gap = cfg.gap if cfg.gap is not None else ev.min_gap
        gap = min(gap, ev.min_gap)
        delta = cfg.delta if cfg.delta is not None else gap / 4.0
        b = cfg.N * gap_constant(r) * norm * math.e / (gap - delta)
        prefactor = cfg.weight_sup(r) * b ** cfg.N
        ratio = 2.0 * cfg.d * abs(cfg.lam) * b
        if certified and ev.min_gap <= radius_a0(cfg) * abs(cfg.lam):
            raise RadiusViolation(
                f"min gap {ev.min_gap:.4g} <= a0*|lam| = "
                f"{radius_a0(cfg) * abs(cfg.lam):.4g}")
    return _finish(cfg, coeffs, prefactor, ratio, es, ss, certified,
                   "npoint_boundary_series")


# ---------------------------------------------------------------------------
# radii and kernels

def radius_a0(cfg: ExpansionConfig) -> float:
    """Gap-per-unit-hopping constant a0 = 4 d N C1 e norm_r.

    Boundary values are jointly analytic wherever all |E_i - E_j| exceed
    a0 |lam|.
    """
    r = cfg.density.strip_radius
    return 4.0 * cfg.d * cfg.N * gap_constant(r) * math.e * cfg.density.norm_r()


def lambda_r_eps(density: AnalyticDensity, d: int, eps: float) -> float:
    """Hopping threshold eps^3 / (2 d e^3 r C norm_r) below which the
    one-point boundary value continues analytically to |Im E| < r - eps."""
    r = density.strip_radius
    if not (0.0 < eps < r):
        raise ValueError(f"need 0 < eps < r = {r}")
    return eps ** 3 / (2.0 * d * math.e ** 3 * r * strip_constant(r) * density.norm_r())


def moment_kernel(t: float, energies) -> float:
    """Cyclic product of sin((t/2)(E_j - E_{j-1})) / (E_j - E_{j-1}).

    E_0 is identified with E_{2n}; coincident neighbors contribute the
    limit value t/2.
    """
    if t < 0:
        raise ValueError("need t >= 0")
    es = [float(e) for e in energies]
    if len(es) < 2 or len(es) % 2 != 0:
        raise ValueError("need an even number (>= 2) of energies")
    out = 1.0
    prev = es[-1]
    for e in es:
        diff = e - prev
        out *= (t / 2.0) if diff == 0.0 else math.sin(0.5 * t * diff) / diff
        prev = e
    return out
