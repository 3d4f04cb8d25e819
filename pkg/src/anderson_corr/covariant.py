"""Finite-range covariant observables with strip-analytic coefficients.

A monomial observable is a lattice displacement u0 plus a finite map from
site offsets to scalar coefficient functions of the local potential,

    <x| A |y> = delta_{y-x, u0} * prod_off  a_off(V(x + off)),

with a_off = 1 outside the map.  Observables used by the expansion are
finite weighted sums of monomials.  The hopping current along axis nu,
i [R_nu, H], has matrix elements i lam (x_nu - y_nu) on nearest-neighbor
pairs and is represented exactly by two constant-coefficient monomials
with weights -i lam (hop +e_nu) and +i lam (hop -e_nu).

Coefficient functions come from a small registry with closed-form strip
bounds, so the series tail estimates stay certified:

    constant c         sup |c|
    rational1          1/(1+v^2), poles at +/- i, sup 1/(1-w^2) on |Im| <= w < 1
    gaussdamp          exp(-v^2/2), sup e^{w^2/2}
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .densities import (ConstantFunction, GaussianFunction, ProductFunction,
                        StripFunction, ZeroFunction)
from .errors import MissingPotential
from .walks import NPathFamily, Site

__all__ = [
    "CovariantMonomial", "CovariantPolynomial", "matrix_element",
    "assemble_site_density", "identity", "velocity", "coefficient",
    "parse_observable_spec",
]


class RationalCoefficient(StripFunction):
    """1/(1+v^2); derivatives by partial fractions."""

    strip_radius = 1.0
    has_closed_derivatives = True

    key = ("rational1",)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return 1.0 / (1.0 + z * z)

    def derivative(self, n: int = 1):
        return self if n == 0 else _RationalDerivative(n)

    def tail_mass(self, v0):
        return math.pi if v0 <= 0 else 2.0 * math.atan(1.0 / v0)

    def strip_sup(self, w):
        return math.inf if w >= 1.0 else 1.0 / (1.0 - w * w)

    def strip_tail_mass(self, v0, w):
        if w >= 1.0:
            return math.inf
        c = 1.0 - w
        if v0 <= 0:
            return math.pi / c
        return (2.0 / c) * math.atan(c / v0)


class _RationalDerivative(StripFunction):
    strip_radius = 1.0
    has_closed_derivatives = True

    def __init__(self, n: int):
        self.n = int(n)
        self.key = ("rational1-deriv", self.n)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        n = self.n
        pref = ((-1.0) ** n) * math.factorial(n) / 2.0j
        return pref * ((z - 1j) ** (-(n + 1)) - (z + 1j) ** (-(n + 1)))

    def derivative(self, n: int = 1):
        return self if n == 0 else _RationalDerivative(self.n + n)

    def strip_sup(self, w):
        if w >= 1.0:
            return math.inf
        return math.factorial(self.n) / (1.0 - w) ** (self.n + 1)

    def tail_mass(self, v0):
        n = self.n
        if v0 > 1.0:
            return 2.0 * math.factorial(n - 1) / v0 ** n if n >= 1 else math.pi
        return math.pi * math.factorial(n)

    def strip_tail_mass(self, v0, w):
        if w >= 1.0:
            return math.inf
        c = 1.0 - w
        n = self.n
        if v0 > c:
            return 2.0 * math.factorial(n - 1) / v0 ** n if n >= 1 else math.pi / c
        return math.pi * math.factorial(n) / c ** n


class _TaggedConstant(ConstantFunction):
    def __init__(self, c):
        super().__init__(c)
        self.key = ("const", complex(c))


class _TaggedGaussDamp(StripFunction):
    """exp(-v^2 / (2 s2)); an entire damping coefficient."""

    has_closed_derivatives = True

    def __init__(self, s2: float = 1.0):
        self.s2 = float(s2)
        self.key = ("gaussdamp", self.s2)
        self.strip_radius = math.inf
        self._core = GaussianFunction(self.s2, r=1e9, scale=1.0)

    def value(self, z):
        return self._core.value(z)

    def derivative(self, n: int = 1):
        return self if n == 0 else self._core.derivative(n)

    def tail_mass(self, v0):
        return self._core.tail_mass(v0)

    def strip_sup(self, w):
        return self._core.strip_sup(w)

    def strip_tail_mass(self, v0, w):
        return self._core.strip_tail_mass(v0, w)


_REGISTRY = {
    "rational1": lambda: RationalCoefficient(),
    "gaussdamp": lambda: _TaggedGaussDamp(1.0),
}


def coefficient(name: str, **kwargs) -> StripFunction:
    """Look up a coefficient function by registry name (or 'const:c')."""
    if name.startswith("const"):
        _, _, cval = name.partition(":")
        return _TaggedConstant(complex(cval) if cval else 1.0)
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ValueError(f"unknown coefficient function {name!r}") from None


@dataclass(frozen=True)
class CovariantMonomial:
    """Displacement u0 plus per-offset coefficient functions."""

    displacement: Site
    coefficients: tuple[tuple[Site, StripFunction], ...] = ()

    @classmethod
    def of(cls, displacement, coefficients: Mapping[Site, StripFunction] | None = None):
        disp = tuple(int(c) for c in displacement)
        coeffs = tuple(sorted(((tuple(int(c) for c in off), fn)
                               for off, fn in (coefficients or {}).items()),
                              key=lambda p: p[0]))
        return cls(disp, coeffs)

    @property
    def coefficient_map(self) -> dict[Site, StripFunction]:
        return dict(self.coefficients)

    def coeff_sup(self, w: float) -> float:
        """Product of the coefficient sup bounds on |Im z| <= w."""
        out = 1.0
        for _, fn in self.coefficients:
            out *= fn.strip_sup(w)
        return out

    def support(self) -> tuple[Site, ...]:
        return tuple(off for off, _ in self.coefficients)


def matrix_element(mono: CovariantMonomial, potentials: Mapping[Site, float],
                   x: Site, y: Site) -> complex:
    """<x| A |y> for the given potential configuration."""
    x = tuple(x)
    y = tuple(y)
    if tuple(a - b for a, b in zip(y, x)) != mono.displacement:
        return 0.0 + 0.0j
    out = 1.0 + 0.0j
    for off, fn in mono.coefficients:
        site = tuple(a + b for a, b in zip(x, off))
        if site not in potentials:
            raise MissingPotential(f"no potential supplied at site {site}")
        out *= complex(fn.value(potentials[site]))
    return out


@dataclass(frozen=True)
class CovariantPolynomial:
    """Finite weighted sum of monomials; the expansion is multilinear in these."""

    terms: tuple[tuple[complex, CovariantMonomial], ...]

    @classmethod
    def of(cls, terms):
        return cls(tuple((complex(w), m) for w, m in terms))

    def weight_sup_sum(self, w_strip: float) -> float:
        """sum over terms of |weight| * coefficient sup product (tail bounds)."""
        return sum(abs(w) * m.coeff_sup(w_strip) for w, m in self.terms)

    def max_reach(self) -> int:
        out = 0
        for _, m in self.terms:
            out = max(out, sum(abs(c) for c in m.displacement))
        return out


def identity(d: int) -> CovariantPolynomial:
    return CovariantPolynomial.of([(1.0, CovariantMonomial.of((0,) * d))])


def velocity(nu: int, lam: float, d: int) -> CovariantPolynomial:
    """Hopping current i [R_nu, H]: weights -i lam on hop +e_nu, +i lam on -e_nu."""
    if not (0 <= nu < d):
        raise ValueError(f"axis nu={nu} out of range for d={d}")
    plus = [0] * d
    plus[nu] = 1
    minus = [0] * d
    minus[nu] = -1
    return CovariantPolynomial.of([
        (-1j * lam, CovariantMonomial.of(tuple(plus))),
        (+1j * lam, CovariantMonomial.of(tuple(minus))),
    ])


def assemble_site_density(g, family: NPathFamily, monomials, u: Site) -> StripFunction:
    """The per-site integrand g(v) * prod_i a_{i, u - end(walk_i)}(v).

    Returns g unchanged when no coefficient attaches at u.  The result is
    a StripFunction whose strip norm is bounded by the product of the
    coefficient sups times norm_r of g.
    """
    u = tuple(u)
    factors = []
    for walk, mono in zip(family.walks, monomials):
        off = tuple(a - b for a, b in zip(u, walk.end))
        fn = mono.coefficient_map.get(off)
        if fn is not None and not isinstance(fn, ZeroFunction):
            factors.append(fn)
    if not factors:
        return g
    return ProductFunction([g] + factors)


def _parse_site(text: str) -> Site:
    inner = text.strip().lstrip("(").rstrip(")")
    return tuple(int(c) for c in inner.split(";")) if ";" in inner \
        else tuple(int(c) for c in inner.split(","))


def parse_observable_spec(spec: str, d: int, lam: float) -> CovariantPolynomial:
    """Parse 'identity' | 'velocity:nu=0' | 'monomial:u0=(1,0),coef@(0,0)=rational1'.

    Tuples inside a monomial spec may separate components with ';' to avoid
    clashing with the ',' separating fields.
    """
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name == "identity":
        return identity(d)
    if name == "velocity":
        nu = 0
        if rest:
            key, _, val = rest.partition("=")
            if key.strip() != "nu":
                raise ValueError(f"velocity takes nu=<axis>, got {rest!r}")
            nu = int(val)
        return velocity(nu, lam, d)
    if name == "monomial":
        u0 = (0,) * d
        coeffs: dict[Site, StripFunction] = {}
        # split on commas not inside parentheses
        fields, depth, cur = [], 0, ""
        for ch in rest:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            if ch == "," and depth == 0:
                fields.append(cur)
                cur = ""
            else:
                cur += ch
        if cur:
            fields.append(cur)
        for field in fields:
            key, _, val = field.partition("=")
            key = key.strip()
            if key == "u0":
                u0 = _parse_site(val)
            elif key.startswith("coef@"):
                coeffs[_parse_site(key[len("coef@"):])] = coefficient(val.strip())
            else:
                raise ValueError(f"unknown monomial field {key!r}")
        return CovariantPolynomial.of([(1.0, CovariantMonomial.of(u0, coeffs))])
    raise ValueError(f"unknown observable {name!r}")
