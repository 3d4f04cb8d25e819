"""Finite-lattice brute-force oracles for validating the walk expansion.

A finite box carries the restricted Hamiltonian H = lam * (hopping) +
diag(V) with V drawn i.i.d. from the density.  Disorder sampling is
counter-keyed: sample i of a run seeds its own Philox stream with
key (master_seed, i), so results are bit-identical regardless of how the
sample loop is scheduled, and per-sample values are reduced in index
order.

Validation always compares at complex spectral parameter (or a Lorentzian
smoothing width eps > 0): Monte Carlo cannot take the boundary limit, and
the series side is exact off the axis.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import quad

from .covariant import CovariantPolynomial, matrix_element
from .densities import AnalyticDensity
from .errors import RealAxisInput, SolverFailure, ToleranceNotMet

DIRECT_SOLVE_MAX_DIM = 40_000


@dataclass
class FiniteBox:
    """Box [-L, L]^d with open or periodic boundary, plus site indexing."""

    d: int
    L: int
    boundary: str = "open"

    def __post_init__(self):
        if self.d < 1 or self.L < 0:
            raise ValueError("need d >= 1 and L >= 0")
        if self.boundary not in ("open", "periodic"):
            raise ValueError("boundary must be 'open' or 'periodic'")

    @cached_property
    def sites(self) -> list[tuple[int, ...]]:
        rng = range(-self.L, self.L + 1)
        return list(itertools.product(rng, repeat=self.d))

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.sites)}

    @property
    def dim(self) -> int:
        return (2 * self.L + 1) ** self.d

    @property
    def origin_index(self) -> int:
        return self.index[(0,) * self.d]

    def wrap(self, site):
        span = 2 * self.L + 1
        return tuple((c + self.L) % span - self.L for c in site)

    def neighbors(self, site):
        for axis in range(self.d):
            for sign in (1, -1):
                nbr = list(site)
                nbr[axis] += sign
                nbr = tuple(nbr)
                if nbr in self.index:
                    yield nbr
                elif self.boundary == "periodic":
                    yield self.wrap(nbr)


@dataclass
class DisorderSample:
    """One i.i.d. potential configuration, reproducible from its seed pair."""

    master_seed: int
    index: int
    potentials: np.ndarray

    def site_map(self, box: FiniteBox) -> dict:
        return {s: float(v) for s, v in zip(box.sites, self.potentials)}


def draw_sample(box: FiniteBox, density: AnalyticDensity, master_seed: int,
                index: int) -> DisorderSample:
    key = np.array([master_seed, index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    pots = np.asarray(density.sample(rng, box.dim), dtype=float)
    return DisorderSample(master_seed, index, pots)


def build_hamiltonian(box: FiniteBox, lam: float, sample: DisorderSample):
    """H = lam * (nearest-neighbor adjacency) + diag(V), real symmetric CSR."""
    rows, cols, vals = [], [], []
    for i, site in enumerate(box.sites):
        for nbr in box.neighbors(site):
            rows.append(i)
            cols.append(box.index[nbr])
            vals.append(lam)
    H = sp.csr_matrix((vals, (rows, cols)), shape=(box.dim, box.dim))
    H = H + sp.diags(sample.potentials)
    return H.tocsr()


def _solve_shifted(H, z: complex, rhs: np.ndarray) -> np.ndarray:
    """x with (H - z) x = rhs; direct below DIRECT_SOLVE_MAX_DIM, else iterative."""
    dim = H.shape[0]
    A = (H - z * sp.identity(dim, format="csr")).tocsc()
    if dim <= DIRECT_SOLVE_MAX_DIM:
        return spla.splu(A).solve(rhs.astype(complex))
    x, info = spla.lgmres(A, rhs.astype(complex), rtol=1e-10, atol=0.0, maxiter=2000)
    if info != 0:
        raise SolverFailure(f"lgmres failed to converge (info={info})")
    return x


def _check_margin(box: FiniteBox, margin: int):
    if margin < 0 or margin > box.L:
        raise ValueError(f"margin {margin} must lie in [0, L={box.L}]")


def _run_samples(worker, samples: int, workers: int | None):
    """Evaluate worker(i) for i < samples; slot results by index so the
    reduction order is fixed regardless of scheduling."""
    out = [None] * samples
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, val in zip(range(samples), pool.map(worker, range(samples))):
                out[i] = val
    else:
        for i in range(samples):
            out[i] = worker(i)
    return out


def _mean_stderr(vals: np.ndarray) -> tuple[complex, float]:
    mean = complex(vals.mean())
    if len(vals) < 2:
        return mean, math.inf
    var = vals.real.var(ddof=1) + vals.imag.var(ddof=1)
    return mean, math.sqrt(var / len(vals))


def mc_green(box: FiniteBox, density: AnalyticDensity, lam: float, z: complex,
             samples: int, master_seed: int, *, margin: int = 5,
             workers: int | None = None) -> tuple[complex, float]:
    """Monte Carlo mean and standard error of <0| (H - z)^{-1} |0>."""
    z = complex(z)
    if z.imag == 0.0:
        raise RealAxisInput("mc_green needs Im z != 0")
    _check_margin(box, margin)
    e0 = np.zeros(box.dim)
    e0[box.origin_index] = 1.0

    def worker(i: int) -> complex:
        sample = draw_sample(box, density, master_seed, i)
        H = build_hamiltonian(box, lam, sample)
        x = _solve_shifted(H, z, e0)
        return complex(x[box.origin_index])

    vals = np.asarray(_run_samples(worker, samples, workers), dtype=complex)
    return _mean_stderr(vals)


def observable_matrix(box: FiniteBox, obs: CovariantPolynomial,
                      sample: DisorderSample):
    """Sparse matrix of a covariant observable on the box (rows truncated
    at the boundary)."""
    pots = sample.site_map(box)
    rows, cols, vals = [], [], []
    for w, mono in obs.terms:
        for i, site in enumerate(box.sites):
            target = tuple(a + b for a, b in zip(site, mono.displacement))
            j = box.index.get(target)
            if j is None:
                continue
            val = w * matrix_element(mono, pots, site, target)
            if val != 0:
                rows.append(i)
                cols.append(j)
                vals.append(val)
    return sp.csr_matrix((vals, (rows, cols)), shape=(box.dim, box.dim), dtype=complex)


def mc_npoint(box: FiniteBox, density: AnalyticDensity, lam: float,
              observables, z, samples: int, master_seed: int, *,
              margin: int = 5, workers: int | None = None) -> tuple[complex, float]:
    """Monte Carlo estimate of <0| prod_k (H - z_k)^{-1} A_k |0>.

    Applies the operator string right to left with one linear solve per
    resolvent factor per sample.
    """
    zs = tuple(complex(zk) for zk in z)
    if any(zk.imag == 0.0 for zk in zs):
        raise RealAxisInput("mc_npoint needs Im z_k != 0")
    obs = tuple(observables)
    if len(obs) != len(zs):
        raise ValueError("need one observable per spectral parameter")
    _check_margin(box, margin)
    e0 = np.zeros(box.dim)
    e0[box.origin_index] = 1.0

    def worker(i: int) -> complex:
        sample = draw_sample(box, density, master_seed, i)
        H = build_hamiltonian(box, lam, sample)
        mats = [observable_matrix(box, o, sample) for o in obs]
        w = e0.astype(complex)
        for k in range(len(zs) - 1, -1, -1):
            w = mats[k] @ w
            w = _solve_shifted(H, zs[k], w)
        return complex(w[box.origin_index])

    vals = np.asarray(_run_samples(worker, samples, workers), dtype=complex)
    return _mean_stderr(vals)


def smoothed_dos(box: FiniteBox, density: AnalyticDensity, lam: float,
                 eps: float, e_grid, samples: int, master_seed: int, *,
                 workers: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(1/pi) E[Im <0|(H - E - i eps)^{-1}|0>] on a grid, by eigendecomposition.

    Returns (means, stderrs) aligned with e_grid.
    """
    if eps <= 0:
        raise ValueError("need eps > 0")
    e_grid = np.asarray(e_grid, dtype=float)

    def worker(i: int) -> np.ndarray:
        sample = draw_sample(box, density, master_seed, i)
        H = build_hamiltonian(box, lam, sample).toarray()
        evals, evecs = np.linalg.eigh(H)
        w0 = np.abs(evecs[box.origin_index, :]) ** 2
        lor = (eps / math.pi) / ((e_grid[:, None] - evals[None, :]) ** 2 + eps ** 2)
        return lor @ w0

    rows = np.asarray(_run_samples(worker, samples, workers), dtype=float)
    means = rows.mean(axis=0)
    stderrs = rows.std(axis=0, ddof=1) / math.sqrt(samples) if samples > 1 \
        else np.full_like(means, math.inf)
    return means, stderrs


def ids_count(box: FiniteBox, lam: float, sample: DisorderSample, E: float) -> float:
    """Eigenvalue counting function: #{eigenvalues <= E} / dim."""
    H = build_hamiltonian(box, lam, sample).toarray()
    evals = np.linalg.eigvalsh(H)
    return float(np.count_nonzero(evals <= E)) / box.dim


def quad_reference(f, a: float, b: float, *, points=None,
                   target_tol: float = 1e-10) -> complex:
    """Adaptive reference integral with an error certificate.

    Integrates real and imaginary parts separately with quadpack and
    raises if the reported error estimate exceeds target_tol.
    """
    req = max(0.25 * target_tol, 5e-14)
    kwargs = {"limit": 400, "epsabs": req, "epsrel": req}
    if points is not None and math.isfinite(a) and math.isfinite(b):
        kwargs["points"] = points
    re, re_err = quad(lambda v: complex(f(v)).real, a, b, **kwargs)
    im, im_err = quad(lambda v: complex(f(v)).imag, a, b, **kwargs)
    if re_err + im_err > target_tol:
        raise ToleranceNotMet(
            f"quadrature error {re_err + im_err:.3e} exceeds {target_tol:.3e}")
    return complex(re, im)
