import math

import numpy as np
import pytest
from scipy.integrate import quad

from anderson_corr import (ExpansionConfig, green_series, identity,
                           matrix_element, velocity)
from anderson_corr.covariant import (CovariantMonomial, CovariantPolynomial,
                                     RationalCoefficient, assemble_site_density,
                                     coefficient, parse_observable_spec)
from anderson_corr.errors import MissingPotential
from anderson_corr.oracle import (FiniteBox, build_hamiltonian, draw_sample,
                                  observable_matrix)
from anderson_corr.walks import enumerate_npaths


def test_identity_monomial_is_kronecker_delta():
    mono = CovariantMonomial.of((0, 0))
    pots = {(0, 0): 0.3, (1, 0): -0.2}
    assert matrix_element(mono, pots, (0, 0), (0, 0)) == 1.0
    assert matrix_element(mono, pots, (0, 0), (1, 0)) == 0.0


def test_single_site_coefficient():
    mono = CovariantMonomial.of((0,), {(0,): coefficient("rational1")})
    pots = {(2,): 3.0}
    assert matrix_element(mono, pots, (2,), (2,)) == pytest.approx(1.0 / 10.0)


def test_missing_potential_raises():
    mono = CovariantMonomial.of((0,), {(1,): coefficient("rational1")})
    with pytest.raises(MissingPotential):
        matrix_element(mono, {(0,): 0.1}, (0,), (0,))


def test_velocity_matrix_elements():
    lam = 0.05
    v = velocity(0, lam, 1)
    pots = {(-1,): 0.1, (0,): 0.2, (1,): 0.3}

    def elem(x, y):
        return sum(w * matrix_element(m, pots, x, y) for w, m in v.terms)

    # i lam (x - y) on neighbors
    assert elem((0,), (1,)) == pytest.approx(1j * lam * (0 - 1))
    assert elem((1,), (0,)) == pytest.approx(1j * lam * (1 - 0))
    assert elem((0,), (0,)) == 0.0
    # hermitian: <x|A|y> = conj(<y|A|x>)
    assert elem((0,), (1,)) == pytest.approx(np.conj(elem((1,), (0,))))


def test_velocity_matches_commutator_on_box():
    lam = 0.3
    box = FiniteBox(1, 4)
    sample = draw_sample(box, __import__("anderson_corr").AnalyticDensity.gaussian(),
                         99, 0)
    H = build_hamiltonian(box, lam, sample).toarray()
    R = np.diag([s[0] for s in box.sites]).astype(complex)
    commutator = 1j * (R @ H - H @ R)
    V = observable_matrix(box, velocity(0, lam, 1), sample).toarray()
    assert np.allclose(V, commutator, atol=1e-14)


def test_translation_covariance():
    mono = CovariantMonomial.of((1,), {(0,): coefficient("rational1"),
                                       (1,): coefficient("gaussdamp")})
    pots = {(k,): 0.1 * k for k in range(-3, 6)}
    base = matrix_element(mono, pots, (0,), (1,))
    shifted_pots = {(k + 2,): v for (k,), v in pots.items()}
    shifted = matrix_element(mono, shifted_pots, (2,), (3,))
    assert shifted == pytest.approx(base, abs=1e-15)


def test_assemble_site_density_trivial(gaussian):
    fam = list(enumerate_npaths(1, ((0,), (0,)), 0))[0]
    monos = [identity(1).terms[0][1]] * 2
    out = assemble_site_density(gaussian, fam, monos, (0,))
    assert out is gaussian


def test_assemble_site_density_product(gaussian):
    fam = list(enumerate_npaths(1, ((0,), (0,)), 0))[0]
    rational = CovariantMonomial.of((0,), {(0,): coefficient("rational1")})
    monos = [rational, identity(1).terms[0][1]]
    out = assemble_site_density(gaussian, fam, monos, (0,))
    for v in (0.0, 1.2, -0.7):
        expect = gaussian.eval(v) / (1.0 + v * v)
        assert complex(out.value(v)) == pytest.approx(expect, abs=1e-14)


def test_assembled_norm_bound(gaussian):
    # strip-line mass of g * b stays below coeff sup * norm bound
    b = RationalCoefficient()
    fam = list(enumerate_npaths(1, ((0,), (0,)), 0))[0]
    rational = CovariantMonomial.of((0,), {(0,): coefficient("rational1")})
    monos = [rational, identity(1).terms[0][1]]
    out = assemble_site_density(gaussian, fam, monos, (0,))
    w = 0.9
    mass, _ = quad(lambda v: abs(complex(out.value(v + 1j * w))), -np.inf, np.inf)
    assert mass <= b.strip_sup(w) * gaussian.norm_r() * (1.0 + 1e-10)


def test_scaling_homogeneity(gaussian):
    # scaling one observable weight scales the series value linearly
    base = identity(1)
    scaled = CovariantPolynomial.of([(2.5, base.terms[0][1])])
    z = (0.3 + 0.5j, -0.4 - 0.6j)
    cfg1 = ExpansionConfig(density=gaussian, d=1, lam=0.04, n_max=3,
                           observables=(base, base))
    cfg2 = ExpansionConfig(density=gaussian, d=1, lam=0.04, n_max=3,
                           observables=(scaled, base))
    a = green_series(cfg1, z).value
    b = green_series(cfg2, z).value
    assert b == pytest.approx(2.5 * a, rel=1e-12)


def test_parse_observable_specs():
    ident = parse_observable_spec("identity", 2, 0.1)
    assert len(ident.terms) == 1
    vel = parse_observable_spec("velocity:nu=1", 2, 0.1)
    assert {m.displacement for _, m in vel.terms} == {(0, 1), (0, -1)}
    mono = parse_observable_spec("monomial:u0=(1,0),coef@(0,0)=rational1", 2, 0.1)
    ((w, m),) = mono.terms
    assert w == 1.0
    assert m.displacement == (1, 0)
    assert m.coefficient_map[(0, 0)].key == ("rational1",)
    with pytest.raises(ValueError):
        parse_observable_spec("hopping", 1, 0.1)
    with pytest.raises(ValueError):
        parse_observable_spec("velocity:nu=3", 2, 0.1)


def test_weight_sup_sum():
    v = velocity(0, 0.05, 1)
    assert v.weight_sup_sum(0.5) == pytest.approx(0.1)
    ident = identity(3)
    assert ident.weight_sup_sum(0.5) == 1.0
