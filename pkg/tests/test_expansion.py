import json
import math

import numpy as np
import pytest

from anderson_corr import (AnalyticDensity, ExpansionConfig, dos_series,
                           dos_value, green_series, i_n, in_boundary,
                           i0_boundary, j_n, j_sigma_decomposed, lambda_r_eps,
                           moment_kernel, npoint_boundary_series, radius_a0)
from anderson_corr.covariant import identity, velocity
from anderson_corr.errors import (CoincidentPoints, RadiusViolation,
                                  RealAxisInput)
from anderson_corr.expansion import strip_constant


def cfg_for(gaussian, lam, n_max, **kw):
    return ExpansionConfig(density=gaussian, d=1, lam=lam, n_max=n_max, **kw)


def test_config_rejects_heavy_tails(cauchy):
    with pytest.raises(ValueError):
        ExpansionConfig(density=cauchy, d=1, lam=0.05, n_max=2)


def test_config_delta_validation(gaussian):
    with pytest.raises(ValueError):
        ExpansionConfig(density=gaussian, d=1, lam=0.1, n_max=2, delta=0.1)
    with pytest.raises(ValueError):
        ExpansionConfig(density=gaussian, d=1, lam=0.1, n_max=2, gap=1.0, delta=0.6)
    ExpansionConfig(density=gaussian, d=1, lam=0.1, n_max=2, gap=1.0, delta=0.2)


def test_dos_series_lambda_zero(gaussian):
    cfg = cfg_for(gaussian, 0.0, 4)
    for E in (-1.0, 0.0, 0.7):
        sv = dos_series(cfg, +1, E)
        assert sv.value == i0_boundary(gaussian, +1, E)
        dos, _ = dos_value(cfg, E)
        assert dos == pytest.approx(gaussian.eval(E).real, abs=1e-14)


def test_dos_series_order_two_hand_expansion(gaussian):
    # length-2 walks: 2d copies of (0, e, 0) contributing I_1 * I_0
    cfg = cfg_for(gaussian, 0.05, 2)
    sv = dos_series(cfg, +1, 0.3)
    hand = 0.05 ** 2 * 2 * in_boundary(gaussian, 1, +1, 0.3) \
        * i0_boundary(gaussian, +1, 0.3)
    assert sv.order_terms[2] == pytest.approx(hand, rel=1e-12)
    assert sv.order_terms[1] == 0.0


def test_dos_requires_identity_observable(gaussian):
    cfg = ExpansionConfig(density=gaussian, d=1, lam=0.05, n_max=2,
                          observables=(velocity(0, 0.05, 1),))
    with pytest.raises(ValueError):
        dos_series(cfg, +1, 0.0)


def test_odd_orders_vanish_for_identity(gaussian):
    cfg = cfg_for(gaussian, 0.07, 5)
    sv = dos_series(cfg, +1, 0.4)
    assert sv.order_terms[1] == 0.0
    assert sv.order_terms[3] == 0.0
    assert sv.order_terms[5] == 0.0


def test_green_series_single_point_orders(gaussian):
    # order-2 coefficient by hand: 2d * I_1(z) * I_0(z)
    z = 0.4 + 0.6j
    cfg = cfg_for(gaussian, 0.05, 2)
    sv = green_series(cfg, (z,))
    hand = 0.05 ** 2 * 2 * i_n(gaussian, 1, z) * i_n(gaussian, 0, z)
    assert sv.order_terms[2] == pytest.approx(hand, rel=1e-12)
    assert sv.order_terms[0] == i_n(gaussian, 0, z)


def test_green_series_two_point_lambda_zero(gaussian):
    obs = (identity(1), identity(1))
    cfg = ExpansionConfig(density=gaussian, d=1, lam=0.0, n_max=0,
                          observables=obs)
    z = (0.3 + 0.5j, -0.2 - 0.7j)
    sv = green_series(cfg, z)
    assert sv.value == pytest.approx(j_n(gaussian, (0, 0), z), rel=1e-12)


def test_green_rejects_real_axis(gaussian):
    with pytest.raises(RealAxisInput):
        green_series(cfg_for(gaussian, 0.05, 2), (0.5,))


def test_boundary_series_lambda_zero_two_point(gaussian):
    obs = (identity(1), identity(1))
    cfg = ExpansionConfig(density=gaussian, d=1, lam=0.0, n_max=0,
                          observables=obs)
    sv = npoint_boundary_series(cfg, (1, -1), (0.0, 1.0))
    expect = j_sigma_decomposed(gaussian, (0, 0), (1, -1), (0.0, 1.0))
    assert sv.value == pytest.approx(expect, rel=1e-12)


def test_boundary_series_rejects_coincident(gaussian):
    obs = (identity(1), identity(1))
    cfg = ExpansionConfig(density=gaussian, d=1, lam=0.0, n_max=0,
                          observables=obs)
    with pytest.raises(CoincidentPoints):
        npoint_boundary_series(cfg, (1, -1), (0.5, 0.5))


def test_series_conjugation_symmetry(gaussian):
    obs = (identity(1), identity(1))
    cfg = ExpansionConfig(density=gaussian, d=1, lam=0.06, n_max=4,
                          observables=obs)
    a = npoint_boundary_series(cfg, (1, -1), (0.0, 1.0)).value
    b = npoint_boundary_series(cfg, (-1, 1), (0.0, 1.0)).value
    assert b == pytest.approx(a.conjugate(), rel=1e-10)


def test_offaxis_tail_bound_sound_and_geometric(gaussian):
    cfg = cfg_for(gaussian, 0.05, 10)
    z = 0.3 + 0.5j
    sv = green_series(cfg, (z,))
    assert 0.0 < sv.tail_ratio < 1.0
    for n in range(0, 9):
        diff = abs(sv.partial(n) - sv.value)
        assert diff <= sv.tail_at(n)
    ratios = [sv.tail_at(n + 1) / sv.tail_at(n) for n in range(5)]
    for r in ratios:
        assert r == pytest.approx(sv.tail_ratio, rel=1e-12)


def test_certified_mode_raises_outside_radius(gaussian):
    cfg = cfg_for(gaussian, 0.05, 2)
    with pytest.raises(RadiusViolation):
        dos_series(cfg, +1, 0.0, certified=True)
    # small enough hopping is certified for the one-point boundary series
    cfg2 = cfg_for(gaussian, 0.001, 2)
    sv = dos_series(cfg2, +1, 0.0, certified=True)
    assert math.isfinite(sv.tail_bound)


def test_exploratory_mode_reports_infinite_tail(gaussian):
    sv = dos_series(cfg_for(gaussian, 0.05, 2), +1, 0.0)
    assert math.isinf(sv.tail_bound)


def test_dos_nonnegative_in_certified_regime(gaussian):
    cfg = cfg_for(gaussian, 0.001, 6)
    for E in np.linspace(-3.0, 3.0, 13):
        dos, tail = dos_value(cfg, float(E))
        assert dos >= -tail


def test_dos_integrates_to_one_at_lambda_zero(gaussian):
    cfg = cfg_for(gaussian, 0.0, 0)
    grid = np.linspace(-8.0, 8.0, 401)
    vals = [dos_value(cfg, float(E))[0] for E in grid]
    assert np.trapezoid(vals, grid) == pytest.approx(1.0, abs=1e-8)


def test_radius_a0_formula(gaussian):
    cfg = cfg_for(gaussian, 0.01, 2)
    C = strip_constant(1.0)
    expect = 4.0 * 1 * 1 * (4.0 * C / 1.0) * math.e * math.exp(0.5)
    assert radius_a0(cfg) == pytest.approx(expect, rel=1e-14)
    assert C == pytest.approx(8.0 / math.pi + 4.0, rel=1e-15)


def test_radius_a0_monotone(gaussian):
    base = radius_a0(cfg_for(gaussian, 0.01, 2))
    two_d = radius_a0(ExpansionConfig(density=gaussian, d=2, lam=0.01, n_max=2))
    obs = (identity(1), identity(1))
    two_n = radius_a0(ExpansionConfig(density=gaussian, d=1, lam=0.01, n_max=2,
                                      observables=obs))
    assert two_d == pytest.approx(2.0 * base)
    assert two_n == pytest.approx(2.0 * base)


def test_lambda_r_eps_formula(gaussian):
    eps = 0.5
    C = strip_constant(1.0)
    expect = eps ** 3 / (2.0 * 1 * math.e ** 3 * 1.0 * C * math.exp(0.5))
    assert lambda_r_eps(gaussian, 1, eps) == pytest.approx(expect, rel=1e-14)
    with pytest.raises(ValueError):
        lambda_r_eps(gaussian, 1, 1.5)


def test_moment_kernel_values():
    assert moment_kernel(2.0, (0.5, 0.5)) == pytest.approx(1.0)
    assert moment_kernel(3.0, (0.2,) * 4) == pytest.approx(1.5 ** 4)
    assert moment_kernel(0.0, (0.0, 1.0)) == 0.0
    assert moment_kernel(2.0, (0.0, math.pi / 2)) == pytest.approx(4.0 / math.pi ** 2)


def test_moment_kernel_cyclic_invariance():
    es = (0.1, -0.4, 0.9, 0.3)
    rolled = es[1:] + es[:1]
    assert moment_kernel(1.7, es) == pytest.approx(moment_kernel(1.7, rolled))


def test_moment_kernel_validation():
    with pytest.raises(ValueError):
        moment_kernel(1.0, (0.0,))
    with pytest.raises(ValueError):
        moment_kernel(1.0, (0.0, 1.0, 2.0))
    with pytest.raises(ValueError):
        moment_kernel(-1.0, (0.0, 1.0))


def test_series_value_record_round_trips(gaussian):
    sv = dos_series(cfg_for(gaussian, 0.01, 2), +1, 0.3)
    rec = json.loads(json.dumps(sv.to_record()))
    assert set(rec) == {"value_re", "value_im", "order", "tail_bound",
                        "lambda", "energies", "sigmas"}
    assert rec["order"] == 2
    assert rec["lambda"] == 0.01
    assert rec["sigmas"] == [1]


def test_partial_sum_accessors(gaussian):
    sv = dos_series(cfg_for(gaussian, 0.02, 4), +1, 0.1)
    assert sv.partial(4) == pytest.approx(sv.value)
    assert sv.partial(0) == sv.order_terms[0]
    with pytest.raises(ValueError):
        sv.partial(5)
    assert sv.ratio_data[-1] == pytest.approx(abs(sv.value))
