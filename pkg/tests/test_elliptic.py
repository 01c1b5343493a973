import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import theta_sigma
from paddrop.elliptic import (
    SigmaDomainError,
    annulus_sum_bound,
    aq_constant,
    eisenstein,
    epstein_zeta,
    h_potential,
    lattice_sum_Aq,
    log_abs_sigma,
    make_evaluator,
    scaled_sigma,
    sigma_origin_deviation_bound,
    zeta_series,
)
from paddrop.lattice import D2, LatticeKind, make_lattice, points_in_disk

KINDS = [LatticeKind.SQUARE, LatticeKind.TRIANGULAR]
_EVALUATORS = {}


def evaluator(kind):
    if kind not in _EVALUATORS:
        _EVALUATORS[kind] = make_evaluator(make_lattice(kind))
    return _EVALUATORS[kind]


def a4_exact():
    with mp.workdps(30):
        return float(mp.zeta(2) * mp.catalan)


def a6_exact():
    # (sqrt3/16) * 6 zeta(3) L(3, chi_-3), with L(3, chi_-3) = 4 pi^3 / (81 sqrt3)
    with mp.workdps(30):
        return float(mp.sqrt(3) / 16 * 6 * mp.zeta(3) * 4 * mp.pi ** 3 / (81 * mp.sqrt(3)))


def test_a4_matches_zeta_catalan():
    value, err = aq_constant(4)
    assert err < 5e-9
    assert abs(value - a4_exact()) <= max(err, 1e-14)


def test_a6_matches_closed_form():
    value, err = aq_constant(6)
    assert err < 5e-9
    assert abs(value - a6_exact()) <= max(err, 1e-14)


@pytest.mark.parametrize("kind", KINDS)
def test_direct_sum_with_tail_reproduces_aq(kind):
    res = lattice_sum_Aq(make_lattice(kind), truncation_radius=120.0)
    # direct partial sum plus area estimate of the tail, against Chowla-Selberg
    assert abs(res.partial + res.tail_correction - res.value) < 1e-6
    # the partial sums approach the value at the expected R^(2-q) rate
    coarse = lattice_sum_Aq(make_lattice(kind), truncation_radius=30.0)
    assert abs(coarse.value - coarse.partial) > abs(res.value - res.partial)


def test_lattice_sum_rejects_bad_input(square):
    with pytest.raises(ValueError):
        lattice_sum_Aq(square, target_error=0.0)
    with pytest.raises(ValueError):
        lattice_sum_Aq(square.scaled(1.0).__class__(**{**square.__dict__, "q": 5}))


@pytest.mark.parametrize("a,b,c,s", [(1.0, 0.0, 1.0, 2.0), (1.0, 1.0, 1.0, 3.0),
                                     (1.0, 0.3, 2.0, 2.5), (2.0, -1.0, 3.0, 1.7)])
def test_epstein_zeta_against_direct_sum(a, b, c, s):
    value, err = epstein_zeta(a, b, c, s)
    k = 400
    m, n = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1))
    qf = a * m * m + b * m * n + c * n * n
    qf = qf[(m != 0) | (n != 0)]
    radius2 = np.min(qf[(np.abs(m) == k)[(m != 0) | (n != 0)]])
    inside = qf < radius2
    direct = np.sum(qf[inside].astype(float) ** -s)
    # tail over Q >= radius2 approximated by the area integral
    area = 2 * math.pi / math.sqrt(4 * a * c - b * b)
    tail = area * radius2 ** (1 - s) / (2 * (s - 1)) * 2
    assert err < 1e-12
    assert value == pytest.approx(direct + tail, rel=5e-5)


def test_epstein_zeta_known_values():
    # sum' (m^2 + n^2)^-s = 4 zeta(s) beta(s)
    value, _ = epstein_zeta(1.0, 0.0, 1.0, 3.0)
    with mp.workdps(30):
        want = float(4 * mp.zeta(3) * mp.dirichlet(3, [0, 1, 0, -1]))
    assert value == pytest.approx(want, rel=1e-14)
    with pytest.raises(ValueError):
        epstein_zeta(1.0, 3.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        epstein_zeta(1.0, 0.0, 1.0, 1.0)


def test_eisenstein_closed_forms(square, triangular):
    g4, err = eisenstein(square, 4)
    with mp.workdps(30):
        want4 = float(mp.gamma(0.25) ** 8 / (960 * mp.pi ** 2))
        unit6 = float(mp.gamma(mp.mpf(1) / 3) ** 18 / (8960 * mp.pi ** 6))
    assert abs(g4 - want4) < max(err, 1e-13)
    g6, err6 = eisenstein(triangular, 6)
    # unit-side lattice Z + exp(i pi/3) Z scaled to side d2
    assert abs(g6 - unit6 * D2 ** -6) < max(err6, 1e-12)
    # symmetry kills G6 on the square lattice and G4 on the triangular one
    assert abs(eisenstein(square, 6)[0]) < 1e-12
    assert abs(eisenstein(triangular, 4)[0]) < 1e-12
    g8, _ = eisenstein(square, 8)
    assert g8 == pytest.approx(3 * want4 ** 2 / 7, rel=1e-13)
    with pytest.raises(ValueError):
        eisenstein(square, 5)


def test_annulus_bound_dominates_sum(square, triangular):
    for spec in (square, triangular):
        pts = points_in_disk(spec, 60.0)
        for radius in (5.0, 10.0, 20.0):
            far = pts[np.abs(pts) > radius]
            # the far sum is truncated at 60; the dropped part is below the bound at 60
            assert np.sum(np.abs(far) ** -6.0) <= annulus_sum_bound(spec, 6.0, radius)
    with pytest.raises(ValueError):
        annulus_sum_bound(square, 2.0, 10.0)
    assert annulus_sum_bound(square, 4.0, 0.5) == math.inf


@pytest.mark.parametrize("kind", KINDS)
def test_evaluator_certifies_default_domain(kind):
    ev = evaluator(kind)
    assert ev.tail_bound <= 1e-12
    assert ev.eval_domain_radius >= ev.spec.circumradius


@pytest.mark.parametrize("kind", KINDS)
def test_against_theta_function_oracle(kind):
    ev = evaluator(kind)
    rng = np.random.default_rng(7)
    for _ in range(25):
        z = complex(*rng.uniform(-4, 4, size=2))
        value, err = log_abs_sigma(ev, z)
        want = float(mp.log(abs(theta_sigma(ev.spec, z))))
        assert abs(value - want) <= err + 1e-13


def test_log_sigma_at_cell_centres(square, triangular):
    with mp.workdps(30):
        ls = float(mp.pi / 4 + mp.log(2 * mp.sqrt(2 * mp.pi)) - 2 * mp.loggamma(0.25))
        lt = float(mp.pi / (3 * mp.sqrt(3)) + mp.log(2 * mp.sqrt(2) * mp.pi)
                   - mp.log(3) / 4 - 3 * mp.loggamma(mp.mpf(1) / 3))
    v, e = log_abs_sigma(evaluator(LatticeKind.SQUARE), (1 + 1j) / 2)
    assert abs(v - ls) <= e + 1e-15
    bt = 3 ** -0.75 * math.sqrt(2) * cmath.exp(1j * math.pi / 6)
    v, e = log_abs_sigma(evaluator(LatticeKind.TRIANGULAR), bt)
    assert abs(v - lt) <= e + 1e-15


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.7, 0.7), st.floats(-0.7, 0.7), st.integers(-3, 3), st.integers(-3, 3),
       st.sampled_from(KINDS))
def test_quasi_periodicity(x, y, m, n, kind):
    ev = evaluator(kind)
    z = complex(x, y)
    if abs(z - complex(0)) < 0.05 or abs(z - (0.5 + 0.5j)) > 5:
        return
    a, b = ev.spec.periods
    lam = m * a + n * b
    if min(abs(z - p) for p in points_in_disk(ev.spec, 2.0)) < 0.05:
        return
    v0, e0 = log_abs_sigma(ev, z)
    v1, e1 = log_abs_sigma(ev, z + lam)
    shift = math.pi / (2 * ev.spec.covolume) * (abs(z + lam) ** 2 - abs(z) ** 2)
    assert abs(v1 - v0 - shift) <= e0 + e1 + 1e-12 * (1 + abs(shift))


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(KINDS))
def test_h_potential_is_periodic(x, y, kind):
    ev = evaluator(kind)
    z = complex(x, y)
    if min(abs(z - p) for p in points_in_disk(ev.spec, 6.0)) < 0.05:
        return
    a, b = ev.spec.periods
    h0, e0 = h_potential(ev, z)
    h1, e1 = h_potential(ev, z + 2 * a - b)
    assert abs(h1 - h0) <= e0 + e1 + 1e-13


@pytest.mark.parametrize("kind", KINDS)
def test_unfolded_matches_folded(kind):
    spec = make_lattice(kind)
    ev = make_evaluator(spec, eval_domain_radius=2.5, tol=1e-11)
    rng = np.random.default_rng(3)
    for _ in range(20):
        z = complex(*rng.uniform(-1.7, 1.7, size=2))
        if min(abs(z - p) for p in points_in_disk(spec, 4.0)) < 0.05:
            continue
        u, eu = log_abs_sigma(ev, z, fold=False)
        f, ef = log_abs_sigma(ev, z)
        assert abs(u - f) <= eu + ef + 1e-14


@pytest.mark.parametrize("kind", KINDS)
def test_deviation_bound_near_origin(kind):
    ev = evaluator(kind)
    q = ev.spec.q
    rng = np.random.default_rng(11)
    rmax = 0.6 ** (1 / q)
    for _ in range(40):
        z = rmax * math.sqrt(rng.uniform(0.0001, 1)) * cmath.exp(2j * math.pi * rng.uniform())
        value, err = log_abs_sigma(ev, z)
        assert abs(value - math.log(abs(z))) <= sigma_origin_deviation_bound(ev.spec, z) + err


def test_domain_errors(square):
    ev = evaluator(LatticeKind.SQUARE)
    with pytest.raises(SigmaDomainError):
        log_abs_sigma(ev, 1 + 1j)
    with pytest.raises(SigmaDomainError):
        log_abs_sigma(ev, 0.9 + 0.1j, fold=False)
    with pytest.raises(SigmaDomainError):
        log_abs_sigma(ev, complex(float("nan"), 0))
    with pytest.raises(SigmaDomainError):
        log_abs_sigma(ev, 1e7)
    with pytest.raises(SigmaDomainError):
        sigma_origin_deviation_bound(square, 0.9)
    with pytest.raises(SigmaDomainError):
        h_potential(ev, 2.0)


@given(st.floats(0.3, 4), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
@settings(max_examples=25, deadline=None)
def test_scaled_sigma_homogeneity(t, x, y):
    # sigma_{t Lambda}(t z) = t sigma_Lambda(z)
    z = complex(x, y)
    if abs(z) < 0.05:
        return
    ev = evaluator(LatticeKind.TRIANGULAR)
    value, err = scaled_sigma(ev, t, t * z)
    base, berr = log_abs_sigma(ev, z)
    assert abs(value - (math.log(t) + base)) <= err + berr + 1e-14
    with pytest.raises(ValueError):
        scaled_sigma(ev, -1.0, z)


def test_scaled_lattice_evaluator_agrees_with_theta():
    spec = make_lattice(LatticeKind.SCALED_TRIANGULAR, t=math.sqrt(2))
    ev = make_evaluator(spec)
    z = 0.4 + 0.9j
    value, err = log_abs_sigma(ev, z)
    assert abs(value - float(mp.log(abs(theta_sigma(spec, z))))) <= err + 1e-13


@pytest.mark.parametrize("kind", KINDS)
def test_zeta_series_reproduces_eta(kind):
    spec = make_lattice(kind)
    eta1 = zeta_series(spec, spec.w1, radius=150.0)
    assert abs(eta1 - spec.eta1) < 1e-6
