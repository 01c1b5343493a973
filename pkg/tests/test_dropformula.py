import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paddrop.dropformula import (
    B_SQUARE,
    B_TRIANGLE,
    HEX_A_SQUARED,
    Arrangement,
    BandKind,
    constant_CH,
    constant_CM,
    constant_CY,
    constants_via_sigma,
    log_sigma_barycentre,
    max_point,
    scaling_check,
    sigma_barycentre_modulus,
    sweep,
    u_epsilon,
    vmax,
)
from paddrop.elliptic import make_evaluator
from paddrop.lattice import D3, LatticeKind, make_lattice


def mp_constants():
    with mp.workdps(40):
        cm = mp.loggamma(0.25) / mp.pi - mp.log(2 * mp.sqrt(2 * mp.pi)) / (2 * mp.pi)
        cy = (3 * mp.loggamma(mp.mpf(1) / 3) / (2 * mp.pi)
              - mp.log(2 * mp.sqrt(2) * mp.pi) / (2 * mp.pi) + mp.log(3) / (8 * mp.pi))
        lsig = (mp.pi / (3 * mp.sqrt(3)) + mp.log(2 * mp.sqrt(2) * mp.pi) - mp.log(3) / 4
                - 3 * mp.loggamma(mp.mpf(1) / 3))
        ch = 4 / (3 * mp.sqrt(3)) / 8 - (mp.log(mp.sqrt(2)) + lsig) / (2 * mp.pi)
        return float(cm), float(cy), float(ch), float(lsig)


def test_constants_agree_with_published_decimals():
    assert abs(constant_CM() - 0.153418893205) < 5e-13
    assert abs(constant_CY() - 0.166549975068) < 5e-13
    assert abs(constant_CH() - 0.111391075030) < 5e-13
    assert abs(sigma_barycentre_modulus() - 0.642836690101) < 5e-12


def test_constants_against_high_precision():
    cm, cy, ch, lsig = mp_constants()
    assert constant_CM() == pytest.approx(cm, abs=2e-15)
    assert constant_CY() == pytest.approx(cy, abs=2e-15)
    assert constant_CH() == pytest.approx(ch, abs=2e-15)
    assert log_sigma_barycentre() == pytest.approx(lsig, abs=4e-15)


def test_constants_via_sigma_evaluator():
    via = constants_via_sigma()
    for name, closed in (("C_M", constant_CM()), ("C_Y", constant_CY()), ("C_H", constant_CH())):
        value, err = via[name]
        assert err < 1e-12
        assert abs(value - closed) < 1e-10


def test_hexagon_geometry_constant():
    assert HEX_A_SQUARED == pytest.approx(D3 ** 2, rel=1e-15)


def test_max_points():
    assert max_point("square").location == B_SQUARE
    assert max_point("triangular").location == B_TRIANGLE
    assert max_point("hex").location == 0
    # the barycentre is equidistant from the three corners of its triangle
    d2 = make_lattice(LatticeKind.TRIANGULAR).d
    corners = [0, d2, d2 * cmath.exp(1j * math.pi / 3)]
    dist = [abs(B_TRIANGLE - c) for c in corners]
    assert max(dist) - min(dist) < 1e-15


def test_triangular_example():
    r = vmax("triangular", 0.1)
    assert r.value == pytest.approx(0.202418, abs=5e-7)
    assert r.halfwidth == pytest.approx(1.1e-7, rel=0.01)
    assert r.band_kind is BandKind.CERTIFIED


@given(st.floats(0.01, 0.49), st.sampled_from(list(Arrangement)))
def test_value_formula_and_band(eps, arrangement):
    if arrangement is not Arrangement.SQUARE and eps >= 0.43:
        return
    r = vmax(arrangement, eps)
    want = math.log(1 / eps) / (2 * math.pi) - r.constant + eps ** 2 / 4
    assert r.value == pytest.approx(want, rel=1e-15)
    assert r.lower < r.value < r.upper
    if arrangement is Arrangement.HEXAGONAL:
        assert r.band_kind is BandKind.ASYMPTOTIC_ORDER_ONLY
        assert r.halfwidth == pytest.approx(eps ** 3)


def test_hex_band_constant_is_configurable():
    assert vmax("hexagonal", 0.2, hex_band_constant=2.0).halfwidth == pytest.approx(2 * 0.008)


@pytest.mark.parametrize("arrangement,eps", [("square", 0.5), ("square", 0.6),
                                             ("triangular", 0.54), ("hexagonal", 0.44),
                                             ("square", 0.0), ("square", -0.1),
                                             ("square", float("nan"))])
def test_out_of_range_radius(arrangement, eps):
    with pytest.raises(ValueError):
        vmax(arrangement, eps)


def test_overlap_message():
    with pytest.raises(ValueError, match="pads overlap"):
        vmax("square", 0.6)


@given(st.floats(0.05, 0.4), st.floats(-10, 10))
def test_source_scaling(eps, c):
    r = vmax("square", eps)
    s = r.scaled(c)
    assert s.value == r.value * c
    assert s.lower <= s.value <= s.upper


def test_sweep_shape_and_order():
    rows = sweep(["hexagonal", "square", "triangular"], 0.1, 0.3, 21)
    assert len(rows) == 63
    assert [r.arrangement for r in rows[::21]] == [Arrangement.SQUARE, Arrangement.TRIANGULAR,
                                                   Arrangement.HEXAGONAL]
    assert [r.epsilon for r in rows[:21]] == pytest.approx(list(np.linspace(0.1, 0.3, 21)))
    assert len(sweep(["s", "t", "h"], 0.1, 0.3, 1)) == 3
    with pytest.raises(ValueError):
        sweep(["square"], 0.3, 0.1, 5)
    with pytest.raises(ValueError):
        sweep(["square"], 0.1, 0.3, 0)


def test_equilateral_beats_square_beats_hexagonal():
    rows = sweep(list(Arrangement), 0.1, 0.3, 21)
    sq, tr, hx = rows[:21], rows[21:42], rows[42:]
    for s, t, h in zip(sq, tr, hx):
        assert t.upper < s.lower
        assert s.value < h.value


@pytest.mark.parametrize("kind,centre", [(LatticeKind.SQUARE, B_SQUARE),
                                         (LatticeKind.TRIANGULAR, B_TRIANGLE)])
def test_u_epsilon_at_centre_is_minus_vmax(kind, centre):
    spec = make_lattice(kind)
    arrangement = "square" if kind is LatticeKind.SQUARE else "triangular"
    for eps in (0.05, 0.2, 0.35):
        u, band = u_epsilon(spec, eps, centre)
        r = vmax(arrangement, eps)
        assert -u == pytest.approx(r.value, abs=1e-12)
        assert band == pytest.approx(r.halfwidth, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.02, 0.35), st.floats(0, 2 * math.pi),
       st.sampled_from([LatticeKind.SQUARE, LatticeKind.TRIANGULAR]))
def test_u_epsilon_nearly_vanishes_on_pads(eps, angle, kind):
    spec = make_lattice(kind)
    z = spec.periods[0] + eps * cmath.exp(1j * angle)
    u, band = u_epsilon(spec, eps, z)
    assert abs(u) <= band + 1e-13


def test_u_epsilon_is_periodic(triangular):
    ev = make_evaluator(triangular)
    z = 0.3 + 0.41j
    a, b = triangular.periods
    u0, _ = u_epsilon(triangular, 0.1, z, ev)
    u1, _ = u_epsilon(triangular, 0.1, z + 3 * a - 2 * b, ev)
    assert u1 == pytest.approx(u0, abs=1e-12)


def test_u_epsilon_errors(square):
    with pytest.raises(ValueError, match="inside a pad"):
        u_epsilon(square, 0.2, 0.1)
    with pytest.raises(ValueError, match="pads overlap"):
        u_epsilon(square, 0.5, 0.5)
    with pytest.raises(ValueError):
        u_epsilon(square, 0.0, 0.5)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 4.0), st.floats(0.05, 0.3),
       st.sampled_from([LatticeKind.SQUARE, LatticeKind.TRIANGULAR]))
def test_scaling_law(r, eps, kind):
    assert scaling_check(make_lattice(kind), eps, r) < 1e-11 * max(1.0, r * r)


def test_scaling_check_rejects_bad_scale(square):
    with pytest.raises(ValueError):
        scaling_check(square, 0.1, 0.0)
