import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from indmath.errors import NonPositiveDownwind, NonPositiveWind
from indmath.plume import (
    ConstantSigma,
    Contaminant,
    DispersionSpec,
    PowerLawSigma,
    Receptor,
    Source,
    WindInterval,
    concentration,
    concentration_grid,
    deposition,
    rotate_to_wind_frame,
    sigma_at,
    superpose_concentration,
)
from indmath.synthetic import smelter_scenario

CONST = DispersionSpec.constant(10.0, 10.0)


def reference_concentration(q, u, sy, sz, y, z, h):
    """Plume written as a product of normal densities (independent of the module)."""
    return q / u * norm.pdf(y, scale=sy) * (norm.pdf(z - h, scale=sz) + norm.pdf(z + h, scale=sz))


# -- sigma models -------------------------------------------------------------


def test_constant_sigma():
    spec = DispersionSpec.constant(10.0, 5.0)
    for x in (0.1, 50.0, 1e4):
        assert sigma_at(spec, x) == (10.0, 5.0)


def test_power_law_value():
    sy, _ = sigma_at(DispersionSpec.power_law(0.08, 0.9, 0.06, 0.8), 100.0)
    assert sy == pytest.approx(0.08 * math.exp(0.9 * math.log(100.0)), rel=1e-14)
    assert sy == pytest.approx(5.048, abs=5e-4)


def test_sigma_rejects_upwind():
    with pytest.raises(NonPositiveDownwind):
        sigma_at(CONST, 0.0)


def test_sigma_validation():
    with pytest.raises(ValueError):
        PowerLawSigma(0.1, 1.5)
    with pytest.raises(ValueError):
        ConstantSigma(0.0)


# -- concentration ------------------------------------------------------------


def test_worked_value():
    c = concentration(Source(0, 0, 20.0, 1.0), 5.0, CONST, (100.0, 0.0, 0.0))
    ref = reference_concentration(1.0, 5.0, 10.0, 10.0, 0.0, 0.0, 20.0)
    assert c == pytest.approx(ref, rel=1e-12)
    assert c == pytest.approx(8.615e-5, rel=1e-3)


def test_zero_rate_gives_zero():
    assert concentration(Source(0, 0, 10.0, 0.0), 3.0, CONST, (50.0, 4.0, 1.0)) == 0.0


def test_upwind_is_zero():
    assert concentration(Source(0, 0, 10.0), 3.0, CONST, (-5.0, 0.0, 0.0)) == 0.0


def test_nonpositive_wind_rejected():
    with pytest.raises(NonPositiveWind):
        concentration(Source(0, 0, 10.0), 0.0, CONST, (5.0, 0.0, 0.0))
    with pytest.raises(NonPositiveWind):
        WindInterval(3600.0, -1.0)


def test_ground_release_doubles():
    # with H = 0 the image term coincides with the direct term
    s = Source(0, 0, 0.0, 1.0)
    c = concentration(s, 4.0, CONST, (80.0, 3.0, 0.0))
    direct = 1.0 / (2 * math.pi * 4.0 * 100.0) * math.exp(-9.0 / 200.0)
    # equal up to re-association of the product (a few ulps)
    assert c == pytest.approx(2 * direct, rel=4 * np.finfo(float).eps, abs=0)
    # and bit-exact against the same plume without its image term
    free = concentration(s, 4.0, CONST, (80.0, 3.0, 0.0), ground_reflection=False)
    assert c == 2 * free


positions = st.tuples(st.floats(1.0, 2000.0), st.floats(0.0, 300.0), st.floats(0.0, 100.0))


@settings(max_examples=80, deadline=None)
@given(positions, st.floats(0.0, 100.0), st.floats(0.5, 20.0))
def test_crosswind_symmetry(p, h, u):
    x, y, z = p
    s = Source(0, 0, h)
    spec = DispersionSpec()
    assert concentration(s, u, spec, (x, y, z)) == concentration(s, u, spec, (x, -y, z))


@settings(max_examples=80, deadline=None)
@given(st.floats(10.0, 2000.0), st.floats(0.0, 80.0))
def test_ground_is_zero_flux(x, h):
    spec = DispersionSpec()
    s = Source(0, 0, h)
    _, sz = sigma_at(spec, x)
    dz = 1e-4 * sz
    c0 = concentration(s, 5.0, spec, (x, 0.0, 0.0))
    if c0 < 1e-300:
        return
    c1, c2 = (concentration(s, 5.0, spec, (x, 0.0, k * dz)) for k in (1, 2))
    dcdz = (-3 * c0 + 4 * c1 - c2) / (2 * dz)
    assert abs(dcdz) * sz / c0 <= 1e-6


@settings(max_examples=50, deadline=None)
@given(st.floats(10.0, 2000.0), st.floats(0.0, 50.0))
def test_crosswind_decay(x, h):
    spec = DispersionSpec()
    ys = np.linspace(0.0, 500.0, 60)
    c = concentration(Source(0, 0, h), 5.0, spec, (x, ys, 0.0))
    assert np.all(np.diff(c) <= 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.0, 5.0), positions)
def test_linear_in_rate(q1, q2, p):
    spec = DispersionSpec()
    base = Source(0, 0, 30.0, 1.0)
    c1 = concentration(base.with_rate(q1), 4.0, spec, p)
    c2 = concentration(base.with_rate(q2), 4.0, spec, p)
    c12 = concentration(base.with_rate(q1 + q2), 4.0, spec, p)
    assert c12 == pytest.approx(c1 + c2, rel=1e-12, abs=1e-300)


# -- wind frame ---------------------------------------------------------------


def test_rotation_identity_and_quarter_turn():
    assert rotate_to_wind_frame((3.0, -2.0), 0.0) == (3.0, -2.0)
    xd, yc = rotate_to_wind_frame((0.0, 1.0), 90.0)
    assert (xd, yc) == pytest.approx((1.0, 0.0), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_half_turn_twice_is_identity(x, y):
    once = rotate_to_wind_frame((x, y), 180.0)
    twice = rotate_to_wind_frame(once, 180.0)
    assert twice == pytest.approx((x, y), abs=1e-12 * max(1.0, abs(x), abs(y)))


def test_wind_direction_points_downwind():
    # wind blowing toward +y (90 deg) carries the plume to the north of the source
    s = Source(0, 0, 10.0)
    north = concentration(s, 5.0, CONST, (0.0, 200.0, 0.0), direction_deg=90.0)
    south = concentration(s, 5.0, CONST, (0.0, -200.0, 0.0), direction_deg=90.0)
    assert north > 0 and south == 0


# -- superposition and deposition ---------------------------------------------


def test_single_source_superposition():
    s = Source(10, -5, 25.0, 2.5)
    p = (400.0, 30.0, 2.0)
    assert superpose_concentration([s], 4.0, DispersionSpec(), p, 30.0) == concentration(
        s, 4.0, DispersionSpec(), p, 30.0
    )


def test_colocated_sources_double():
    s = Source(0, 0, 25.0, 2.5)
    p = (400.0, 30.0, 2.0)
    one = superpose_concentration([s], 4.0, DispersionSpec(), p)
    assert superpose_concentration([s, s], 4.0, DispersionSpec(), p) == 2 * one


def test_smelter_layout_superposes_termwise():
    sc = smelter_scenario()
    for w in sc.wind[:4]:
        for r in sc.receptors:
            p = (r.x, r.y, 0.0)
            total = superpose_concentration(sc.sources, w.speed, sc.spec, p, w.direction)
            terms = sum(concentration(s, w.speed, sc.spec, p, w.direction) for s in sc.sources)
            assert total == pytest.approx(terms, rel=1e-14, abs=1e-300)


def test_deposition_closure():
    s = Source(0, 0, 20.0, 1.0)
    r = Receptor(100.0, 0.0)
    wind = [WindInterval(3600.0, 5.0, 0.0)]
    dep = deposition([s], r, wind, CONST, Contaminant(settling_velocity=0.02))
    c = reference_concentration(1.0, 5.0, 10.0, 10.0, 0.0, 0.0, 20.0)
    assert dep == pytest.approx(1000.0 * 0.02 * c * 3600.0, rel=1e-12)


def test_empty_or_zero_wind_deposits_nothing():
    s = [Source(0, 0, 20.0)]
    r = Receptor(100.0, 0.0)
    assert deposition(s, r, [], CONST, Contaminant()) == 0.0
    assert deposition(s, r, [WindInterval(0.0, 3.0)], CONST, Contaminant()) == 0.0


def test_grid_shape_and_zero_sources():
    wind = WindInterval(3600.0, 4.0, 45.0)
    g = concentration_grid([], wind, DispersionSpec(), (-100, 100, -50, 50), (5, 3))
    assert g.values.shape == (3, 5) and not g.values.any()
    rows = list(g.rows())
    assert len(rows) == 15 and rows[1][:2] == (-50.0, -50.0)


def test_grid_matches_pointwise():
    sc = smelter_scenario()
    w = sc.wind[3]
    g = concentration_grid(sc.sources, w, sc.spec, (-1000, 1000, -800, 800), (9, 7))
    for iy in (0, 3, 6):
        for ix in (1, 4, 8):
            p = (g.x[ix], g.y[iy], 0.0)
            expect = superpose_concentration(sc.sources, w.speed, sc.spec, p, w.direction)
            assert g.values[iy, ix] == pytest.approx(expect, rel=1e-13, abs=1e-300)
