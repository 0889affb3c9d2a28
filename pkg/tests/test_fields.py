import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hydrogauge.errors import ConfigurationError
from hydrogauge.fields import (
    ZERO,
    GaugeChoice,
    GaugeFunction,
    Poly,
    TimeBasis,
    builtin_gauge,
    field_polys,
    gauge_transform,
    make_envelope,
    physical_fields,
    preferential_diagnostics,
)

ENVELOPES = {
    "trapezoid": dict(t1=0.0, t1_plus=1.0, t2_minus=3.0, t2=4.0),
    "smooth-trapezoid": dict(t1=-2.0, t1_plus=3.0, t2_minus=7.0, t2=9.0),
    "gaussian": dict(t0=1.0, sigma=2.5),
    "zero-average-sine": dict(t0=-5.0, duration=30.0, omega=0.6),
}


def test_trapezoid_examples():
    T = make_envelope("trapezoid", **ENVELOPES["trapezoid"])
    assert T(2.0) == 1.0
    assert T(0.5) == pytest.approx(0.5)
    assert T.derivative(0.5) == pytest.approx(1.0)
    assert T.total_integral == pytest.approx(3.0)
    ts = np.linspace(-1, 5, 601)
    vals = T(ts)
    assert vals.min() >= 0 and vals.max() <= 1
    assert np.all(vals[(ts <= 0) | (ts >= 4)] == 0)


def test_trapezoid_one_sided_derivatives():
    T = make_envelope("trapezoid", **ENVELOPES["trapezoid"])
    assert T.derivative(1.0, side=-1) == 1.0 and T.derivative(1.0, side=1) == 0.0
    assert T.derivative(3.0, side=-1) == 0.0 and T.derivative(3.0, side=1) == -1.0


@pytest.mark.parametrize("bad", [
    dict(t1=0.0, t1_plus=3.0, t2_minus=2.0, t2=4.0),
    dict(t1=1.0, t1_plus=0.0, t2_minus=3.0, t2=4.0),
    dict(t1=0.0, t1_plus=1.0, t2_minus=3.0, t2=3.0),
])
def test_trapezoid_ordering_errors(bad):
    with pytest.raises(ConfigurationError):
        make_envelope("trapezoid", **bad)


def test_envelope_parameter_errors():
    with pytest.raises(ConfigurationError):
        make_envelope("square", t0=0.0)
    with pytest.raises(ConfigurationError):
        make_envelope("gaussian", t0=0.0)
    with pytest.raises(ConfigurationError):
        make_envelope("gaussian", t0=0.0, sigma=-1.0)


@pytest.mark.parametrize("kind", sorted(ENVELOPES))
def test_envelope_orders_are_consistent(kind):
    """order -1, 0, 1, 2 are successive derivatives (central differences away from kinks)."""
    env = make_envelope(kind, **ENVELOPES[kind])
    lo, hi = env.support
    bps = np.array(env.breakpoints)
    ts = np.linspace(lo - 1, hi + 1, 157)
    ts = ts[np.min(np.abs(ts[:, None] - bps[None, :]), axis=1) > 1e-3]
    h = 1e-5
    for order in (-1, 0, 1):
        fd = (env(ts + h, order) - env(ts - h, order)) / (2 * h)
        assert np.allclose(fd, env(ts, order + 1), atol=1e-6, rtol=1e-6), (kind, order)


def test_zero_average_sine_integrates_to_zero():
    env = make_envelope("zero-average-sine", **ENVELOPES["zero-average-sine"])
    assert abs(env.total_integral) < 1e-14
    assert abs(env(env.support[1] + 10.0, -1)) < 1e-14


def test_gaussian_integral():
    env = make_envelope("gaussian", **ENVELOPES["gaussian"])
    assert env.total_integral == pytest.approx(2.5 * math.sqrt(2 * math.pi), rel=1e-12)


def test_builtin_magnetic_potentials(trapezoid):
    q = np.array([[0.3, -1.2, 0.7], [2.0, 0.5, -1.0]])
    S = builtin_gauge("MAGNETIC_SYMMETRIC", trapezoid, 0.01)
    L = builtin_gauge("MAGNETIC_LANDAU", trapezoid, 0.01)
    AS = np.stack([c(q, 50.0) for c in S.A], -1)
    AL = np.stack([c(q, 50.0) for c in L.A], -1)
    assert np.allclose(AS, 0.01 * np.stack([-q[:, 1] / 2, q[:, 0] / 2, 0 * q[:, 0]], -1))
    assert np.allclose(AL, 0.01 * np.stack([0 * q[:, 0], q[:, 0], 0 * q[:, 0]], -1))


def test_magnetic_fields_and_ramp_difference(trapezoid):
    eps = 0.02
    S = builtin_gauge("MAGNETIC_SYMMETRIC", trapezoid, eps)
    L = builtin_gauge("MAGNETIC_LANDAU", trapezoid, eps)
    rng = np.random.default_rng(1)
    q = rng.uniform(-5, 5, (50, 3))
    t = rng.uniform(-10, 110, 50)
    ES, BS = physical_fields(S, q, t)
    EL, BL = physical_fields(L, q, t)
    assert np.allclose(BS, BL, atol=1e-15)
    assert np.allclose(BS[:, 2], eps * trapezoid(t))
    dT = trapezoid.derivative(t)
    expected = eps * dT[:, None] * np.stack([q[:, 1] / 2, q[:, 0] / 2, 0 * t], -1)
    assert np.allclose(ES - EL, expected, atol=1e-15)
    # plateau: no electric field in either gauge
    E_plateau, _ = physical_fields(L, q, np.full(50, 50.0))
    assert np.all(E_plateau == 0)


def test_electric_gauges(zero_avg):
    eps = 1e-3
    L = builtin_gauge("ELECTRIC_LENGTH", zero_avg, eps)
    V = builtin_gauge("ELECTRIC_VELOCITY", zero_avg, eps)
    q = np.array([[0.1, 0.2, 0.3]])
    for t in (5.0, 17.3, 44.0):
        EL, BL = physical_fields(L, q, t)
        EV, BV = physical_fields(V, q, t)
        assert np.allclose(EL, EV, atol=1e-18) and np.allclose(EL[0], [0, 0, eps * zero_avg(t)])
        assert not BL.any() and not BV.any()
    # velocity-gauge A vanishes after a zero-average pulse
    assert abs(V.A[2](q, 1e3)[0]) < 1e-16
    assert preferential_diagnostics(V).A_vanishes_at_infinity


def test_polarization_is_normalized(zero_avg):
    L = builtin_gauge("ELECTRIC_LENGTH", zero_avg, 1.0, polarization=(3.0, 0.0, 4.0))
    E, _ = physical_fields(L, np.zeros((1, 3)), 10.0)
    assert np.allclose(E[0], zero_avg(10.0) * np.array([0.6, 0.0, 0.8]))
    with pytest.raises(ConfigurationError):
        builtin_gauge("ELECTRIC_LENGTH", zero_avg, 1.0, polarization=(0, 0, 0))


def test_unknown_gauge_kind(trapezoid):
    with pytest.raises(ConfigurationError):
        builtin_gauge("MAGNETIC_COULOMB", trapezoid)


def test_length_to_velocity_transform(zero_avg):
    eps = 0.05
    L = builtin_gauge("ELECTRIC_LENGTH", zero_avg, eps)
    V = builtin_gauge("ELECTRIC_VELOCITY", zero_avg, eps)
    f = GaugeFunction(sum((Poly.coordinate(i) * V.A[i] for i in range(3)), ZERO))
    LV = gauge_transform(L, f)
    rng = np.random.default_rng(7)
    q = rng.uniform(-4, 4, (40, 3))
    t = rng.uniform(-5, 70, 40)
    for a, b in zip(LV.A, V.A):
        assert np.allclose(a(q, t), b(q, t), atol=1e-15)
    assert np.allclose(LV.phi(q, t), V.phi(q, t), atol=1e-15)


def test_identity_transform(trapezoid):
    S = builtin_gauge("MAGNETIC_SYMMETRIC", trapezoid, 0.1)
    S0 = gauge_transform(S, GaugeFunction(ZERO))
    assert all(a == b for a, b in zip(S0.A, S.A)) and S0.phi == S.phi


def test_restriction_violations(trapezoid):
    T0 = (TimeBasis(trapezoid, 0),)
    with pytest.raises(ConfigurationError):
        GaugeFunction(Poly.monomial((1, 1, 1), 1.0, T0))
    with pytest.raises(ConfigurationError):
        GaugeChoice("bad", (Poly.monomial((2, 0, 0), 1.0, T0), ZERO, ZERO), ZERO)
    with pytest.raises(ConfigurationError):
        GaugeChoice("bad", (ZERO, ZERO, ZERO), Poly.monomial((0, 3, 0), 1.0, T0))


def test_field_polys_structure(trapezoid):
    E, B = field_polys(builtin_gauge("MAGNETIC_LANDAU", trapezoid, 1.0))
    assert B[0].is_zero and B[1].is_zero and B[2].degree == 0
    assert all(c.degree <= 1 for c in E)


def test_preferential_diagnostics_gaussian():
    env = make_envelope("gaussian", **ENVELOPES["gaussian"])
    eps = 1e-2
    V = builtin_gauge("ELECTRIC_VELOCITY", env, eps)
    L = builtin_gauge("ELECTRIC_LENGTH", env, eps)
    dv, dl = preferential_diagnostics(V), preferential_diagnostics(L)
    assert not dv.A_vanishes_at_infinity and dl.A_vanishes_at_infinity
    area = eps * 2.5 * math.sqrt(2 * math.pi)
    assert dv.electric_time_average[2] == pytest.approx(area, rel=1e-9)
    assert dl.electric_time_average[2] == pytest.approx(area, rel=1e-9)
    assert dv.A_sup_after == pytest.approx(area, rel=1e-9)


_monomials = [(a, b, c) for a in range(3) for b in range(3) for c in range(3) if a + b + c <= 2]


@st.composite
def gauge_functions(draw):
    kind = draw(st.sampled_from(sorted(ENVELOPES)))
    env = make_envelope(kind, **ENVELOPES[kind])
    f = ZERO
    for _ in range(draw(st.integers(1, 4))):
        mono = draw(st.sampled_from(_monomials))
        order = draw(st.sampled_from([-1, 0, 1]))
        w = draw(st.floats(-2.0, 2.0, allow_nan=False).filter(lambda v: abs(v) > 1e-3))
        tfac = () if draw(st.booleans()) and mono != (0, 0, 0) else (TimeBasis(env, order),)
        f = f + Poly.monomial(mono, w, tfac)
    return GaugeFunction(f)


@settings(max_examples=60, deadline=None)
@given(f=gauge_functions(), kind=st.sampled_from(["ELECTRIC_LENGTH", "ELECTRIC_VELOCITY",
                                                  "MAGNETIC_SYMMETRIC", "MAGNETIC_LANDAU"]),
       seed=st.integers(0, 2**16))
def test_gauge_transform_preserves_fields(f, kind, seed, trapezoid):
    g = builtin_gauge(kind, trapezoid, 0.3)
    g2 = gauge_transform(g, f)
    rng = np.random.default_rng(seed)
    q = rng.uniform(-3, 3, (100, 3))
    t = rng.uniform(-20, 120, 100)
    E1, B1 = physical_fields(g, q, t)
    E2, B2 = physical_fields(g2, q, t)
    scale = max(1.0, np.abs(E1).max(), np.abs(E2).max())
    assert np.abs(E1 - E2).max() <= 1e-12 * scale
    assert np.abs(B1 - B2).max() <= 1e-12 * scale
