import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hydrogauge import classical as cl
from hydrogauge.errors import AccuracyError, ConfigurationError, DomainError
from hydrogauge.fields import GaugeFunction, Poly, TimeBasis, builtin_gauge, gauge_transform, make_envelope


def test_init_kepler_examples():
    s = cl.init_kepler(a=1.0, e=0.0, inclination=0.0)
    assert np.allclose(s.q, [1, 0, 0]) and np.allclose(s.p, [0, 1, 0])
    obs = cl.observables(s)
    assert obs.energy == pytest.approx(-0.5) and obs.L_z == pytest.approx(1.0)
    assert cl.kepler_period(1.0) == pytest.approx(2 * math.pi)
    assert cl.principal_action(-0.5) == pytest.approx(1.0)
    assert cl.principal_action(0.1) == math.inf


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.2, 20), e=st.floats(0, 0.95), inc=st.floats(0, math.pi), node=st.floats(0, 2 * math.pi),
       w=st.floats(0, 2 * math.pi), nu=st.floats(0, 2 * math.pi), Z=st.floats(0.5, 3))
def test_init_kepler_elements_round_trip(a, e, inc, node, w, nu, Z):
    s = cl.init_kepler(a, e, inc, node, w, nu, Z)
    a2, e2 = cl.orbit_elements(s, Z)
    assert a2 == pytest.approx(a, rel=1e-10)
    assert e2 == pytest.approx(e, abs=1e-7)
    obs = cl.observables(s, Z)
    assert obs.energy == pytest.approx(-Z / (2 * a), rel=1e-10)
    assert np.linalg.norm(obs.L) == pytest.approx(math.sqrt(Z * a * (1 - e * e)), rel=1e-9, abs=1e-12)
    assert obs.L[2] == pytest.approx(math.sqrt(Z * a * (1 - e * e)) * math.cos(inc), abs=1e-9)


def test_init_kepler_errors():
    with pytest.raises(DomainError):
        cl.init_kepler(e=1.0)
    with pytest.raises(DomainError):
        cl.init_kepler(a=-1.0)
    with pytest.raises(DomainError):
        cl.ClassicalState([0, 0, 0], [1, 0, 0])


def test_free_orbit_conservation_and_period():
    orbit = cl.OrbitSpec()
    T = orbit.period
    tr = cl.integrate(orbit.state(), None, cl.ClassicalGrid(0.0, 100 * T, sample_times=(T,)))
    dE, dL = tr.relative_drift()
    assert dE <= 1e-8 and dL <= 1e-8
    # back at periapsis after one period
    row = tr.row_at(T)
    assert np.allclose(row[1:4], orbit.state().q, atol=1e-8)
    assert tr.work_E == 0.0 and tr.torque_B == 0.0


def test_eccentricity_limit():
    with pytest.raises(AccuracyError):
        cl.integrate(cl.init_kepler(e=0.85), None, cl.ClassicalGrid(0.0, 10.0))


def test_grid_errors(trapezoid):
    with pytest.raises(ConfigurationError):
        cl.ClassicalGrid(1.0, 0.0)
    with pytest.raises(ConfigurationError):
        cl.ClassicalGrid(0.0, 1.0, steps_per_period=10)
    g = builtin_gauge("MAGNETIC_SYMMETRIC", trapezoid, 1e-3)
    with pytest.raises(ConfigurationError):
        cl.integrate(cl.init_kepler(), g, cl.ClassicalGrid(10.0, 200.0))
    with pytest.raises(ConfigurationError):
        cl.PulseSpec(ramp_periods=0.0).gauge_choice(1e-3, 1.0)


def test_zero_field_pulse_matches_free_orbit():
    orbit = cl.OrbitSpec()
    r = cl.pulse_response(orbit, cl.PulseSpec(), 0.0)
    assert abs(r.delta_E) < 1e-11  # RK4 truncation only
    assert r.work_E == 0.0 and r.torque_E == 0.0 and r.torque_B == 0.0


def test_affine_fields_match_gauge(trapezoid):
    from hydrogauge.fields import physical_fields
    g = builtin_gauge("MAGNETIC_LANDAU", trapezoid, 0.3)
    af = cl.AffineFields.from_gauge(g)
    q = np.array([0.4, -1.1, 2.0])
    for t in (5.0, 50.0, 90.0):
        E, B = af.at(q, t)
        E2, B2 = physical_fields(g, q[None], t)
        assert np.allclose(E, E2[0], atol=1e-15) and np.allclose(B, B2[0], atol=1e-15)


def test_plateau_conserves_energy():
    """A static uniform B does no work: E is constant on the plateau."""
    orbit = cl.OrbitSpec()
    T = orbit.period
    pulse = cl.PulseSpec(ramp_periods=1.0, plateau_periods=5.3)
    g = pulse.gauge_choice(1e-2, T)
    t_on, t_off = g.breakpoints[1], g.breakpoints[2]
    grid = cl.ClassicalGrid(-0.5 * T, g.support[1] + T, sample_times=(t_on, t_off))
    tr = cl.integrate(orbit.state(), g, grid)
    E_on, E_off = tr.row_at(t_on)[7], tr.row_at(t_off)[7]
    assert abs(E_off - E_on) <= 1e-10
    assert abs(tr.work_E - tr.delta_E) <= 1e-10


@pytest.mark.parametrize("gauge", ["MAGNETIC_SYMMETRIC", "MAGNETIC_LANDAU"])
def test_torque_budget(gauge):
    r = cl.pulse_response(cl.OrbitSpec(), cl.PulseSpec(ramp_periods=1.0, gauge=gauge), 1e-3)
    assert abs(r.delta_Lz - (r.torque_E + r.torque_B)) <= 1e-10
    assert abs(r.delta_E - r.work_E) <= 1e-10


@pytest.mark.parametrize("gauge", ["MAGNETIC_SYMMETRIC", "MAGNETIC_LANDAU"])
def test_sudden_ramp_torque_is_electric(gauge):
    """Across a sudden turn-on the change of L_z comes from the induced E (to 1%)."""
    orbit = cl.OrbitSpec()
    T = orbit.period
    g = cl.PulseSpec(ramp_periods=0.01, gauge=gauge).gauge_choice(1e-3, T)
    t1, t1p = g.breakpoints[0], g.breakpoints[1]
    tr = cl.integrate(orbit.state(), g, cl.ClassicalGrid(-0.5 * T, g.support[1] + T, sample_times=(t1, t1p)))
    a, b = tr.row_at(t1), tr.row_at(t1p)
    dLz = b[8] - a[8]
    tauE = b[10] - a[10]
    assert abs(dLz) > 0
    assert abs(dLz - tauE) <= 0.01 * abs(dLz)


def test_gauge_transform_gives_identical_trajectory(trapezoid):
    """Equations of motion depend only on (E, B): S and S + grad f integrate identically."""
    S = builtin_gauge("MAGNETIC_SYMMETRIC", trapezoid, 1e-2)
    f = GaugeFunction(Poly.monomial((1, 1, 0), 0.5e-2, (TimeBasis(trapezoid, 0),))
                      + Poly.monomial((0, 0, 2), 3.0, (TimeBasis(trapezoid, -1),)))
    G = gauge_transform(S, f)
    grid = cl.ClassicalGrid(-5.0, 110.0)
    a = cl.integrate(cl.init_kepler(), S, grid)
    b = cl.integrate(cl.init_kepler(), G, grid)
    assert np.abs(a.samples - b.samples).max() <= 1e-12


def test_magnetic_gauges_differ_classically():
    """Final Delta E is second order in both gauges and the peak disturbance first order;
    only the symmetric gauge (axisymmetric induced E) conserves canonical L_z."""
    orbit = cl.OrbitSpec()
    sym = [cl.pulse_response(orbit, cl.PulseSpec(gauge="MAGNETIC_SYMMETRIC"), e) for e in (1e-3, 5e-4)]
    lan = [cl.pulse_response(orbit, cl.PulseSpec(gauge="MAGNETIC_LANDAU"), e) for e in (1e-3, 5e-4)]
    assert abs(sym[0].delta_Lz) <= 1e-9
    for rows in (sym, lan):
        assert rows[0].delta_E / rows[1].delta_E == pytest.approx(4.0, rel=0.02)
        assert rows[0].max_dE / rows[1].max_dE == pytest.approx(2.0, rel=0.01)
    assert abs(lan[0].delta_Lz) > 1e3 * abs(sym[0].delta_Lz)


def test_adiabatic_ramp_sweep():
    orbit = cl.OrbitSpec()
    for gauge in ("MAGNETIC_SYMMETRIC", "MAGNETIC_LANDAU"):
        rows = cl.ramp_sweep(orbit, 1e-3, [0.01, 50.0], cl.PulseSpec(gauge=gauge))
        assert abs(rows[1].delta_E) < 0.05 * abs(rows[0].delta_E), gauge
    with pytest.raises(ConfigurationError):
        cl.ramp_sweep(orbit, 1e-3, [0.0])


def test_linear_disturbance():
    eps = list(np.linspace(1e-4, 1e-3, 5))
    rows, fit = cl.eps_sweep(cl.OrbitSpec(), eps)
    assert fit.relative_residual < 0.05
    assert fit.slope > 0


@settings(max_examples=30, deadline=None)
@given(slope=st.floats(-5, 5), icpt=st.floats(-1, 1))
def test_linear_fit_exact_line(slope, icpt):
    x = np.linspace(0, 1, 7)
    y = slope * x + icpt
    fit = cl.linear_fit(x, y)
    assert fit.slope == pytest.approx(slope, abs=1e-9) and fit.intercept == pytest.approx(icpt, abs=1e-9)
    assert fit.relative_residual <= 1e-9


def test_response_row_columns():
    r = cl.pulse_response(cl.OrbitSpec(), cl.PulseSpec(ramp_periods=0.5, plateau_periods=1.0), 1e-4)
    assert tuple(r.as_dict()) == cl.RESPONSE_COLUMNS
