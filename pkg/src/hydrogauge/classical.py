"""Classical Kepler electron under the same pulses, driven by the Lorentz force.

Only the physical fields enter: E(q, t) = e0(t) + M(t) q (affine, since Phi and
A are polynomials of degree <= 2 and <= 1) and a uniform B(t).  Any gauge with
the same (E, B) gives the same trajectory bit for bit.

The integrated state is (q, p, W_E, tau_E, tau_B): besides the orbit, RK4 also
advances the work done by E and the z-torques of the electric and magnetic
forces, so the two force contributions are reported separately and the L_z
budget can be checked against the torque integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import AccuracyError, ConfigurationError, DomainError
from .fields import GaugeChoice, builtin_gauge, field_polys, make_envelope

E_MAX = 0.8
STEPS_PER_PERIOD = 2000
CLOSE_APPROACH = 0.5  # abort below this fraction of the initial periapsis distance
_CHUNK = 8192
_AFFINE = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))


@dataclass(frozen=True)
class ClassicalState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float).reshape(3))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(3))
        if not np.linalg.norm(self.q) > 0:
            raise DomainError("classical state needs r = |q| > 0")


@dataclass(frozen=True)
class ClassicalObservables:
    energy: float
    L: np.ndarray

    @property
    def L_z(self) -> float:
        return float(self.L[2])


def observables(state: ClassicalState, Z: float = 1.0) -> ClassicalObservables:
    q, p = state.q, state.p
    return ClassicalObservables(0.5 * p @ p - Z / np.linalg.norm(q), np.cross(q, p))


def kepler_period(a: float, Z: float = 1.0) -> float:
    return 2 * math.pi * math.sqrt(a**3 / Z)


def principal_action(energy: float, Z: float = 1.0) -> float:
    """Classical n = Z / sqrt(-2E), i.e. the radial+angular action in units of hbar."""
    if energy >= 0:
        return math.inf
    return Z / math.sqrt(-2.0 * energy)


def _rotation(inclination, node, periapsis):
    def rz(a):
        c, s = math.cos(a), math.sin(a)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    c, s = math.cos(inclination), math.sin(inclination)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    return rz(node) @ rx @ rz(periapsis)


def init_kepler(
    a: float = 1.0,
    e: float = 0.3,
    inclination: float = math.radians(30.0),
    node: float = 0.0,
    periapsis: float = 0.0,
    true_anomaly: float = 0.0,
    Z: float = 1.0,
) -> ClassicalState:
    """State on the Kepler ellipse (a, e) at the given true anomaly; angles in radians."""
    if not a > 0:
        raise DomainError("semi-major axis must be positive")
    if not 0 <= e < 1:
        raise DomainError(f"eccentricity {e} does not give a bound orbit")
    slr = a * (1 - e * e)
    r = slr / (1 + e * math.cos(true_anomaly))
    h = math.sqrt(Z * slr)
    c, s = math.cos(true_anomaly), math.sin(true_anomaly)
    q = np.array([r * c, r * s, 0.0])
    p = (Z / h) * np.array([-s, e + c, 0.0])
    R = _rotation(inclination, node, periapsis)
    return ClassicalState(R @ q, R @ p)


def orbit_elements(state: ClassicalState, Z: float = 1.0) -> tuple[float, float]:
    """(a, e) of the osculating ellipse."""
    obs = observables(state, Z)
    if obs.energy >= 0:
        raise DomainError("state is unbound")
    a = -Z / (2 * obs.energy)
    L2 = float(obs.L @ obs.L)
    return a, math.sqrt(max(0.0, 1 - L2 / (Z * a)))


@dataclass(frozen=True)
class AffineFields:
    """E(q, t) = e0(t) + M(t) q and uniform B(t), as time-coefficient tables."""

    g: GaugeChoice | None
    E_coeffs: tuple = field(repr=False, default=())
    B_coeffs: tuple = field(repr=False, default=())

    @classmethod
    def from_gauge(cls, g: GaugeChoice | None) -> AffineFields:
        if g is None:
            return cls(None)
        E, B = field_polys(g)
        e_tab = []
        for comp in E:
            tc = comp.time_coefficients()
            if any(k not in _AFFINE for k in tc):
                raise ConfigurationError(f"{g.label}: electric field is not affine in q")
            e_tab.append(tuple(tc.get(k) for k in _AFFINE))
        b_tab = []
        for comp in B:
            tc = comp.time_coefficients()
            if any(k != (0, 0, 0) for k in tc):
                raise ConfigurationError(f"{g.label}: magnetic field is not uniform")
            b_tab.append(tc.get((0, 0, 0)))
        return cls(g, tuple(e_tab), tuple(b_tab))

    def tables(self, t, side) -> np.ndarray:
        """Array (len(t), 15): e0 (3), M row-major (9), B (3)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros((t.size, 15))
        if self.g is None:
            return out
        for i, row in enumerate(self.E_coeffs):
            for k, c in enumerate(row):
                if c is None:
                    continue
                col = i if k == 0 else 3 + 3 * i + (k - 1)
                out[:, col] = c(t, side)
        for i, c in enumerate(self.B_coeffs):
            if c is not None:
                out[:, 12 + i] = c(t, side)
        return out

    def at(self, q, t, side=1) -> tuple[np.ndarray, np.ndarray]:
        tab = self.tables(np.atleast_1d(t), side)[0]
        return tab[:3] + tab[3:12].reshape(3, 3) @ np.asarray(q, float), tab[12:].copy()


@numba.njit(cache=True)
def _deriv(y, f, Z, out):
    x, yq, z = y[0], y[1], y[2]
    px, py, pz = y[3], y[4], y[5]
    r2 = x * x + yq * yq + z * z
    inv_r3 = 1.0 / (r2 * math.sqrt(r2))
    ex = f[0] + f[3] * x + f[4] * yq + f[5] * z
    ey = f[1] + f[6] * x + f[7] * yq + f[8] * z
    ez = f[2] + f[9] * x + f[10] * yq + f[11] * z
    bx, by, bz = f[12], f[13], f[14]
    mx = py * bz - pz * by
    my = pz * bx - px * bz
    mz = px * by - py * bx
    out[0] = px
    out[1] = py
    out[2] = pz
    out[3] = -Z * x * inv_r3 + ex + mx
    out[4] = -Z * yq * inv_r3 + ey + my
    out[5] = -Z * z * inv_r3 + ez + mz
    out[6] = px * ex + py * ey + pz * ez
    out[7] = x * ey - yq * ex
    out[8] = x * my - yq * mx


@numba.njit(cache=True)
def _rk4_chunk(y, t0, h, f_start, f_mid, f_end, Z, r_min, e0, lz0, store_every, step0, out_rows, track):
    """Advance y through len(f_start) steps; returns (n_stored, ok)."""
    n = f_start.shape[0]
    k1 = np.empty(9)
    k2 = np.empty(9)
    k3 = np.empty(9)
    k4 = np.empty(9)
    tmp = np.empty(9)
    stored = 0
    for k in range(n):
        _deriv(y, f_start[k], Z, k1)
        for i in range(9):
            tmp[i] = y[i] + 0.5 * h * k1[i]
        _deriv(tmp, f_mid[k], Z, k2)
        for i in range(9):
            tmp[i] = y[i] + 0.5 * h * k2[i]
        _deriv(tmp, f_mid[k], Z, k3)
        for i in range(9):
            tmp[i] = y[i] + h * k3[i]
        _deriv(tmp, f_end[k], Z, k4)
        for i in range(9):
            y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        r = math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
        if r < r_min:
            return stored, False
        en = 0.5 * (y[3] * y[3] + y[4] * y[4] + y[5] * y[5]) - Z / r
        lz = y[0] * y[4] - y[1] * y[3]
        track[0] = max(track[0], abs(en - e0))
        track[1] = max(track[1], abs(lz - lz0))
        if store_every > 0 and (step0 + k + 1) % store_every == 0:
            out_rows[stored, 0] = t0 + (k + 1) * h
            for i in range(9):
                out_rows[stored, 1 + i] = y[i]
            stored += 1
    return stored, True


@dataclass(frozen=True)
class ClassicalGrid:
    """Integration window and step policy: step = period / steps_per_period * (1 - e)^{3/2}."""

    t_start: float
    t_end: float
    steps_per_period: int = STEPS_PER_PERIOD
    max_step: float | None = None
    n_store: int = 2000
    sample_times: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ConfigurationError("classical grid needs t_end > t_start")
        if self.steps_per_period < 100:
            raise ConfigurationError("steps_per_period must be >= 100")

    def step(self, a: float, e: float, Z: float) -> float:
        h = kepler_period(a, Z) / self.steps_per_period * (1 - e) ** 1.5
        return min(h, self.max_step) if self.max_step else h


TRAJECTORY_COLUMNS = ("t", "x", "y", "z", "p_x", "p_y", "p_z", "E", "L_z", "W_E", "tau_E", "tau_B")


@dataclass
class ClassicalTrajectory:
    """Sampled orbit.  Columns of ``samples`` follow TRAJECTORY_COLUMNS."""

    samples: np.ndarray
    Z: float
    step: float
    gauge: str
    max_dE: float
    max_dLz: float
    sample_index: dict[float, int] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def energy(self) -> np.ndarray:
        return self.samples[:, 7]

    @property
    def L_z(self) -> np.ndarray:
        return self.samples[:, 8]

    @property
    def initial(self) -> ClassicalState:
        return ClassicalState(self.samples[0, 1:4], self.samples[0, 4:7])

    @property
    def final(self) -> ClassicalState:
        return ClassicalState(self.samples[-1, 1:4], self.samples[-1, 4:7])

    def row_at(self, t: float) -> np.ndarray:
        """Sample row at a requested sample time."""
        return self.samples[self.sample_index[t]]

    def L(self, row: int = -1) -> np.ndarray:
        return np.cross(self.samples[row, 1:4], self.samples[row, 4:7])

    @property
    def delta_E(self) -> float:
        return float(self.energy[-1] - self.energy[0])

    @property
    def delta_Lz(self) -> float:
        return float(self.L_z[-1] - self.L_z[0])

    @property
    def work_E(self) -> float:
        return float(self.samples[-1, 9])

    @property
    def torque_E(self) -> float:
        return float(self.samples[-1, 10])

    @property
    def torque_B(self) -> float:
        return float(self.samples[-1, 11])

    def relative_drift(self) -> tuple[float, float]:
        """max_t |E - E0| / |E0| and max_t |L - L0| / |L0| over stored samples."""
        e0 = self.energy[0]
        L = np.cross(self.samples[:, 1:4], self.samples[:, 4:7])
        dL = np.linalg.norm(L - L[0], axis=1).max() / np.linalg.norm(L[0])
        return float(np.abs(self.energy - e0).max() / abs(e0)), float(dL)


def integrate(
    state: ClassicalState,
    g: GaugeChoice | None,
    grid: ClassicalGrid,
    Z: float = 1.0,
) -> ClassicalTrajectory:
    """dq/dt = p, dp/dt = -Z q / r^3 + E + p x B with fixed-step RK4.

    Steps are uniform between envelope breakpoints, so no step straddles a kink.
    ``g = None`` integrates the free Kepler problem.
    """
    a, e = orbit_elements(state, Z)
    if e > E_MAX:
        raise AccuracyError(f"eccentricity {e:.3f} exceeds {E_MAX} supported by the step policy")
    if g is not None:
        lo, hi = g.support
        if hi > lo and (grid.t_start > lo or grid.t_end < hi):
            raise ConfigurationError(f"classical grid does not cover pulse support {(lo, hi)}")
    fields = AffineFields.from_gauge(g)
    h_target = grid.step(a, e, Z)
    bps = g.breakpoints if g is not None else ()
    inner = (*bps, *grid.sample_times)
    edges = sorted({grid.t_start, grid.t_end, *(b for b in inner if grid.t_start < b < grid.t_end)})
    samples_wanted = set(grid.sample_times)
    sample_index = {}
    plan = [(a_, b_, max(1, math.ceil((b_ - a_) / h_target - 1e-9))) for a_, b_ in zip(edges[:-1], edges[1:])]
    total = sum(n for _, _, n in plan)
    store_every = max(1, total // grid.n_store)
    r_min = CLOSE_APPROACH * a * (1 - e)

    obs0 = observables(state, Z)
    y = np.concatenate([state.q, state.p, np.zeros(3)])
    rows = [np.concatenate([[grid.t_start], y])]
    track = np.zeros(2)
    step0 = 0
    buf = np.empty((_CHUNK // store_every + 2, 10))
    for seg_a, seg_b, n in plan:
        h = (seg_b - seg_a) / n
        for c0 in range(0, n, _CHUNK):
            c1 = min(n, c0 + _CHUNK)
            ks = np.arange(c0, c1)
            ta = seg_a + h * ks
            tb = np.where(ks == n - 1, seg_b, seg_a + h * (ks + 1))
            m = len(ks)
            f = fields.tables(np.concatenate([ta, ta + 0.5 * h, tb]),
                              np.concatenate([np.ones(m), np.zeros(m), -np.ones(m)]))
            stored, ok = _rk4_chunk(y, seg_a + h * c0, h, f[:m], f[m:2 * m], f[2 * m:], Z, r_min,
                                    obs0.energy, obs0.L_z, store_every, step0, buf, track)
            if not ok:
                raise AccuracyError(
                    f"close approach r < {r_min:.3g} near t = {seg_a + h * c0:.4g}; "
                    "orbit too eccentric for the step policy"
                )
            rows.extend(buf[:stored].copy())
            step0 += m
        if seg_b in samples_wanted:
            if rows[-1][0] != seg_b:
                rows.append(np.concatenate([[seg_b], y]))
            sample_index[seg_b] = len(rows) - 1
    if rows[-1][0] != grid.t_end:
        rows.append(np.concatenate([[grid.t_end], y]))
    if grid.t_start in samples_wanted:
        sample_index[grid.t_start] = 0
    raw = np.array(rows)
    q, p = raw[:, 1:4], raw[:, 4:7]
    energy = 0.5 * np.einsum("ij,ij->i", p, p) - Z / np.linalg.norm(q, axis=1)
    lz = q[:, 0] * p[:, 1] - q[:, 1] * p[:, 0]
    samples = np.column_stack([raw[:, :7], energy, lz, raw[:, 7:]])
    label = g.label if g is not None else "field-free"
    return ClassicalTrajectory(samples, Z, h_target, label, float(track[0]), float(track[1]), sample_index)


@dataclass(frozen=True)
class OrbitSpec:
    a: float = 1.0
    e: float = 0.3
    inclination_deg: float = 30.0
    node_deg: float = 0.0
    periapsis_deg: float = 0.0
    true_anomaly_deg: float = 0.0
    Z: float = 1.0

    def state(self) -> ClassicalState:
        r = math.radians
        return init_kepler(self.a, self.e, r(self.inclination_deg), r(self.node_deg),
                           r(self.periapsis_deg), r(self.true_anomaly_deg), self.Z)

    @property
    def period(self) -> float:
        return kepler_period(self.a, self.Z)


@dataclass(frozen=True)
class PulseSpec:
    """Trapezoid magnetic pulse in units of the orbital period.

    The ramp time Delta = t1+ - t1 = t2 - t2-; ``lead`` and ``tail`` are field-free
    margins before t1 and after t2.
    """

    ramp_periods: float = 1.0
    plateau_periods: float = 5.3
    lead_periods: float = 0.5
    tail_periods: float = 2.0
    gauge: str = "MAGNETIC_SYMMETRIC"

    def gauge_choice(self, eps: float, period: float) -> GaugeChoice:
        if not self.ramp_periods > 0:
            raise ConfigurationError("ramp time must be positive")
        d = self.ramp_periods * period
        env = make_envelope("trapezoid", t1=0.0, t1_plus=d, t2_minus=d + self.plateau_periods * period,
                            t2=2 * d + self.plateau_periods * period)
        return builtin_gauge(self.gauge, env, eps)

    def grid(self, g: GaugeChoice, period: float, steps_per_period: int = STEPS_PER_PERIOD) -> ClassicalGrid:
        lo, hi = g.support
        return ClassicalGrid(lo - self.lead_periods * period, hi + self.tail_periods * period, steps_per_period)


@dataclass(frozen=True)
class PulseResponse:
    eps: float
    ramp_periods: float
    gauge: str
    delta_E: float
    delta_Lz: float
    max_dE: float
    max_dLz: float
    work_E: float
    torque_E: float
    torque_B: float
    delta_n: float
    initial_E: float
    initial_Lz: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


RESPONSE_COLUMNS = tuple(PulseResponse.__dataclass_fields__)


def pulse_response(orbit: OrbitSpec, pulse: PulseSpec, eps: float,
                   steps_per_period: int = STEPS_PER_PERIOD) -> PulseResponse:
    """One pulse on one orbit: final and maximal changes of E and L_z, plus force budgets."""
    state = orbit.state()
    g = pulse.gauge_choice(eps, orbit.period)
    tr = integrate(state, g, pulse.grid(g, orbit.period, steps_per_period), orbit.Z)
    dn = principal_action(tr.energy[-1], orbit.Z) - principal_action(tr.energy[0], orbit.Z)
    return PulseResponse(eps, pulse.ramp_periods, g.label, tr.delta_E, tr.delta_Lz, tr.max_dE, tr.max_dLz,
                         tr.work_E, tr.torque_E, tr.torque_B, dn, float(tr.energy[0]), float(tr.L_z[0]))


def ramp_sweep(orbit: OrbitSpec, eps: float, ramps: list[float], pulse: PulseSpec | None = None,
               steps_per_period: int = STEPS_PER_PERIOD) -> list[PulseResponse]:
    """Final (Delta E, Delta L_z) for each ramp time, in orbital periods."""
    pulse = pulse or PulseSpec()
    if any(not d > 0 for d in ramps):
        raise ConfigurationError("ramp times must be positive")
    return [pulse_response(orbit, PulseSpec(d, pulse.plateau_periods, pulse.lead_periods, pulse.tail_periods,
                                            pulse.gauge), eps, steps_per_period) for d in ramps]


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    relative_residual: float


def linear_fit(x, y) -> LinearFit:
    """Least-squares y = slope * x + intercept; residual is ||y - fit|| / ||y||."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    norm = np.linalg.norm(y)
    res = float(np.linalg.norm(y - (slope * x + intercept)) / norm) if norm > 0 else 0.0
    return LinearFit(float(slope), float(intercept), res)


def eps_sweep(orbit: OrbitSpec, eps_values: list[float], pulse: PulseSpec | None = None,
              quantity: str = "max_dE", steps_per_period: int = STEPS_PER_PERIOD) -> tuple[list[PulseResponse], LinearFit]:
    """Disturbance vs eps at fixed ramp, with a linear fit of ``quantity``."""
    pulse = pulse or PulseSpec()
    rows = [pulse_response(orbit, pulse, e, steps_per_period) for e in eps_values]
    return rows, linear_fit(eps_values, [getattr(r, quantity) for r in rows])
