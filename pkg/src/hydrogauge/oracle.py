"""Exact coupled-coefficient propagation on the truncated basis.

Solves  i dC_l/dt = sum_s C_s (H_1)_{ls}(t) exp(i omega_ls t)  with classic
fixed-step RK4.  Steps are uniform inside each segment between envelope
breakpoints (and requested sample times), so no step straddles a kink.  Every
run is repeated at half the step and the final populations compared.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import HydrogenicBasis, QuantumNumbers
from .errors import AccuracyError, ConfigurationError
from .fields import GaugeChoice, preferential_diagnostics
from .operators import h1_expansion
from .perturbation import compare_fields

NORM_TOL = 1e-8
HALVING_TOL = 1e-9


@dataclass(frozen=True)
class PropagationGrid:
    """Time span and step policy for the oracle.

    ``max_step`` of None picks 2 pi / (steps_per_period * omega_max) capped by
    feature_time / 20, with omega_max the largest Bohr frequency in the basis
    plus the envelope carrier plus a bound on ||H_1(t)||.
    """

    t_start: float
    t_end: float
    max_step: float | None = None
    steps_per_period: int = 80
    sample_times: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ConfigurationError("propagation grid needs t_end > t_start")
        if self.steps_per_period < 20:
            raise ConfigurationError("steps_per_period must be >= 20")

    def step(self, g: GaugeChoice, basis: HydrogenicBasis, coupling: float = 0.0) -> float:
        """Step size; ``coupling`` bounds ||H_1(t)|| and joins the fastest frequency."""
        if self.max_step is not None:
            return self.max_step
        e = basis.energies
        omega_max = float(e.max() - e.min()) + g.frequency + coupling
        h = 2 * math.pi / (self.steps_per_period * omega_max) if omega_max > 0 else self.t_end - self.t_start
        if math.isfinite(g.feature_time):
            h = min(h, g.feature_time / 20)
        return h

    def edges(self, g: GaugeChoice) -> list[float]:
        inner = [b for b in (*g.breakpoints, *self.sample_times) if self.t_start < b < self.t_end]
        return sorted({self.t_start, self.t_end, *inner})

    @classmethod
    def around(cls, g: GaugeChoice, margin: float = 5.0, **kw) -> PropagationGrid:
        lo, hi = g.support
        return cls(lo - margin, hi + margin, **kw)


@dataclass
class CoefficientTrajectory:
    times: np.ndarray
    coefficients: np.ndarray
    labels: tuple[QuantumNumbers, ...]
    gauge: str
    include_A2: bool
    step: float
    norm_drift: float
    halving_delta: float | None = None
    sample_index: dict[float, int] = field(default_factory=dict)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    @property
    def final_populations(self) -> np.ndarray:
        return self.populations[-1]

    def population(self, q: QuantumNumbers, row: int = -1) -> float:
        return float(self.populations[row, self.labels.index(q)])

    def at(self, t: float) -> np.ndarray:
        """Coefficients at a requested sample time."""
        return self.coefficients[self.sample_index[t]]

    def summary(self) -> dict:
        return {
            "gauge": self.gauge,
            "include_A2": self.include_A2,
            "step": self.step,
            "norm_drift": self.norm_drift,
            "halving_delta": self.halving_delta,
            "final_populations": {str(q): float(p) for q, p in zip(self.labels, self.final_populations)},
        }


def _rk4(stacked, coeffs_fn, energies, c0, edges, h_target, store_every, sample_times):
    K, N, _ = stacked.shape
    flat = stacked.reshape(K * N, N)

    def rhs(t, c, coeffs):
        if K == 0:
            return np.zeros_like(c)
        ph = np.exp(1j * energies * t)
        v = c / ph
        hv = coeffs @ (flat @ v).reshape(K, N)
        return -1j * ph * hv

    c = c0.astype(complex)
    times, rows = [edges[0]], [c.copy()]
    sample_index = {}
    step_count = 0
    drift = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(1, int(math.ceil((b - a) / h_target - 1e-9)))
        h = (b - a) / n
        t0 = a + h * np.arange(n)
        t1 = np.append(t0[1:], b)  # exact b: a rounded a + n h can fall past a kink
        # Stage times: start (right limit), midpoint, end (left limit).
        ts = np.concatenate([t0, t0 + 0.5 * h, t1])
        sides = np.concatenate([np.ones(n), np.zeros(n), -np.ones(n)])
        cs = coeffs_fn(ts, sides)
        c_start, c_mid, c_end = cs[:, :n], cs[:, n:2 * n], cs[:, 2 * n:]
        for k in range(n):
            t = t0[k]
            k1 = rhs(t, c, c_start[:, k])
            k2 = rhs(t + 0.5 * h, c + 0.5 * h * k1, c_mid[:, k])
            k3 = rhs(t + 0.5 * h, c + 0.5 * h * k2, c_mid[:, k])
            k4 = rhs(t + h, c + h * k3, c_end[:, k])
            c = c + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            step_count += 1
            drift = max(drift, abs(float(np.vdot(c, c).real) - 1.0))
            last = k == n - 1
            if store_every and (step_count % store_every == 0 or (last and b == edges[-1])):
                times.append(t + h if not last else b)
                rows.append(c.copy())
        if b in sample_times:
            if not store_every or times[-1] != b:
                times.append(b)
                rows.append(c.copy())
            sample_index[b] = len(rows) - 1
    if times[-1] != edges[-1]:
        times.append(edges[-1])
        rows.append(c.copy())
    return np.array(times), np.array(rows), drift, sample_index


def _coupling_bound(expansion, stacked, edges) -> float:
    """Upper bound on ||H_1(t)||_2 from sampled coefficients and primitive spectral norms."""
    if not expansion.terms:
        return 0.0
    ts = np.concatenate([np.linspace(a, b, 65) for a, b in zip(edges[:-1], edges[1:])])
    sides = np.tile(np.r_[1.0, np.zeros(63), -1.0], len(edges) - 1)
    cmax = np.abs(expansion.coefficients(ts, sides)).max(axis=1)
    norms = np.array([np.linalg.norm(m, 2) for m in stacked])
    return float(cmax @ norms)


def propagate(
    g: GaugeChoice,
    basis: HydrogenicBasis,
    initial: QuantumNumbers,
    grid: PropagationGrid | None = None,
    include_A2: bool = True,
    verify: bool = True,
    store_every: int | None = None,
) -> CoefficientTrajectory:
    """Integrate the coefficient equations from C = e_initial at grid.t_start."""
    if initial not in basis.index:
        raise ConfigurationError(f"initial state {initial} is not in the basis")
    grid = grid or PropagationGrid.around(g)
    lo, hi = g.support
    if hi > lo and (grid.t_start > lo or grid.t_end < hi):
        raise ConfigurationError(f"grid [{grid.t_start}, {grid.t_end}] does not cover pulse support {(lo, hi)}")
    expansion = h1_expansion(g, include_A2)
    stacked = expansion.stacked(basis)
    c0 = np.zeros(len(basis), dtype=complex)
    c0[basis.index[initial]] = 1.0
    edges = grid.edges(g)
    h = grid.step(g, basis, _coupling_bound(expansion, stacked, edges))
    n_steps = sum(max(1, math.ceil((b - a) / h - 1e-9)) for a, b in zip(edges[:-1], edges[1:]))
    if store_every is None:
        store_every = max(1, n_steps // 2000)
    samples = set(grid.sample_times)
    times, rows, drift, sample_index = _rk4(
        stacked, expansion.coefficients, basis.energies, c0, edges, h, store_every, samples
    )
    traj = CoefficientTrajectory(
        times, rows, basis.labels, g.label, include_A2, h, drift, sample_index=sample_index
    )
    if verify:
        _, fine_rows, _, _ = _rk4(stacked, expansion.coefficients, basis.energies, c0, edges, h / 2, 0, set())
        delta = float(np.max(np.abs(np.abs(fine_rows[-1]) ** 2 - traj.final_populations)))
        traj.halving_delta = delta
        if delta > HALVING_TOL:
            raise AccuracyError(
                f"step halving changed final populations by {delta:.3e} > {HALVING_TOL:g} (step {h:.4g}); "
                "decrease max_step or raise steps_per_period"
            )
    return traj


@dataclass
class DiscrepancyProbe:
    rows: list[dict]
    max_post: dict[bool, float]
    max_mid: dict[bool, float]
    post_pulse_gauge_free: bool
    trajectories: dict = field(repr=False, default_factory=dict)


def gauge_discrepancy_probe(
    gA: GaugeChoice,
    gB: GaugeChoice,
    basis: HydrogenicBasis,
    initial: QuantumNumbers,
    grid: PropagationGrid | None = None,
    mid_time: float | None = None,
) -> DiscrepancyProbe:
    """Propagate under both gauges, with and without A^2, and compare populations.

    Post-pulse populations are comparable only when A vanishes there in both
    gauges; ``post_pulse_gauge_free`` records whether that holds.  Mid-pulse
    rows are gauge-dependent by nature and reported as such.
    """
    fields = compare_fields(gA, gB)
    if not fields.equivalent("full"):
        raise ConfigurationError(f"{gA.label} and {gB.label} are not physically equivalent")
    lo = min(gA.support[0], gB.support[0])
    hi = max(gA.support[1], gB.support[1])
    if mid_time is None:
        mid_time = 0.5 * (lo + hi)
    base = grid or PropagationGrid(lo - 5.0, hi + 5.0)
    grid = PropagationGrid(base.t_start, base.t_end, base.max_step, base.steps_per_period,
                           tuple(sorted({*base.sample_times, mid_time})))
    gauge_free = all(preferential_diagnostics(g).A_vanishes_at_infinity for g in (gA, gB))
    rows, max_post, max_mid, trajs = [], {}, {}, {}
    for a2 in (True, False):
        ta = propagate(gA, basis, initial, grid, include_A2=a2)
        tb = propagate(gB, basis, initial, grid, include_A2=a2)
        trajs[a2] = (ta, tb)
        post_a, post_b = ta.final_populations, tb.final_populations
        mid_a, mid_b = np.abs(ta.at(mid_time)) ** 2, np.abs(tb.at(mid_time)) ** 2
        max_post[a2] = float(np.max(np.abs(post_a - post_b)))
        max_mid[a2] = float(np.max(np.abs(mid_a - mid_b)))
        for when, pa, pb in (("post-pulse", post_a, post_b), ("mid-pulse", mid_a, mid_b)):
            label = when if when == "post-pulse" and gauge_free else f"{when} (gauge-dependent)"
            for q, x, y in zip(basis.labels, pa, pb):
                rows.append({"include_A2": a2, "when": label, "n": q.n, "l": q.l, "m": q.m,
                             "pop_A": float(x), "pop_B": float(y), "diff": float(x - y)})
    return DiscrepancyProbe(rows, max_post, max_mid, gauge_free, trajs)
