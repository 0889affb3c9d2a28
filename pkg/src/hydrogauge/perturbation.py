"""First-order transition amplitudes, the integration-by-parts variant, and gauge comparisons.

With hbar = 1 and omega_ls = e_l - e_s, the first-order amplitude is

    C_l = -i * int (H_1)_{ls}(t) exp(i omega_ls t) dt.

For a velocity-type gauge (Phi = 0) whose A vanishes at both ends of the
window, integrating by parts gives the equivalent

    C_l = (1 / omega_ls) * int (H_1[dA/dt])_{ls}(t) exp(i omega_ls t) dt,

where H_1[dA/dt] = -p*dA/dt.  Both integrals use composite Simpson on a grid
split at every envelope breakpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import HydrogenicBasis, QuantumNumbers
from .errors import ConfigurationError, PreconditionError
from .fields import ZERO, GaugeChoice, physical_fields, preferential_diagnostics
from .operators import OperatorExpansion, h1_expansion, primitive_matrices
from .quadrature import segmented_grid, simpson_weights

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class TimeQuadratureSpec:
    """Simpson grid policy.

    The step is min(max_step, 2 pi / (steps_per_period * omega_max), feature_time / 20),
    where omega_max adds |omega_ls| and the envelope's own carrier frequency.
    """

    window: tuple[float, float] | None = None
    max_step: float = 0.5
    steps_per_period: int = 400

    def __post_init__(self):
        if self.steps_per_period < 20:
            raise ConfigurationError("steps_per_period must be >= 20")
        if not self.max_step > 0:
            raise ConfigurationError("max_step must be positive")
        if self.window is not None and not self.window[0] < self.window[1]:
            raise ConfigurationError("window must satisfy t_a < t_b")

    def step(self, omega_max: float, feature_time: float) -> float:
        h = self.max_step
        if omega_max > 0:
            h = min(h, 2 * math.pi / (self.steps_per_period * omega_max))
        if math.isfinite(feature_time):
            h = min(h, feature_time / 20)
        return h

    def refined(self) -> TimeQuadratureSpec:
        return TimeQuadratureSpec(self.window, self.max_step / 2, self.steps_per_period * 2)

    def grid(self, g: GaugeChoice, omega: float) -> tuple[np.ndarray, list[slice]]:
        lo, hi = g.support
        window = self.window or (lo, hi)
        if not window[1] > window[0]:
            raise ConfigurationError("gauge has no pulse support to integrate over")
        if window[0] > lo + 1e-12 or window[1] < hi - 1e-12:
            raise ConfigurationError(f"integration window {window} excludes pulse support {(lo, hi)}")
        edges = sorted({window[0], window[1], *(b for b in g.breakpoints if window[0] < b < window[1])})
        h = self.step(abs(omega) + g.frequency, g.feature_time)
        return segmented_grid(edges, h)


@dataclass(frozen=True)
class TransitionAmplitude:
    initial: QuantumNumbers
    final: QuantumNumbers
    amplitude: complex
    method: str
    gauge: str
    note: str = ""

    @property
    def probability(self) -> float:
        return abs(self.amplitude) ** 2


def _segment_sides(n: int) -> np.ndarray:
    side = np.zeros(n)
    side[0], side[-1] = 1.0, -1.0
    return side


def _time_integral(expansion: OperatorExpansion, basis: HydrogenicBasis, s, l, omega, grid, slices) -> complex:
    """int (sum_k c_k(t) M_k)_{ls} exp(i omega t) dt."""
    if not expansion.terms:
        return 0j
    mats = primitive_matrices(basis)
    il, is_ = basis.index[l], basis.index[s]
    elems = np.array([mats[op][il, is_] for _, op in expansion.terms])
    if not np.any(elems):
        return 0j
    total = 0j
    for sl in slices:
        seg = grid[sl]
        n = len(seg) - 1
        w = simpson_weights(n, (seg[-1] - seg[0]) / n)
        coeffs = expansion.coefficients(seg, _segment_sides(len(seg)))
        total += w @ ((elems @ coeffs) * np.exp(1j * omega * seg))
    return complex(total)


def _omega(basis: HydrogenicBasis, s: QuantumNumbers, l: QuantumNumbers) -> float:
    for q in (s, l):
        if q not in basis.index:
            raise ConfigurationError(f"state {q} is not in the basis (n_max={basis.spec.n_max})")
    return float(basis.energies[basis.index[l]] - basis.energies[basis.index[s]])


def first_order_amplitude(
    g: GaugeChoice,
    s: QuantumNumbers,
    l: QuantumNumbers,
    basis: HydrogenicBasis,
    quad: TimeQuadratureSpec | None = None,
    include_A2: bool = False,
) -> TransitionAmplitude:
    """Direct first-order amplitude s -> l; s == l is returned but flagged."""
    quad = quad or TimeQuadratureSpec()
    omega = _omega(basis, s, l)
    grid, slices = quad.grid(g, omega)
    integral = _time_integral(h1_expansion(g, include_A2), basis, s, l, omega, grid, slices)
    note = "phase-only at first order" if s == l else ""
    return TransitionAmplitude(s, l, -1j * integral, "direct", g.label, note)


def _dA_dt_gauge(g: GaugeChoice) -> GaugeChoice:
    return GaugeChoice(g.label + "/dA_dt", tuple(a.dt() for a in g.A), ZERO, g.envelope)


def by_parts_amplitude(
    g: GaugeChoice,
    s: QuantumNumbers,
    l: QuantumNumbers,
    basis: HydrogenicBasis,
    quad: TimeQuadratureSpec | None = None,
) -> TransitionAmplitude:
    """Amplitude from the integrated-by-parts form; refuses where that form does not hold."""
    quad = quad or TimeQuadratureSpec()
    omega = _omega(basis, s, l)
    if abs(omega) <= DEGENERACY_TOL:
        raise PreconditionError("degenerate transition: integration by parts inapplicable")
    if not g.is_velocity_type:
        raise PreconditionError("integration by parts needs a velocity-type gauge (Phi = 0)")
    diag = preferential_diagnostics(g)
    if not diag.A_vanishes_at_infinity:
        raise PreconditionError("preferential gauge violated: A does not vanish outside the pulse")
    grid, slices = quad.grid(g, omega)
    integral = _time_integral(h1_expansion(_dA_dt_gauge(g)), basis, s, l, omega, grid, slices)
    return TransitionAmplitude(s, l, integral / omega, "by_parts", g.label)


@dataclass(frozen=True)
class FieldComparison:
    max_dE: float
    max_dB: float
    scale: float

    def equivalent(self, check: str = "full", rtol: float = 1e-12) -> bool:
        tol = rtol * max(1.0, self.scale)
        if check == "none":
            return True
        if check == "magnetic":
            return self.max_dB <= tol
        return self.max_dE <= tol and self.max_dB <= tol


def compare_fields(gA: GaugeChoice, gB: GaugeChoice, n_samples: int = 100, box: float = 10.0, seed: int = 0) -> FieldComparison:
    """Sample (E, B) of both gauges at the same random (q, t) points."""
    rng = np.random.default_rng(seed)
    lo = min(gA.support[0], gB.support[0])
    hi = max(gA.support[1], gB.support[1])
    q = rng.uniform(-box, box, size=(n_samples, 3))
    t = rng.uniform(lo, hi, size=n_samples) if hi > lo else np.full(n_samples, lo)
    EA, BA = physical_fields(gA, q, t)
    EB, BB = physical_fields(gB, q, t)
    scale = float(max(np.abs(EA).max(), np.abs(BA).max(), np.abs(EB).max(), np.abs(BB).max()))
    return FieldComparison(float(np.abs(EA - EB).max()), float(np.abs(BA - BB).max()), scale)


@dataclass(frozen=True)
class EquivalenceReport:
    amplitude_A: TransitionAmplitude
    amplitude_B: TransitionAmplitude
    fields: FieldComparison

    @property
    def prob_A(self) -> float:
        return self.amplitude_A.probability

    @property
    def prob_B(self) -> float:
        return self.amplitude_B.probability

    @property
    def abs_diff(self) -> float:
        return abs(self.prob_A - self.prob_B)

    @property
    def rel_diff(self) -> float:
        scale = max(self.prob_A, self.prob_B)
        return self.abs_diff / scale if scale > 0 else 0.0

    def as_dict(self) -> dict:
        return {
            "gauge_A": self.amplitude_A.gauge,
            "gauge_B": self.amplitude_B.gauge,
            "method_A": self.amplitude_A.method,
            "method_B": self.amplitude_B.method,
            "prob_A": self.prob_A,
            "prob_B": self.prob_B,
            "abs_diff": self.abs_diff,
            "rel_diff": self.rel_diff,
            "max_field_dE": self.fields.max_dE,
            "max_field_dB": self.fields.max_dB,
        }


def equivalence_report(
    gA: GaugeChoice,
    gB: GaugeChoice,
    s: QuantumNumbers,
    l: QuantumNumbers,
    basis: HydrogenicBasis,
    quad: TimeQuadratureSpec | None = None,
    check: str = "full",
    method_A: str = "direct",
    method_B: str = "direct",
) -> EquivalenceReport:
    """Probabilities of s -> l in two gauges of the same physical field.

    ``check`` selects what must agree before computing: "full" (E and B),
    "magnetic" (B only; used for the two magnetic gauges, whose E differ
    during the ramps), or "none".
    """
    if check not in ("full", "magnetic", "none"):
        raise ConfigurationError(f"unknown check mode {check!r}")
    fields = compare_fields(gA, gB)
    if not fields.equivalent(check):
        raise ConfigurationError(
            f"gauges {gA.label} and {gB.label} describe different fields "
            f"(max |dE|={fields.max_dE:.3g}, max |dB|={fields.max_dB:.3g})"
        )
    methods = {"direct": first_order_amplitude, "by_parts": by_parts_amplitude}
    ampA = methods[method_A](gA, s, l, basis, quad)
    ampB = methods[method_B](gB, s, l, basis, quad)
    return EquivalenceReport(ampA, ampB, fields)


AMPLITUDE_COLUMNS = ("gauge", "method", "n_i", "l_i", "m_i", "n_f", "l_f", "m_f", "re_amp", "im_amp", "probability")


def amplitude_row(a: TransitionAmplitude) -> dict:
    return {
        "gauge": a.gauge,
        "method": a.method,
        "n_i": a.initial.n, "l_i": a.initial.l, "m_i": a.initial.m,
        "n_f": a.final.n, "l_f": a.final.l, "m_f": a.final.m,
        "re_amp": a.amplitude.real,
        "im_amp": a.amplitude.imag,
        "probability": a.probability,
    }
