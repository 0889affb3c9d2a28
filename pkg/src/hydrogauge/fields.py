"""Perturbing fields as explicit gauge pairs (A(q, t), Phi(q, t)).

Potentials are kept symbolic: each component is a polynomial of degree <= 2 in
(x, y, z) whose coefficients are products of envelope derivatives
T^(k)(t) (k = -1 is the antiderivative from -infinity).  That makes gradients,
curls, time derivatives and gauge transformations exact, and lets the
operator module read H_1 off term by term.

Piecewise envelopes are evaluated with a ``side`` flag: at a breakpoint,
side=+1 returns the right-hand limit and side=-1 the left-hand limit.
Integrators pass +1 at the start of a segment and -1 at its end.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.hermite_e import hermeval
from scipy.special import erf

from .errors import ConfigurationError
from .quadrature import segmented_grid, simpson_weights

ENVELOPE_PARAMS = {
    "trapezoid": ("t1", "t1_plus", "t2_minus", "t2"),
    "smooth-trapezoid": ("t1", "t1_plus", "t2_minus", "t2"),
    "gaussian": ("t0", "sigma"),
    "zero-average-sine": ("t0", "duration", "omega"),
}

# A Gaussian is treated as supported on t0 +/- GAUSSIAN_CUTOFF * sigma (tail < 3e-18).
GAUSSIAN_CUTOFF = 9.0


def _pieces(bp, t, side):
    t = np.asarray(t, dtype=float)
    right = np.searchsorted(bp, t, side="right")
    left = np.searchsorted(bp, t, side="left")
    return np.where(np.asarray(side) > 0, right, left)


def _smoothstep_deriv(sigma, k):
    """k-th derivative of 3 s^2 - 2 s^3 (k = -1: antiderivative from 0)."""
    if k == -1:
        return sigma**3 - 0.5 * sigma**4
    return Polynomial([0.0, 0.0, 3.0, -2.0]).deriv(k)(sigma)


@dataclass(frozen=True, order=True)
class Envelope:
    """Dimensionless pulse shape T(t); the field strength lives on the gauge."""

    kind: str
    params: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if self.kind not in ENVELOPE_PARAMS:
            raise ConfigurationError(f"unknown envelope kind {self.kind!r}")
        names = tuple(k for k, _ in self.params)
        if names != ENVELOPE_PARAMS[self.kind]:
            raise ConfigurationError(f"{self.kind} needs parameters {ENVELOPE_PARAMS[self.kind]}, got {names}")
        p = self.p
        if any(not math.isfinite(v) for v in p.values()):
            raise ConfigurationError("envelope parameters must be finite")
        if self.kind in ("trapezoid", "smooth-trapezoid"):
            if not (p["t1"] < p["t1_plus"] <= p["t2_minus"] < p["t2"]):
                raise ConfigurationError("trapezoid needs t1 < t1_plus <= t2_minus < t2")
        elif self.kind == "gaussian":
            if p["sigma"] <= 0:
                raise ConfigurationError("gaussian needs sigma > 0")
        elif p["duration"] <= 0 or p["omega"] <= 0:
            raise ConfigurationError("zero-average-sine needs duration > 0 and omega > 0")

    @cached_property
    def p(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        p = self.p
        if self.kind in ("trapezoid", "smooth-trapezoid"):
            return tuple(sorted({p["t1"], p["t1_plus"], p["t2_minus"], p["t2"]}))
        if self.kind == "gaussian":
            return (p["t0"] - GAUSSIAN_CUTOFF * p["sigma"], p["t0"] + GAUSSIAN_CUTOFF * p["sigma"])
        return (p["t0"], p["t0"] + p["duration"])

    @property
    def support(self) -> tuple[float, float]:
        bp = self.breakpoints
        return bp[0], bp[-1]

    @property
    def frequency(self) -> float:
        """Highest angular frequency carried by the shape itself."""
        if self.kind == "zero-average-sine":
            return self.p["omega"] + 2 * math.pi / self.p["duration"]
        return 0.0

    @property
    def feature_time(self) -> float:
        """Shortest time scale of the shape (ramp, width, or window)."""
        p = self.p
        if self.kind in ("trapezoid", "smooth-trapezoid"):
            return min(p["t1_plus"] - p["t1"], p["t2"] - p["t2_minus"])
        if self.kind == "gaussian":
            return p["sigma"]
        return p["duration"]

    @property
    def total_integral(self) -> float:
        return float(self(self.support[1], order=-1))

    def derivative(self, t, side=1):
        return self(t, order=1, side=side)

    def __call__(self, t, order: int = 0, side=1):
        if order < -1:
            raise ConfigurationError("envelope orders below -1 are not available")
        t = np.asarray(t, dtype=float)
        return getattr(self, "_eval_" + self.kind.replace("-", "_"))(t, order, side)

    def _eval_trapezoid(self, t, order, side):
        p = self.p
        t1, t1p, t2m, t2 = p["t1"], p["t1_plus"], p["t2_minus"], p["t2"]
        d1, d2, plateau = t1p - t1, t2 - t2m, t2m - t1p
        total = 0.5 * d1 + plateau + 0.5 * d2
        piece = _pieces(np.array([t1, t1p, t2m, t2]), t, side)
        s, u, v = t - t1, t - t1p, t2 - t
        if order == -1:
            vals = [0.0 * t, s * s / (2 * d1), 0.5 * d1 + u, total - v * v / (2 * d2), total + 0.0 * t]
        elif order == 0:
            vals = [0.0 * t, s / d1, 1.0 + 0.0 * t, v / d2, 0.0 * t]
        elif order == 1:
            vals = [0.0 * t, 1.0 / d1 + 0.0 * t, 0.0 * t, -1.0 / d2 + 0.0 * t, 0.0 * t]
        else:
            vals = [0.0 * t] * 5
        return np.choose(piece, vals)

    def _eval_smooth_trapezoid(self, t, order, side):
        p = self.p
        t1, t1p, t2m, t2 = p["t1"], p["t1_plus"], p["t2_minus"], p["t2"]
        d1, d2, plateau = t1p - t1, t2 - t2m, t2m - t1p
        total = 0.5 * d1 + plateau + 0.5 * d2
        piece = _pieces(np.array([t1, t1p, t2m, t2]), t, side)
        su = np.clip((t - t1) / d1, 0.0, 1.0)
        sd = np.clip((t2 - t) / d2, 0.0, 1.0)
        zero = 0.0 * t
        if order == -1:
            vals = [zero, d1 * _smoothstep_deriv(su, -1), 0.5 * d1 + (t - t1p),
                    total - d2 * _smoothstep_deriv(sd, -1), total + zero]
        else:
            up = _smoothstep_deriv(su, order) / d1**order
            down = (-1) ** order * _smoothstep_deriv(sd, order) / d2**order
            plat = 1.0 + zero if order == 0 else zero
            vals = [zero, up + zero, plat, down + zero, zero]
        return np.choose(piece, vals)

    def _eval_gaussian(self, t, order, side):
        t0, sigma = self.p["t0"], self.p["sigma"]
        u = (t - t0) / sigma
        if order == -1:
            return sigma * math.sqrt(math.pi / 2) * (1.0 + erf(u / math.sqrt(2)))
        c = np.zeros(order + 1)
        c[order] = 1.0
        return (-1) ** order * hermeval(u, c) * np.exp(-0.5 * u * u) / sigma**order

    def _eval_zero_average_sine(self, t, order, side):
        # T = F' with F(s) = sin^2(pi s / tau) sin(omega s) / omega on [0, tau]; F(0) = F(tau) = 0.
        t0, tau, om = self.p["t0"], self.p["duration"], self.p["omega"]
        piece = _pieces(np.array([t0, t0 + tau]), t, side)
        s = t - t0
        kap = 2 * math.pi / tau
        j = order + 1
        acc = 0.0 * s
        for i in range(j + 1):
            if i == 0:
                w = 0.5 * (1.0 - np.cos(kap * s))
            else:
                w = -0.5 * kap**i * np.cos(kap * s + 0.5 * i * math.pi)
            acc = acc + math.comb(j, i) * w * om ** (j - i) * np.sin(om * s + 0.5 * (j - i) * math.pi)
        inside = acc / om
        return np.where(piece == 1, inside, 0.0)


def make_envelope(kind: str, **params) -> Envelope:
    """Build and validate an envelope, e.g. ``make_envelope("trapezoid", t1=0, t1_plus=1, t2_minus=3, t2=4)``."""
    if kind not in ENVELOPE_PARAMS:
        raise ConfigurationError(f"unknown envelope kind {kind!r}")
    missing = set(ENVELOPE_PARAMS[kind]) - set(params)
    extra = set(params) - set(ENVELOPE_PARAMS[kind])
    if missing or extra:
        raise ConfigurationError(f"{kind}: missing {sorted(missing)}, unexpected {sorted(extra)}")
    return Envelope(kind, tuple((name, float(params[name])) for name in ENVELOPE_PARAMS[kind]))


@dataclass(frozen=True, order=True)
class TimeBasis:
    """The function t -> T^(order)(t) of one envelope."""

    envelope: Envelope
    order: int

    def __call__(self, t, side=1):
        return self.envelope(t, self.order, side)


Monomial = tuple[int, int, int]
TimeFactor = tuple[TimeBasis, ...]
_UNIT = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def _eval_factor(tfac: TimeFactor, t, side):
    out = np.ones_like(np.asarray(t, dtype=float))
    for tb in tfac:
        out = out * tb(t, side)
    return out


def _dt_factor(tfac: TimeFactor) -> list[TimeFactor]:
    out = []
    for i, tb in enumerate(tfac):
        lifted = TimeBasis(tb.envelope, tb.order + 1)
        out.append(tuple(sorted(tfac[:i] + (lifted,) + tfac[i + 1:])))
    return out


class TimeCoefficient:
    """Real function of time: sum of weight * product of envelope derivatives."""

    def __init__(self, terms: dict[TimeFactor, float] | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0.0}

    def __call__(self, t, side=1):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for tfac, c in self.terms.items():
            out = out + c * _eval_factor(tfac, t, side)
        return out

    def __eq__(self, other):
        return isinstance(other, TimeCoefficient) and self.terms == other.terms

    def __repr__(self):
        parts = [f"{c:+g}*" + "*".join(f"T{tb.order}" for tb in k) for k, c in sorted(self.terms.items())]
        return "TimeCoefficient(" + " ".join(parts) + ")"

    def __bool__(self):
        return bool(self.terms)

    def scaled(self, c: float) -> TimeCoefficient:
        return TimeCoefficient({k: c * v for k, v in self.terms.items()})

    def integrate(self, ta: float, tb: float) -> float:
        """int_ta^tb of the coefficient; exact for single-factor terms of order >= 0."""
        total = 0.0
        for tfac, c in self.terms.items():
            if not tfac:
                total += c * (tb - ta)
            elif len(tfac) == 1 and tfac[0].order >= 0:
                lower = TimeBasis(tfac[0].envelope, tfac[0].order - 1)
                total += c * float(lower(tb, -1) - lower(ta, 1))
            else:
                edges = sorted({ta, tb, *(b for x in tfac for b in x.envelope.breakpoints if ta < b < tb)})
                grid, slices = segmented_grid(edges, (tb - ta) / 4000)
                for sl in slices:
                    seg = grid[sl]
                    n = len(seg) - 1
                    w = simpson_weights(n, (seg[-1] - seg[0]) / n)
                    total += c * float(w @ _eval_factor(tfac, seg, _sides(len(seg))))
        return total


def _sides(n):
    s = np.zeros(n)
    s[0], s[-1] = 1, -1
    return s


class Poly:
    """Polynomial in (x, y, z) with TimeCoefficient-style coefficients.

    ``terms`` maps (monomial exponents, time factor) to a real weight; an empty
    time factor means the constant function 1.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {k: float(v) for k, v in (terms or {}).items() if v != 0.0}

    @classmethod
    def monomial(cls, exps: Monomial, weight: float = 1.0, tfac: TimeFactor = ()) -> Poly:
        return cls({(tuple(exps), tuple(sorted(tfac))): weight})

    @classmethod
    def coordinate(cls, axis: int, weight: float = 1.0, tfac: TimeFactor = ()) -> Poly:
        return cls.monomial(_UNIT[axis], weight, tfac)

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return Poly(out)

    def __neg__(self):
        return Poly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Poly({k: other * v for k, v in self.terms.items()})
        out: dict = {}
        for (ea, ta), va in self.terms.items():
            for (eb, tb), vb in other.terms.items():
                key = (tuple(i + j for i, j in zip(ea, eb)), tuple(sorted(ta + tb)))
                out[key] = out.get(key, 0.0) + va * vb
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __repr__(self):
        return f"Poly({self.terms!r})"

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def envelopes(self) -> set[Envelope]:
        return {tb.envelope for _, tfac in self.terms for tb in tfac}

    def partial(self, axis: int) -> Poly:
        out: dict = {}
        for (e, tfac), v in self.terms.items():
            if e[axis]:
                e2 = list(e)
                e2[axis] -= 1
                key = (tuple(e2), tfac)
                out[key] = out.get(key, 0.0) + v * e[axis]
        return Poly(out)

    def grad(self) -> tuple[Poly, Poly, Poly]:
        return tuple(self.partial(i) for i in range(3))

    def dt(self) -> Poly:
        out: dict = {}
        for (e, tfac), v in self.terms.items():
            for lifted in _dt_factor(tfac):
                key = (e, lifted)
                out[key] = out.get(key, 0.0) + v
        return Poly(out)

    def time_coefficients(self) -> dict[Monomial, TimeCoefficient]:
        grouped: dict[Monomial, dict] = {}
        for (e, tfac), v in self.terms.items():
            grouped.setdefault(e, {})[tfac] = grouped.get(e, {}).get(tfac, 0.0) + v
        return {e: TimeCoefficient(d) for e, d in sorted(grouped.items())}

    def __call__(self, q, t, side=1):
        q = np.asarray(q, dtype=float)
        t = np.asarray(t, dtype=float)
        out = np.zeros(np.broadcast_shapes(q.shape[:-1], t.shape))
        for (e, tfac), v in self.terms.items():
            mono = q[..., 0] ** e[0] * q[..., 1] ** e[1] * q[..., 2] ** e[2]
            out = out + v * mono * _eval_factor(tfac, t, side)
        return out


ZERO = Poly()
Vector = tuple[Poly, Poly, Poly]


class GaugeKind(str, enum.Enum):
    ELECTRIC_LENGTH = "ELECTRIC_LENGTH"
    ELECTRIC_VELOCITY = "ELECTRIC_VELOCITY"
    MAGNETIC_SYMMETRIC = "MAGNETIC_SYMMETRIC"
    MAGNETIC_LANDAU = "MAGNETIC_LANDAU"


def _check_restriction(A: Vector, phi: Poly) -> None:
    if len(A) != 3:
        raise ConfigurationError("A must have three components")
    if any(c.degree > 1 for c in A):
        raise ConfigurationError("vector potential components must be polynomials of degree <= 1")
    if phi.degree > 2:
        raise ConfigurationError("scalar potential must be a polynomial of degree <= 2")


@dataclass(frozen=True, eq=False)
class GaugeChoice:
    label: str
    A: Vector
    phi: Poly
    envelope: Envelope | None = None

    def __post_init__(self):
        _check_restriction(self.A, self.phi)

    @property
    def envelopes(self) -> set[Envelope]:
        out = set().union(*(c.envelopes for c in self.A), self.phi.envelopes)
        if self.envelope is not None:
            out.add(self.envelope)
        return out

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({b for env in self.envelopes for b in env.breakpoints}))

    @property
    def support(self) -> tuple[float, float]:
        bp = self.breakpoints
        if not bp:
            return (0.0, 0.0)
        return bp[0], bp[-1]

    @property
    def frequency(self) -> float:
        return max((env.frequency for env in self.envelopes), default=0.0)

    @property
    def feature_time(self) -> float:
        return min((env.feature_time for env in self.envelopes), default=math.inf)

    @property
    def is_velocity_type(self) -> bool:
        return self.phi.is_zero

    def scaled(self, c: float) -> GaugeChoice:
        return GaugeChoice(self.label, tuple(a * c for a in self.A), self.phi * c, self.envelope)


@dataclass(frozen=True, eq=False)
class GaugeFunction:
    """Scalar f(q, t) generating A -> A + grad f, Phi -> Phi - df/dt."""

    f: Poly

    def __post_init__(self):
        if self.f.degree > 2:
            raise ConfigurationError("gauge functions must be polynomials of degree <= 2")


def builtin_gauge(kind, envelope: Envelope, eps: float = 1.0, polarization=(0.0, 0.0, 1.0)) -> GaugeChoice:
    """The four reference gauges.

    Electric kinds describe a uniform field E(t) = eps * T(t) * e_pol
    (length: A = 0, Phi = -E.q; velocity: A = -int E dt, Phi = 0).  Magnetic
    kinds describe B = eps * T(t) z_hat (symmetric: A = eps T (-y/2, x/2, 0);
    Landau: A = eps T (0, x, 0)).
    """
    try:
        kind = GaugeKind(kind)
    except ValueError:
        raise ConfigurationError(f"unknown gauge kind {kind!r}") from None
    T0 = (TimeBasis(envelope, 0),)
    if kind in (GaugeKind.ELECTRIC_LENGTH, GaugeKind.ELECTRIC_VELOCITY):
        pol = np.asarray(polarization, dtype=float)
        if pol.shape != (3,) or not np.linalg.norm(pol) > 0:
            raise ConfigurationError("polarization must be a non-zero 3-vector")
        pol = pol / np.linalg.norm(pol)
        if kind is GaugeKind.ELECTRIC_LENGTH:
            phi = ZERO
            for i in range(3):
                phi = phi + Poly.coordinate(i, -eps * pol[i], T0)
            return GaugeChoice(kind.value, (ZERO, ZERO, ZERO), phi, envelope)
        Tm1 = (TimeBasis(envelope, -1),)
        A = tuple(Poly.monomial((0, 0, 0), -eps * pol[i], Tm1) for i in range(3))
        return GaugeChoice(kind.value, A, ZERO, envelope)
    if kind is GaugeKind.MAGNETIC_SYMMETRIC:
        A = (Poly.coordinate(1, -0.5 * eps, T0), Poly.coordinate(0, 0.5 * eps, T0), ZERO)
    else:
        A = (ZERO, Poly.coordinate(0, eps, T0), ZERO)
    return GaugeChoice(kind.value, A, ZERO, envelope)


def gauge_transform(g: GaugeChoice, f: GaugeFunction) -> GaugeChoice:
    """A' = A + grad f, Phi' = Phi - df/dt."""
    if not isinstance(f, GaugeFunction):
        f = GaugeFunction(f)
    grad = f.f.grad()
    A = tuple(a + d for a, d in zip(g.A, grad))
    return GaugeChoice(f"{g.label}+grad(f)", A, g.phi - f.f.dt(), g.envelope)


def field_polys(g: GaugeChoice) -> tuple[Vector, Vector]:
    """Symbolic (E, B): E = -grad Phi - dA/dt, B = curl A."""
    gphi = g.phi.grad()
    E = tuple(-gphi[i] - g.A[i].dt() for i in range(3))
    Ax, Ay, Az = g.A
    B = (Az.partial(1) - Ay.partial(2), Ax.partial(2) - Az.partial(0), Ay.partial(0) - Ax.partial(1))
    return E, B


def physical_fields(g: GaugeChoice, q, t, side=1) -> tuple[np.ndarray, np.ndarray]:
    """E and B at positions q (shape (..., 3)) and time(s) t."""
    E, B = field_polys(g)
    q = np.asarray(q, dtype=float)
    Ev = np.stack([c(q, t, side) for c in E], axis=-1)
    Bv = np.stack([c(q, t, side) for c in B], axis=-1)
    return Ev, Bv


@dataclass(frozen=True)
class PreferentialDiagnostics:
    A_vanishes_at_infinity: bool
    electric_time_average: np.ndarray
    A_sup_before: float
    A_sup_after: float
    t_before: float
    t_after: float


def preferential_diagnostics(g: GaugeChoice, box: float = 10.0, tol: float = 1e-12) -> PreferentialDiagnostics:
    """Does A vanish before and after the pulse, and what is int E dt (uniform part)?

    A is linear in q, so its sup over the cube [-box, box]^3 is attained at a corner.
    """
    t_before, t_after = g.support
    corners = np.array(list(product((-box, box), repeat=3)) + [(0.0, 0.0, 0.0)])

    def sup_A(t, side):
        return float(max(np.max(np.abs(c(corners, t, side))) for c in g.A))

    before, after = sup_A(t_before, -1), sup_A(t_after, 1)
    origin = np.zeros(3)
    average = np.zeros(3)
    gphi = g.phi.grad()
    for i in range(3):
        uniform = gphi[i].time_coefficients().get((0, 0, 0), TimeCoefficient())
        average[i] = -uniform.integrate(t_before, t_after)
        average[i] -= float(g.A[i](origin, t_after, 1) - g.A[i](origin, t_before, -1))
    return PreferentialDiagnostics(
        A_vanishes_at_infinity=before <= tol and after <= tol,
        electric_time_average=average,
        A_sup_before=before,
        A_sup_after=after,
        t_before=t_before,
        t_after=t_after,
    )
