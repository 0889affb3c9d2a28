"""Matrix elements of the perturbing Hamiltonian over the hydrogenic basis.

H_1 = -p*A + Phi (+ A^2/2 on request) is expanded into primitive operators
with time-dependent scalar weights, and each primitive is tabulated once per
basis.  Products q_i p_j always enter in the symmetrised order
q_i*p_j = (q_i p_j + p_j q_i)/2; at the matrix level that is the Hermitian
part (M + M^dagger)/2 of the quadrature matrix of q_i p_j, because
<a|p_j q_i|b> = conj(<b|q_i p_j|a>).

Every element factorises into a radial integral over R_a, R_b (or R_b') and
an angular integral.  Angular integrands are kept as finite Fourier series in
phi, so the phi integral is exact: elements that violate the m selection rule
of a primitive come out as exact zeros.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, HydrogenicBasis, QuantumNumbers, build_basis
from .errors import ConfigurationError
from .fields import GaugeChoice, Poly, TimeCoefficient, Vector

AXES = "xyz"


class PrimitiveOperator(str, enum.Enum):
    IDENTITY = "identity"
    X = "x"
    Y = "y"
    Z = "z"
    P_X = "p_x"
    P_Y = "p_y"
    P_Z = "p_z"
    X_P_X = "x*p_x"
    X_P_Y = "x*p_y"
    X_P_Z = "x*p_z"
    Y_P_X = "y*p_x"
    Y_P_Y = "y*p_y"
    Y_P_Z = "y*p_z"
    Z_P_X = "z*p_x"
    Z_P_Y = "z*p_y"
    Z_P_Z = "z*p_z"
    XX = "x*x"
    YY = "y*y"
    ZZ = "z*z"
    XY = "x*y"
    XZ = "x*z"
    YZ = "y*z"

    @classmethod
    def parse(cls, name: str) -> PrimitiveOperator:
        key = name.strip().replace(" ", "").replace("·", "*")
        aliases = {"1": "identity", "x^2": "x*x", "y^2": "y*y", "z^2": "z*z", "xy": "x*y", "xz": "x*z", "yz": "y*z",
                   "x²": "x*x", "y²": "y*y", "z²": "z*z"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(f"unknown primitive operator {name!r}") from None

    @property
    def is_coordinate(self) -> bool:
        return "p_" not in self.value


def coordinate_primitive(exps) -> PrimitiveOperator:
    exps = tuple(exps)
    if sum(exps) == 0:
        return PrimitiveOperator.IDENTITY
    name = "*".join(AXES[i] for i in range(3) for _ in range(exps[i]))
    return PrimitiveOperator(name)


def momentum_primitive(j: int, coord: int | None = None) -> PrimitiveOperator:
    if coord is None:
        return PrimitiveOperator(f"p_{AXES[j]}")
    return PrimitiveOperator(f"{AXES[coord]}*p_{AXES[j]}")


def primitive_monomial(op: PrimitiveOperator):
    """Exponents of a coordinate primitive."""
    if not op.is_coordinate:
        raise ConfigurationError(f"{op.value} is not a coordinate polynomial")
    exps = [0, 0, 0]
    if op is not PrimitiveOperator.IDENTITY:
        for ch in op.value.split("*"):
            exps[AXES.index(ch)] += 1
    return tuple(exps)


# Angular functions: dict {M: array over theta nodes}, standing for sum_M f_M(theta) e^{i M phi}.

def _mul(f, g):
    out = {}
    for mf, vf in f.items():
        for mg, vg in g.items():
            out[mf + mg] = out.get(mf + mg, 0.0) + vf * vg
    return out


def _add(f, g):
    out = dict(f)
    for m, v in g.items():
        out[m] = out.get(m, 0.0) + v
    return out


def _unit_vectors(x):
    s = np.sqrt(1.0 - x * x)
    one = np.ones_like(x)
    n = ({1: s / 2, -1: s / 2}, {1: s / 2j, -1: -s / 2j}, {0: x + 0j})
    e_theta = ({1: x / 2, -1: x / 2}, {1: x / 2j, -1: -x / 2j}, {0: -s + 0j})
    e_phi = ({1: -one / 2j, -1: one / 2j}, {1: one / 2, -1: one / 2}, {})
    return n, e_theta, e_phi, s


class _AngularTables:
    """Channel matrices <Y_a| g |Y_b> for the handful of angular factors needed."""

    def __init__(self, basis: HydrogenicBasis):
        self.basis = basis
        L = basis.l_max
        x, wx = basis.x, basis.wx
        n, e_th, e_ph, s = _unit_vectors(x)
        chans = basis.lm_channels
        Y, G = [], []
        for l, m in chans:
            th = basis.theta[l, m + L]
            Y.append({m: th + 0j})
            dth = basis.dtheta[l, m + L]
            dphi = {m: 1j * m * th / s}
            G.append(tuple(_add(_mul(e_th[j], {m: dth + 0j}), _mul(e_ph[j], dphi)) for j in range(3)))
        self.bra = [(m, basis.theta[l, m + L] * wx) for l, m in chans]
        self.overlap = self._matrix(Y)
        self.n = [self._matrix([_mul(n[i], y) for y in Y]) for i in range(3)]
        self.nn = {(i, j): self._matrix([_mul(_mul(n[i], n[j]), y) for y in Y]) for i in range(3) for j in range(3)}
        self.G = [self._matrix([g[j] for g in G]) for j in range(3)]
        self.nG = {(i, j): self._matrix([_mul(n[i], g[j]) for g in G]) for i in range(3) for j in range(3)}

    def _matrix(self, kets):
        out = np.zeros((len(self.bra), len(kets)), dtype=complex)
        for a, (ma, wa) in enumerate(self.bra):
            for b, ket in enumerate(kets):
                comp = ket.get(ma)
                if comp is not None:
                    out[a, b] = wa @ comp
        return out


def _expand(basis: HydrogenicBasis, radial: np.ndarray, angular: np.ndarray) -> np.ndarray:
    return radial[np.ix_(basis.nl_index, basis.nl_index)] * angular[np.ix_(basis.lm_index, basis.lm_index)]


def _compute_primitives(basis: HydrogenicBasis) -> dict[PrimitiveOperator, np.ndarray]:
    ang = _AngularTables(basis)
    R, Rd, wr, r = basis.radial, basis.radial_d, basis.w, basis.r

    def rad(power, deriv=False):
        right = Rd if deriv else R
        return (R * wr * r ** (2 + power)) @ right.T

    R0, R1, R2, Rm1 = rad(0), rad(1), rad(2), rad(-1)
    Rd0, Rd1 = rad(0, True), rad(1, True)
    # The basis is orthonormal by construction; quadrature overlap errors are reported by
    # orthonormality_report rather than folded into the identity operator.
    out = {PrimitiveOperator.IDENTITY: np.eye(len(basis), dtype=complex)}
    for i in range(3):
        out[coordinate_primitive(np.eye(3, dtype=int)[i])] = _expand(basis, R1, ang.n[i])
        for j in range(i, 3):
            exps = np.eye(3, dtype=int)[i] + np.eye(3, dtype=int)[j]
            out[coordinate_primitive(exps)] = _expand(basis, R2, ang.nn[i, j])
    for j in range(3):
        # p_j psi = -i (R' Y n_j + (R / r) r grad_j Y)
        out[momentum_primitive(j)] = -1j * (_expand(basis, Rd0, ang.n[j]) + _expand(basis, Rm1, ang.G[j]))
        for i in range(3):
            raw = -1j * (_expand(basis, Rd1, ang.nn[i, j]) + _expand(basis, R0, ang.nG[i, j]))
            out[momentum_primitive(j, i)] = 0.5 * (raw + raw.conj().T)
    for m in out.values():
        m.setflags(write=False)
    return out


def primitive_matrices(basis: HydrogenicBasis) -> dict[PrimitiveOperator, np.ndarray]:
    """All primitive matrices for ``basis`` (computed once, then cached on it)."""
    cache = basis._matrix_cache
    if "primitives" not in cache:
        cache["primitives"] = _compute_primitives(basis)
    return cache["primitives"]


def primitive_matrix(op, basis: HydrogenicBasis) -> np.ndarray:
    if not isinstance(op, PrimitiveOperator):
        op = PrimitiveOperator.parse(op)
    return primitive_matrices(basis)[op]


def matel_primitive(op, a: QuantumNumbers, b: QuantumNumbers, basis: HydrogenicBasis | None = None) -> complex:
    """<a| op |b>."""
    if basis is None:
        basis = build_basis(BasisSpec(n_max=max(a.n, b.n, 1)))
    M = primitive_matrix(op, basis)
    return complex(M[basis.index[a], basis.index[b]])


@dataclass(frozen=True)
class OperatorExpansion:
    """sum_k c_k(t) * primitive_k with real time coefficients."""

    terms: tuple[tuple[TimeCoefficient, PrimitiveOperator], ...]
    needs_symmetrization: bool = False

    def coefficients(self, t, side=1) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.array([c(t, side) for c, _ in self.terms]).reshape(len(self.terms), *t.shape)

    def operators(self) -> list[PrimitiveOperator]:
        return [op for _, op in self.terms]

    def stacked(self, basis: HydrogenicBasis) -> np.ndarray:
        mats = primitive_matrices(basis)
        if not self.terms:
            return np.zeros((0, len(basis), len(basis)), dtype=complex)
        return np.stack([mats[op] for _, op in self.terms])

    def matrix(self, t: float, basis: HydrogenicBasis, side=1) -> np.ndarray:
        c = self.coefficients(float(t), side)
        return np.tensordot(c, self.stacked(basis), axes=1) if self.terms else np.zeros((len(basis),) * 2, complex)

    def coefficient_of(self, op) -> TimeCoefficient:
        op = op if isinstance(op, PrimitiveOperator) else PrimitiveOperator.parse(op)
        for c, o in self.terms:
            if o is op:
                return c
        return TimeCoefficient()


def _accumulate(acc: dict, op: PrimitiveOperator, tc: TimeCoefficient, sign: float = 1.0) -> None:
    cur = acc.setdefault(op, {})
    for k, v in tc.terms.items():
        cur[k] = cur.get(k, 0.0) + sign * v


def p_dot(V: Vector) -> tuple[dict, bool]:
    """p*V as {primitive: time weights}; second value flags non-commuting pairs (q_i with p_i)."""
    acc: dict = {}
    noncommuting = False
    for j in range(3):
        for mono, tc in V[j].time_coefficients().items():
            if sum(mono) == 0:
                _accumulate(acc, momentum_primitive(j), tc)
            elif sum(mono) == 1:
                i = mono.index(1)
                noncommuting |= i == j
                _accumulate(acc, momentum_primitive(j, i), tc)
            else:
                raise ConfigurationError("p*A needs A of degree <= 1")
    return acc, noncommuting


def _finish(acc: dict, flag: bool) -> OperatorExpansion:
    terms = []
    for op in PrimitiveOperator:
        if op in acc:
            tc = TimeCoefficient(acc[op])
            if tc:
                terms.append((tc, op))
    return OperatorExpansion(tuple(terms), flag)


def h1_expansion(g: GaugeChoice, include_A2: bool = False) -> OperatorExpansion:
    """H_1 = -p*A + Phi (plus A^2/2 when ``include_A2``) as primitive terms."""
    if not isinstance(g, GaugeChoice):
        raise ConfigurationError("h1_expansion needs a polynomial GaugeChoice")
    acc, flag = p_dot(g.A)
    acc = {op: {k: -v for k, v in d.items()} for op, d in acc.items()}
    scalar = g.phi
    if include_A2:
        scalar = scalar + sum((a * a for a in g.A), Poly()) * 0.5
    if scalar.degree > 2:
        raise ConfigurationError("scalar part of H_1 exceeds degree 2")
    for mono, tc in scalar.time_coefficients().items():
        _accumulate(acc, coordinate_primitive(mono), tc)
    return _finish(acc, flag)


def h1_matrix(g: GaugeChoice, t: float, basis: HydrogenicBasis, include_A2: bool = False, side=1) -> np.ndarray:
    """(H_1)_{ab} at time t."""
    return h1_expansion(g, include_A2).matrix(t, basis, side)


@dataclass(frozen=True)
class IdentityResidual:
    max_residual: float
    degenerate_max: float
    n_pairs: int
    n_degenerate: int


def commutator_identity_residual(scalar_op, basis: HydrogenicBasis, degeneracy_tol: float = 1e-12) -> IdentityResidual:
    """Check (e_a - e_b) <a|Phi|b> = -i <a| p*grad(Phi) |b> for a coordinate primitive Phi.

    Degenerate pairs are excluded from ``max_residual``; ``degenerate_max``
    reports max |<a| p*grad(Phi) |b>| over them (the identity then demands 0).
    """
    op = scalar_op if isinstance(scalar_op, PrimitiveOperator) else PrimitiveOperator.parse(scalar_op)
    phi = Poly.monomial(primitive_monomial(op))
    acc, _ = p_dot(phi.grad())
    P = _finish(acc, False).matrix(0.0, basis)
    mats = primitive_matrices(basis)
    de = basis.energies[:, None] - basis.energies[None, :]
    lhs = de * mats[op]
    rhs = -1j * P
    degenerate = np.abs(de) <= degeneracy_tol
    off = ~np.eye(len(basis), dtype=bool)
    res = np.abs(lhs - rhs)
    nondeg = ~degenerate
    deg_pairs = degenerate & off
    return IdentityResidual(
        max_residual=float(res[nondeg].max()) if nondeg.any() else 0.0,
        degenerate_max=float(np.abs(P[deg_pairs]).max()) if deg_pairs.any() else 0.0,
        n_pairs=int(nondeg.sum()),
        n_degenerate=int(deg_pairs.sum()),
    )
