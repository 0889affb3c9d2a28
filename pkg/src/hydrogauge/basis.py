"""Truncated hydrogen-like bound-state basis in Hartree atomic units.

States are labelled (n, l, m) and use complex spherical harmonics, so L_z is
diagonal.  Wavefunctions factor as

    psi_nlm(r, theta, phi) = R_nl(r) * Theta_lm(theta) * exp(i m phi) / sqrt(2 pi)

with Theta_lm real and normalised against sin(theta) d(theta), Condon-Shortley
phase included.  Radial integrals use composite Gauss-Legendre on geometric
panels; the theta integral uses Gauss-Legendre in cos(theta).  The phi integral
is never sampled: every angular integrand is carried as a finite Fourier series
in phi and integrated exactly (see ``operators``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DomainError
from .quadrature import composite_gauss_legendre, gauss_legendre, geometric_boundaries


@dataclass(frozen=True, order=True)
class QuantumNumbers:
    n: int
    l: int
    m: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.l) != self.l or int(self.m) != self.m:
            raise DomainError(f"quantum numbers must be integers, got {self}")
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.l < self.n:
            raise DomainError(f"need 0 <= l < n, got n={self.n}, l={self.l}")
        if abs(self.m) > self.l:
            raise DomainError(f"need |m| <= l, got l={self.l}, m={self.m}")

    def __str__(self):
        return f"({self.n},{self.l},{self.m})"


def energy(n: int, Z: float = 1.0) -> float:
    """Bohr energy -Z^2 / (2 n^2) in Hartree."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if Z <= 0:
        raise DomainError(f"Z must be positive, got {Z}")
    return -(Z * Z) / (2.0 * n * n)


def _laguerre(k: int, alpha: float, x: np.ndarray) -> np.ndarray:
    """Generalised Laguerre L_k^alpha(x) by the three-term recurrence."""
    if k < 0:
        return np.zeros_like(x)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = 1.0 + alpha - x
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


def _radial_norm(n: int, l: int, Z: float) -> float:
    log_ratio = math.lgamma(n - l) - math.lgamma(n + l + 1)
    return math.sqrt((2.0 * Z / n) ** 3 * math.exp(log_ratio) / (2.0 * n))


def _check_nl(n: int, l: int, Z: float) -> None:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not 0 <= l < n:
        raise DomainError(f"need 0 <= l < n, got n={n}, l={l}")
    if Z <= 0:
        raise DomainError(f"Z must be positive, got {Z}")


def radial_value(n: int, l: int, Z: float, r):
    """Normalised radial function R_nl(r)."""
    _check_nl(n, l, Z)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("r must be non-negative")
    rho = 2.0 * Z * r / n
    return _radial_norm(n, l, Z) * rho**l * np.exp(-0.5 * rho) * _laguerre(n - l - 1, 2 * l + 1, rho)


def radial_derivative(n: int, l: int, Z: float, r):
    """dR_nl/dr, differentiated analytically (dL_k^a/dx = -L_{k-1}^{a+1})."""
    _check_nl(n, l, Z)
    r = np.asarray(r, dtype=float)
    rho = 2.0 * Z * r / n
    k, alpha = n - l - 1, 2 * l + 1
    lag = _laguerre(k, alpha, rho)
    dlag = -_laguerre(k - 1, alpha + 1, rho)
    poly = (-0.5 * lag + dlag) * rho**l
    if l > 0:
        poly = poly + l * rho ** (l - 1) * lag
    return _radial_norm(n, l, Z) * (2.0 * Z / n) * np.exp(-0.5 * rho) * poly


def theta_functions(l_max: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Theta_lm(theta) and dTheta_lm/dtheta at x = cos(theta), for |m| <= l <= l_max.

    Arrays have shape (l_max + 1, 2 l_max + 1, len(x)); index [l, m + l_max].
    Entries with |m| > l are zero.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(1.0 - x * x)
    L = l_max
    theta = np.zeros((L + 1, 2 * L + 1, x.size))
    for m in range(L + 1):
        pmm = (-1) ** m * math.sqrt(0.5 * (2 * m + 1) * math.prod((2 * k - 1) / (2 * k) for k in range(1, m + 1)))
        theta[m, m + L] = pmm * s**m
        if m + 1 <= L:
            theta[m + 1, m + L] = x * math.sqrt(2 * m + 3) * theta[m, m + L]
        for l in range(m + 2, L + 1):
            a_l = math.sqrt((4 * l * l - 1) / (l * l - m * m))
            a_lm1 = math.sqrt((4 * (l - 1) ** 2 - 1) / ((l - 1) ** 2 - m * m))
            theta[l, m + L] = a_l * (x * theta[l - 1, m + L] - theta[l - 2, m + L] / a_lm1)
        for l in range(m, L + 1):
            theta[l, -m + L] = (-1) ** m * theta[l, m + L]
    dtheta = np.zeros_like(theta)
    for l in range(L + 1):
        for m in range(-l, l + 1):
            up = math.sqrt((l - m) * (l + m + 1))
            dn = math.sqrt((l + m) * (l - m + 1))
            val = np.zeros(x.size)
            if m + 1 <= l:
                val += up * theta[l, m + 1 + L]
            if m - 1 >= -l:
                val -= dn * theta[l, m - 1 + L]
            dtheta[l, m + L] = 0.5 * val
    return theta, dtheta


@dataclass(frozen=True)
class RadialGrid:
    """Composite Gauss-Legendre specification: panel edges plus nodes per panel."""

    boundaries: tuple[float, ...]
    nodes_per_panel: int

    @classmethod
    def geometric(cls, r_max: float, n_panels: int = 12, nodes_per_panel: int = 16, first: float = 0.5):
        edges = geometric_boundaries(r_max, n_panels, first)
        return cls(tuple(float(b) for b in edges), nodes_per_panel)

    @property
    def r_max(self) -> float:
        return self.boundaries[-1]

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        return composite_gauss_legendre(self.boundaries, self.nodes_per_panel)


@dataclass(frozen=True)
class BasisSpec:
    """Truncation (n <= n_max), nuclear charge and quadrature resolution.

    ``radial_grid`` defaults to 12 geometric panels x 16 nodes on
    [0, 20 n_max^2 / Z]; ``angular_order`` defaults to the exact degree
    2 n_max + 4.
    """

    n_max: int = 5
    Z: float = 1.0
    radial_grid: RadialGrid | None = None
    angular_order: int | None = None

    def __post_init__(self):
        if not isinstance(self.n_max, (int, np.integer)) or self.n_max < 1:
            raise ConfigurationError(f"n_max must be an integer >= 1, got {self.n_max!r}")
        if not self.Z > 0:
            raise ConfigurationError(f"Z must be positive, got {self.Z!r}")
        if self.radial_grid is None:
            r_max = 20.0 * self.n_max**2 / self.Z
            object.__setattr__(self, "radial_grid", RadialGrid.geometric(r_max, first=0.5 / self.Z))
        if self.angular_order is None:
            object.__setattr__(self, "angular_order", 2 * self.n_max + 4)
        edges = self.radial_grid.boundaries
        if edges[0] != 0.0 or any(b <= a for a, b in zip(edges[:-1], edges[1:])):
            raise ConfigurationError("radial panels must start at 0 and increase strictly")
        if self.radial_grid.nodes_per_panel < 1:
            raise ConfigurationError("need at least one radial node per panel")
        if edges[-1] < 20.0 * self.n_max**2 / self.Z * (1 - 1e-12):
            raise ConfigurationError(f"r_max={edges[-1]} is below 20 n_max^2 / Z")
        if self.angular_order < 2 * self.n_max + 4:
            raise ConfigurationError(
                f"angular_order={self.angular_order} cannot integrate degree {2 * self.n_max + 4} exactly"
            )

    @property
    def theta_nodes(self) -> int:
        # Gauss-Legendre with k nodes is exact through degree 2k - 1.
        return self.angular_order // 2 + 1


@dataclass(frozen=True)
class EigenState:
    qn: QuantumNumbers
    energy: float
    radial_values: np.ndarray = field(repr=False, compare=False)


def _state_labels(n_max: int) -> list[QuantumNumbers]:
    return [QuantumNumbers(n, l, m) for n in range(1, n_max + 1) for l in range(n) for m in range(-l, l + 1)]


class HydrogenicBasis:
    """Immutable basis plus the quadrature tables every matrix element needs."""

    def __init__(self, spec: BasisSpec):
        self.spec = spec
        self.Z = spec.Z
        self.r, self.w = spec.radial_grid.nodes_weights()
        self.labels = tuple(_state_labels(spec.n_max))
        self.index = {qn: i for i, qn in enumerate(self.labels)}
        self.energies = np.array([energy(qn.n, spec.Z) for qn in self.labels])
        # Radial channels (n, l) and angular channels (l, m) in first-seen order.
        self.nl_channels = tuple(dict.fromkeys((q.n, q.l) for q in self.labels))
        self.lm_channels = tuple(sorted(dict.fromkeys((q.l, q.m) for q in self.labels)))
        self.nl_index = np.array([self.nl_channels.index((q.n, q.l)) for q in self.labels])
        self.lm_index = np.array([self.lm_channels.index((q.l, q.m)) for q in self.labels])
        self.radial = np.array([radial_value(n, l, spec.Z, self.r) for n, l in self.nl_channels])
        self.radial_d = np.array([radial_derivative(n, l, spec.Z, self.r) for n, l in self.nl_channels])
        self.x, self.wx = gauss_legendre(spec.theta_nodes)
        l_max = spec.n_max - 1
        self.l_max = l_max
        self.theta, self.dtheta = theta_functions(l_max, self.x)
        self._matrix_cache: dict = {}
        for arr in (self.r, self.w, self.energies, self.radial, self.radial_d, self.x, self.wx):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.labels)

    @cached_property
    def states(self) -> list[EigenState]:
        return [
            EigenState(qn, float(self.energies[i]), self.radial[self.nl_index[i]])
            for i, qn in enumerate(self.labels)
        ]

    def radial_overlap(self, power: int = 0) -> np.ndarray:
        """Channel matrix of int R_a R_b r^(2 + power) dr."""
        return (self.radial * self.w * self.r ** (2 + power)) @ self.radial.T

    def angular_overlap(self) -> np.ndarray:
        """Channel matrix of int Y_a* Y_b dOmega (m mismatch integrates to exactly 0)."""
        L = self.l_max
        out = np.zeros((len(self.lm_channels),) * 2)
        for i, (la, ma) in enumerate(self.lm_channels):
            for j, (lb, mb) in enumerate(self.lm_channels):
                if ma == mb:
                    out[i, j] = np.sum(self.wx * self.theta[la, ma + L] * self.theta[lb, mb + L])
        return out


_BASIS_CACHE: dict[BasisSpec, HydrogenicBasis] = {}


def build_basis(spec: BasisSpec | None = None) -> HydrogenicBasis:
    """Construct (or fetch the cached) basis for ``spec``."""
    spec = spec or BasisSpec()
    if spec not in _BASIS_CACHE:
        _BASIS_CACHE[spec] = HydrogenicBasis(spec)
    return _BASIS_CACHE[spec]


def enumerate_states(spec: BasisSpec) -> list[EigenState]:
    """All (n, l, m) with n <= n_max, ordered by n, then l, then m."""
    return build_basis(spec).states


def orthonormality_report(spec: BasisSpec) -> float:
    """max |<a|b> - delta_ab| over all basis pairs."""
    basis = build_basis(spec)
    radial = basis.radial_overlap()[np.ix_(basis.nl_index, basis.nl_index)]
    angular = basis.angular_overlap()[np.ix_(basis.lm_index, basis.lm_index)]
    overlap = radial * angular
    return float(np.max(np.abs(overlap - np.eye(len(basis)))))
