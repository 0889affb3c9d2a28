import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import matrix_element
from hydrogauge.basis import BasisSpec, QuantumNumbers, build_basis
from hydrogauge.errors import ConfigurationError
from hydrogauge.fields import builtin_gauge
from hydrogauge.operators import (
    PrimitiveOperator,
    commutator_identity_residual,
    h1_expansion,
    matel_primitive,
    primitive_matrices,
    primitive_matrix,
)

Q = QuantumNumbers
ALL_OPS = [op.value for op in PrimitiveOperator]


def test_dipole_element_closed_form(basis2):
    z12 = matel_primitive("z", Q(1, 0, 0), Q(2, 1, 0), basis2)
    assert z12 == pytest.approx(128 * math.sqrt(2) / 243, abs=1e-12)
    assert abs(matel_primitive("x", Q(1, 0, 0), Q(2, 1, 0), basis2)) < 1e-15


@pytest.mark.parametrize("op", ["x", "y", "z", "p_x", "p_y", "p_z", "x*p_y", "y*p_x", "z*p_z", "x*x", "x*y", "y*z"])
@pytest.mark.parametrize("pair", [((1, 0, 0), (2, 1, 1)), ((2, 1, -1), (2, 1, 1)), ((2, 1, 0), (3, 2, 1)),
                                  ((2, 0, 0), (3, 1, -1)), ((1, 0, 0), (3, 2, -2))])
def test_matrix_elements_against_independent_quadrature(op, pair, basis3):
    a, b = pair
    got = matel_primitive(op, Q(*a), Q(*b), basis3)
    ref = matrix_element(op, a, b)
    assert abs(got - ref) <= 1e-10, (op, a, b, got, ref)


def test_scaled_charge_against_quadrature():
    basis = build_basis(BasisSpec(n_max=2, Z=2.0))
    for op in ("z", "p_z", "x*p_y", "z*z"):
        got = matel_primitive(op, Q(1, 0, 0), Q(2, 1, 0), basis)
        assert abs(got - matrix_element(op, (1, 0, 0), (2, 1, 0), Z=2)) <= 1e-10


@pytest.mark.parametrize("op", ALL_OPS)
def test_primitives_are_hermitian(op, basis3):
    M = primitive_matrix(op, basis3)
    assert np.abs(M - M.conj().T).max() <= 1e-12


def test_primitives_are_read_only(basis3):
    with pytest.raises(ValueError):
        primitive_matrix("x", basis3)[0, 0] = 1.0


def test_angular_momentum_is_diagonal(basis3):
    # L_z = x p_y - y p_x
    Lz = primitive_matrix("x*p_y", basis3) - primitive_matrix("y*p_x", basis3)
    m = np.array([q.m for q in basis3.labels], dtype=float)
    assert np.abs(Lz - np.diag(m)).max() <= 1e-12


def test_phi_selection_is_exact(basis3):
    """Elements with a forbidden change of m are exact zeros (phi is integrated exactly)."""
    dm = np.array([[a.m - b.m for b in basis3.labels] for a in basis3.labels])
    for op, allowed in (("z", {0}), ("x", {-1, 1}), ("p_y", {-1, 1}), ("z*z", {0}), ("x*y", {-2, 0, 2}),
                        ("x*p_y", {-2, 0, 2}), ("x*z", {-1, 1})):
        M = primitive_matrix(op, basis3)
        forbidden = ~np.isin(dm, list(allowed))
        assert np.all(M[forbidden] == 0), op


def test_x_py_selection_pattern(basis3):
    """x*p_y has even parity: it links only l' - l in {0, +-2} and m' - m in {0, +-2}."""
    M = primitive_matrix("x*p_y", basis3)
    labels = basis3.labels
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            if abs(M[i, j]) > 1e-12:
                assert (a.l - b.l) in (0, 2, -2) and (a.m - b.m) in (0, 2, -2)
    # the symmetric part of x*p_y vanishes between distinct degenerate states with m' != m
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            if a.n == b.n and a.m != b.m:
                assert abs(M[i, j]) <= 1e-12, (a, b)


@pytest.mark.parametrize("n_max", [2, 3])
@pytest.mark.parametrize("op", ["x", "y", "z"])
def test_commutator_identity(op, n_max):
    res = commutator_identity_residual(op, build_basis(BasisSpec(n_max=n_max)))
    assert res.max_residual <= 1e-8
    assert res.degenerate_max <= 1e-8
    assert res.n_pairs > 0 and res.n_degenerate > 0


@pytest.mark.parametrize("op", ["x*x", "x*y", "z*z"])
def test_commutator_identity_quadratic(op, basis3):
    assert commutator_identity_residual(op, basis3).max_residual <= 1e-8


def test_parse_aliases_and_errors():
    assert PrimitiveOperator.parse("x^2") is PrimitiveOperator.XX
    assert PrimitiveOperator.parse(" x · p_y ") is PrimitiveOperator.X_P_Y
    assert PrimitiveOperator.parse("1") is PrimitiveOperator.IDENTITY
    with pytest.raises(ConfigurationError):
        PrimitiveOperator.parse("p_x*x*x")


def test_h1_expansions(trapezoid):
    S = h1_expansion(builtin_gauge("MAGNETIC_SYMMETRIC", trapezoid, 1.0))
    assert set(S.operators()) == {PrimitiveOperator.X_P_Y, PrimitiveOperator.Y_P_X}
    assert S.coefficient_of("x*p_y")(50.0) == pytest.approx(-0.5)
    assert S.coefficient_of("y*p_x")(50.0) == pytest.approx(0.5)
    L = h1_expansion(builtin_gauge("MAGNETIC_LANDAU", trapezoid, 1.0), include_A2=True)
    assert set(L.operators()) == {PrimitiveOperator.X_P_Y, PrimitiveOperator.XX}
    assert L.coefficient_of("x*x")(50.0) == pytest.approx(0.5)
    E = h1_expansion(builtin_gauge("ELECTRIC_LENGTH", trapezoid, 1.0))
    assert E.operators() == [PrimitiveOperator.Z] and E.coefficient_of("z")(50.0) == pytest.approx(-1.0)  # Phi = -E.q


@settings(max_examples=30, deadline=None)
@given(t=st.floats(-10, 110), kind=st.sampled_from(["MAGNETIC_SYMMETRIC", "MAGNETIC_LANDAU",
                                                     "ELECTRIC_LENGTH", "ELECTRIC_VELOCITY"]),
       a2=st.booleans())
def test_h1_matrix_is_hermitian(t, kind, a2, trapezoid, basis3):
    M = h1_expansion(builtin_gauge(kind, trapezoid, 0.7), a2).matrix(t, basis3)
    assert np.abs(M - M.conj().T).max() <= 1e-12


def test_primitive_cache(basis3):
    assert primitive_matrices(basis3) is primitive_matrices(basis3)
