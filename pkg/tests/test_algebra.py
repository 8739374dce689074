import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from aperiodic.algebra import (
    SQRT2,
    TAU,
    Lattice,
    OrthogonalMap,
    QuadraticInt,
    UnsupportedDimensionError,
    ValidationError,
    crystallographic_orders,
    dual_lattice,
    euler_totient,
    gram_product,
    is_crystallographic_rotation,
    min_embedding_dim,
)

ints = st.integers(-10**6, 10**6)
rings = st.sampled_from(["tau", "sqrt2"])


@st.composite
def pairs(draw):
    ring = draw(rings)
    return QuadraticInt(draw(ints), draw(ints), ring), QuadraticInt(draw(ints), draw(ints), ring)


def test_golden_relation():
    assert TAU * TAU == TAU + 1
    assert TAU.conj() == 1 - TAU
    assert TAU.norm() == -1
    assert SQRT2 * SQRT2 == 2


def test_unit_inverse_is_integral():
    inv = 1 / TAU
    assert inv == TAU - 1
    assert inv.is_integral


@given(pairs())
def test_conjugation_is_ring_homomorphism(p):
    x, y = p
    assert (x + y).conj() == x.conj() + y.conj()
    assert (x * y).conj() == x.conj() * y.conj()


@given(pairs())
def test_norm_multiplicative(p):
    x, y = p
    assert (x * y).norm() == x.norm() * y.norm()


@given(pairs())
def test_exact_order_agrees_with_high_precision(p):
    x, y = p
    diff = (x - y).mp(80)
    if diff != 0:
        assert (x < y) == (diff < 0)
    else:
        assert x == y


@given(pairs())
def test_division_roundtrip(p):
    x, y = p
    if y:
        assert (x / y) * y == x


def test_sign_of_near_cancellation():
    # F(n+1) - F(n) tau is tiny with alternating sign
    a, b = 832040, 514229  # F30, F29
    v = QuadraticInt(a, -b)
    assert v.sign() == int(np.sign(float(v.mp(60))))
    assert QuadraticInt(0, 0).sign() == 0


def test_rejects_mixed_rings_and_floats():
    with pytest.raises(ValueError):
        TAU + SQRT2
    with pytest.raises(TypeError):
        QuadraticInt(0.5, 1)


def test_float_value():
    assert float(QuadraticInt(2, 3)) == pytest.approx(2 + 3 * (1 + math.sqrt(5)) / 2)


# ------------------------------------------------------------- lattices


def test_integer_lattice_self_dual():
    z2 = Lattice.integer(2)
    assert dual_lattice(z2).same_lattice(z2)
    assert z2.covolume == 1


def test_dual_of_scaled_lattice():
    L = Lattice(((2, 0), (0, 3)))
    D = dual_lattice(L)
    assert D.covolume == Fraction(1, 6)
    assert gram_product(L, D) == [[1, 0], [0, 1]]


lattice_rows = st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=3, max_size=3)


@given(lattice_rows)
@settings(max_examples=60)
def test_dual_of_dual(rows):
    if sympy.Matrix(rows).det() == 0:
        return
    L = Lattice(tuple(map(tuple, rows)))
    assert dual_lattice(dual_lattice(L)).same_lattice(L)
    g = gram_product(L, dual_lattice(L))
    assert g == [[int(i == j) for j in range(3)] for i in range(3)]


def test_quadratic_lattice_entries():
    L = Lattice(((1, TAU), (0, 1)))
    assert L.covolume == 1
    D = dual_lattice(L)
    assert gram_product(L, D) == [[1, 0], [0, 1]]


def test_degenerate_basis_rejected():
    with pytest.raises(ValidationError):
        Lattice(((1, 2), (2, 4)))


def test_change_of_basis_same_lattice():
    assert Lattice(((1, 1), (0, 1))).same_lattice(Lattice.integer(2))
    assert not Lattice(((2, 0), (0, 1))).same_lattice(Lattice.integer(2))


# ------------------------------------------------------------- symmetry


def test_crystallographic_orders():
    assert crystallographic_orders(2) == {1, 2, 3, 4, 6}
    assert crystallographic_orders(3) == {1, 2, 3, 4, 6}
    with pytest.raises(UnsupportedDimensionError):
        crystallographic_orders(4)


def test_rotation_classification_float_path():
    m = OrthogonalMap(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert is_crystallographic_rotation(m)
    c, s = math.cos(2 * math.pi / 5), math.sin(2 * math.pi / 5)
    assert not is_crystallographic_rotation(OrthogonalMap(np.array([[c, -s], [s, c]])))


def test_rotation_in_3d():
    m = OrthogonalMap(np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]))
    assert is_crystallographic_rotation(m)


def test_non_orthogonal_rejected():
    with pytest.raises(ValidationError):
        OrthogonalMap(np.array([[1.0, 1.0], [0.0, 1.0]]))


@pytest.mark.parametrize("n", range(1, 60))
def test_totient_matches_sympy(n):
    assert euler_totient(n) == int(sympy.totient(n))


def test_embedding_dimensions():
    assert [min_embedding_dim(n) for n in (5, 8, 10, 12)] == [4, 4, 4, 4]
    assert min_embedding_dim(7) == 6
    assert min_embedding_dim("icosahedral") == 6
