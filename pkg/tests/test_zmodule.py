import itertools
import math
from functools import reduce

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from aperiodic.zmodule import (
    golden_module,
    hnf_rows,
    in_span,
    integer_module,
    is_unimodular_equivalent,
    octagonal_module,
    pentagonal_module,
    pentagonal_multiplier,
)

vec4 = st.lists(st.integers(-20, 20), min_size=4, max_size=4)


def _complex(module, u):
    p = module.to_float(np.array(u))
    return complex(p[0], p[1])


@pytest.mark.parametrize("module", [octagonal_module(), pentagonal_module(), integer_module(2)], ids=lambda m: m.name)
def test_rotation_generator_has_right_order(module):
    g = module.rotation_generator
    m = np.eye(module.rank, dtype=np.int64)
    for _ in range(module.rotation_order):
        m = g @ m
    assert np.array_equal(m, np.eye(module.rank, dtype=np.int64))


def test_rotation_matrix_availability():
    oct_ = octagonal_module()
    assert oct_.rotation_matrix(1, 8) is not None
    assert oct_.rotation_matrix(1, 5) is None
    pen = pentagonal_module()
    v = np.array([1, 0, 0, 0])
    rot = pen.rotation_matrix(1, 10) @ v
    assert np.allclose(pen.to_float(rot), [math.cos(math.pi / 5), math.sin(math.pi / 5)])


@given(vec4, vec4)
@settings(max_examples=80)
def test_cyclotomic_product_matches_complex(u, w):
    for module in (octagonal_module(), pentagonal_module()):
        prod = module.multiply(u, w)
        assert _complex(module, prod) == pytest.approx(_complex(module, u) * _complex(module, w), abs=1e-6)
        assert _complex(module, module.conjugate(u)) == pytest.approx(_complex(module, u).conjugate(), abs=1e-9)


@given(vec4, vec4)
@settings(max_examples=50)
def test_area_element_is_twice_i_cross(u, w):
    module = pentagonal_module()
    a = _complex(module, module.area2(u, w))
    zu, zw = _complex(module, u), _complex(module, w)
    cross = zu.real * zw.imag - zu.imag * zw.real
    assert a == pytest.approx(2j * cross, abs=1e-6)


def test_golden_multiplier_on_pentagonal_module():
    tau = (1 + math.sqrt(5)) / 2
    pen = pentagonal_module()
    v = np.array([2, -1, 0, 3])
    assert np.allclose(pen.to_float(pentagonal_multiplier(0, 1) @ v), tau * pen.to_float(v))


def test_golden_module_embedding():
    g = golden_module()
    assert g.to_float(np.array([[1, 1]]))[0, 0] == pytest.approx(1 + (1 + math.sqrt(5)) / 2)


def _gcd_of_minors(rows):
    m = sympy.Matrix(rows)
    r = m.rank()
    minors = [m.extract(list(ri), list(ci)).det() for ri in itertools.combinations(range(m.rows), r) for ci in itertools.combinations(range(m.cols), r)]
    return r, abs(reduce(sympy.gcd, minors))


gens = st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=5)


@given(gens)
@settings(max_examples=80)
def test_hnf_spans_same_module(rows):
    if not any(any(r) for r in rows):
        return
    h = hnf_rows(rows)
    for r in rows:
        assert in_span(h, r)
    r, g = _gcd_of_minors(rows)
    assert len(h) == r
    # the HNF basis has the same elementary-divisor content as the generators
    assert _gcd_of_minors(h.tolist()) == (r, g)


def test_unimodular_equivalence():
    a = np.array([[1, 0], [0, 1]])
    b = np.array([[1, 1], [0, 1]])
    assert is_unimodular_equivalent(hnf_rows(a), hnf_rows(b))
    assert not is_unimodular_equivalent(hnf_rows(a), hnf_rows([[2, 0], [0, 1]]))


def test_hnf_of_zero_rows():
    assert hnf_rows([[0, 0]]).shape == (0, 2)
