import warnings
from fractions import Fraction

import numpy as np
import pytest

from aperiodic.algebra import OrthogonalMap, ValidationError
from aperiodic.cutproject import ammann_beenker_scheme, fibonacci_scheme, generate, lattice_scheme, penrose_scheme
from aperiodic.equivalence import (
    DerivationRule,
    RuleInconsistencyError,
    canonical_patch,
    derive,
    extract_atlas,
    generalized_symmetry,
    is_locally_derivable,
    li_difference,
    li_equivalent,
    ltm_estimate,
    penrose_to_robinson,
    robinson_to_penrose,
)
from aperiodic.pattern import Ball, Box
from aperiodic.substitution import FIBONACCI_LENGTHS, get_rule, inflated_tiling, word_chain
from aperiodic.tiling import Tile
from aperiodic.zmodule import hnf_rows, is_unimodular_equivalent

G1 = (Fraction(1, 3), Fraction(2, 7))
G2 = (Fraction(5, 11), Fraction(1, 13))


@pytest.fixture(scope="module")
def robinson_patch():
    return inflated_tiling(get_rule("penrose-robinson"), 7)


def fib(gamma, hi=3000.0):
    return generate(fibonacci_scheme(), gamma, Box((0.0,), (hi,)))


def test_patch_is_translation_invariant():
    p = fib(G1)
    q = p.translated(np.array([3, 5]))
    i = len(p) // 2
    assert canonical_patch(p, i, 6.0) == canonical_patch(q, i, 6.0)


def test_fibonacci_members_are_li():
    assert li_equivalent(fib(G1), fib(G2), 8.0)
    assert len(extract_atlas(fib(G1), 8.0)) == len(extract_atlas(fib(G2), 8.0))


def test_periodic_chain_not_li():
    per = word_chain("ab" * 1200, FIBONACCI_LENGTHS)
    only_a, only_b = li_difference(fib(G1), per, 5.0)
    assert only_a > 0 and only_b > 0


def test_atlas_grows_with_radius():
    sizes = [len(extract_atlas(fib(G1), r)) for r in (2.0, 5.0, 10.0, 20.0)]
    assert sizes == sorted(sizes)
    with pytest.raises(ValidationError):
        extract_atlas(fib(G1), -1.0)


def test_region_too_small():
    with pytest.raises(ValidationError):
        extract_atlas(fib(G1, hi=10.0), 20.0)


def test_generalized_symmetry_square_lattice():
    z2 = generate(lattice_scheme(), None, Box((-20.0, -20.0), (20.0, 20.0)))
    assert generalized_symmetry(z2, OrthogonalMap.rotation(1, 4), 3.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert not generalized_symmetry(z2, OrthogonalMap.rotation(1, 8), 3.0)


def test_generalized_symmetry_ammann_beenker():
    p = generate(ammann_beenker_scheme(), tuple(Fraction(k, 53) for k in (1, 5, 9, 17)), Ball((0.0, 0.0), 20.0))
    assert generalized_symmetry(p, OrthogonalMap.rotation(1, 8), 1.5)


def test_round_trip_is_identity(robinson_patch):
    rhombs = robinson_to_penrose(robinson_patch)
    assert rhombs.is_valid()
    back = penrose_to_robinson(rhombs)
    assert back.tile_set() <= robinson_patch.tile_set()
    # every half whose partner exists comes back
    assert len(back) == 2 * len(rhombs)
    assert len(robinson_patch) - len(back) < 0.2 * len(robinson_patch)


def test_local_derivability_both_ways(robinson_patch):
    rhombs = robinson_to_penrose(robinson_patch)
    fwd = is_locally_derivable(robinson_patch, rhombs, 2.0)
    bwd = is_locally_derivable(rhombs, robinson_patch, 2.0)
    assert fwd and bwd
    assert fwd.pairs_checked > 100 and bwd.pairs_checked > 100


def test_inconsistent_rule_raises(robinson_patch):
    # one fixed triangle per centre, labelled by the centre: overlapping outputs disagree
    tri = ((0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0))
    rule = DerivationRule("clash", 1.0, lambda c, nb: [Tile(c.label, tri).translated(-np.array(c.vertices[0]))])
    with pytest.raises(RuleInconsistencyError):
        derive(rule, robinson_patch)


def test_ltm_square_lattice():
    z2 = generate(lattice_scheme(), None, Box((-15.0, -15.0), (15.0, 15.0)))
    for r in (1.0, 3.0, 6.0):
        est = ltm_estimate(z2, r)
        assert est.rank == 2
        assert is_unimodular_equivalent(est.basis, hnf_rows(np.eye(2, dtype=int)))


def test_ltm_fibonacci_rank_two():
    p = fib(G1, hi=5000.0)
    prev = None
    for r in (2.0, 5.0, 10.0):
        est = ltm_estimate(p, r)
        assert est.rank == 2 and not est.degenerate
        assert is_unimodular_equivalent(est.basis, hnf_rows([[1, 0], [0, 1]]))
        if prev is not None:
            assert all(prev.contains(v) for v in est.basis)
        prev = est


def test_derivation_commutes_with_rotation(robinson_patch):
    # the rhombus/half-triangle rule is equivariant under the tenfold rotation
    rhombs = robinson_to_penrose(robinson_patch)
    for p in (1, 3):
        a = penrose_to_robinson(rhombs.rotated(p, 10))
        b = penrose_to_robinson(rhombs).rotated(p, 10)
        assert a.tile_set() == b.tile_set()


def test_penrose_vertices_from_inflation_match_projection():
    rhombs = robinson_to_penrose(inflated_tiling(get_rule("penrose-robinson"), 9))
    cp = generate(penrose_scheme(), tuple(Fraction(k, 97) for k in (3, 11, 29, 41, 13)), Ball((0.0, 0.0), 25.0))
    for r in (1.0, 1.7):
        a, b = extract_atlas(rhombs.vertex_pattern(), r), extract_atlas(cp, r)
        assert len(a) > 50 and a == b
