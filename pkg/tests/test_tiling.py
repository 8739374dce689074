import math

import numpy as np
import pytest

from aperiodic.substitution import get_rule, inflated_tiling, periodic_rhomb_tiling, square_tiling
from aperiodic.tiling import KEY_SCALE, Tile, TilingConfig, exact_area2


@pytest.fixture(scope="module")
def robinson():
    return get_rule("penrose-robinson")


def test_anchor_is_scaled_vertex_mean():
    t = Tile("square", ((0, 0), (1, 0), (1, 1), (0, 1)))
    assert t.anchor == (6, 6)
    assert np.allclose(np.array(t.anchor) / KEY_SCALE, [0.5, 0.5])


def test_shape_is_translation_invariant():
    t = Tile("thin-half", ((0, 0, 0, 0), (1, 0, 0, 0), (0, 0, 0, -1)))
    assert t.translated((3, -1, 2, 5)).shape == t.shape
    assert t.translated((3, -1, 2, 5)).anchor != t.anchor


def test_exact_areas_of_robinson_halves(robinson):
    m = robinson.module
    for label, angle in (("thick-half", 2 * math.pi / 5), ("thin-half", math.pi / 5)):
        a = exact_area2(m, robinson.prototiles[label])
        # 4i * area embedded in the plane: imaginary part carries the value
        val = m.to_float(a)
        assert abs(val[1]) / 4 == pytest.approx(0.5 * math.sin(angle), rel=1e-12)
        assert abs(val[0]) < 1e-12


def test_inflated_tiling_is_valid(robinson):
    t = inflated_tiling(robinson, 5)
    assert t.is_valid()
    assert t.area() == pytest.approx(t.region.volume, rel=1e-9)


def test_overlap_detected(robinson):
    t = inflated_tiling(robinson, 2)
    doubled = TilingConfig(t.tiles + t.tiles[:1], t.module, t.region)
    assert not doubled.is_valid()


def test_rotation_preserves_tiling(robinson):
    t = inflated_tiling(robinson, 4)
    r = t.rotated(1, 10)
    assert r.is_valid()
    assert r.area() == pytest.approx(t.area())
    assert r.region.volume == pytest.approx(t.region.volume)


def test_reference_tilings():
    assert periodic_rhomb_tiling(4).is_valid()
    sq = square_tiling(5)
    assert sq.is_valid() and len(sq) == 25 and sq.area() == pytest.approx(25.0)


def test_records_and_vertices(robinson):
    t = inflated_tiling(robinson, 3)
    rec = list(t.records())
    assert len(rec) == len(t)
    assert {r["label"] for r in rec} <= {"thick-half", "thin-half"}
    assert all(0 <= r["rotation"] < 10 for r in rec)
    vp = t.vertex_pattern()
    assert len(vp) == len(t.vertex_keys())
