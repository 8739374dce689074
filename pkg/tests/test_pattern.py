import math

import numpy as np
import pytest

from aperiodic.algebra import OrthogonalMap, ValidationError
from aperiodic.pattern import Ball, Box, Pattern, PolygonRegion, chain_pattern, region_from_string
from aperiodic.zmodule import golden_module, integer_module


def test_box_is_half_open():
    b = Box((0.0,), (1.0,))
    assert b.contains(np.array([[0.0], [0.999], [1.0]])).tolist() == [True, True, False]
    assert b.volume == 1.0


def test_region_parsing():
    assert isinstance(region_from_string("0:10"), Box)
    assert region_from_string("0:2,0:3").volume == 6.0
    ball = region_from_string("ball:0,0,2")
    assert isinstance(ball, Ball) and ball.volume == pytest.approx(4 * math.pi)
    with pytest.raises(ValidationError):
        region_from_string("0-1")


def test_polygon_region():
    sq = PolygonRegion(((0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)))
    assert sq.volume == pytest.approx(4.0)
    pts = np.array([[1.0, 1.0], [0.0, 0.0], [2.5, 1.0]])
    assert sq.contains(pts).tolist() == [True, True, False]
    assert sq.interior(pts, 0.5).tolist() == [True, False, False]
    assert sq.scaled(2.0).volume == pytest.approx(16.0)


def test_rotated_box_becomes_polygon():
    b = Box((-1.0, -1.0), (1.0, 1.0))
    r = b.rotated(OrthogonalMap.rotation(1, 8))
    assert r.volume == pytest.approx(4.0)
    assert r.contains(np.array([[1.3, 0.0]]))[0]


def test_pattern_rejects_coincident_points():
    with pytest.raises(ValidationError):
        Pattern(np.array([[0.0], [0.0]]), Box((0.0,), (1.0,)))


def test_pattern_density_and_distance():
    z = integer_module(1)
    keys = np.arange(10)[:, None]
    p = Pattern(keys.astype(float), Box((0.0,), (10.0,)), keys=keys, module=z)
    assert p.density == pytest.approx(1.0)
    assert p.min_distance() == pytest.approx(1.0)


def test_chain_pattern_gaps():
    p = chain_pattern([(0, 1), (1, 0), (0, 1), (0, 1), (1, 0)], golden_module(), region=Box((0.0,), (100.0,)))
    gaps = np.diff(p.positions[:, 0])
    tau = (1 + math.sqrt(5)) / 2
    assert set(np.round(gaps, 9)) <= {1.0, round(tau, 9)}


def test_pattern_translate_and_rotate():
    z = integer_module(2)
    keys = np.array([[0, 0], [1, 0], [0, 1]])
    p = Pattern(keys.astype(float), Box((-2.0, -2.0), (2.0, 2.0)), keys=keys, module=z)
    q = p.rotated(OrthogonalMap.rotation(1, 4))
    assert np.allclose(sorted(map(tuple, np.round(q.positions, 12))), sorted([(0, 0), (0, 1), (-1, 0)]))
    t = p.translated(np.array([1, 1]))
    assert np.allclose(t.positions.min(axis=0), [1, 1])
