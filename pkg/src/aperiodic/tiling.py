"""Tilings with exact vertex coordinates in a coordinate module."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import ValidationError
from .pattern import Pattern, PolygonRegion, Region
from .zmodule import CoordinateModule

# anchors are vertex sums rescaled so that centroids of triangles, rhombs and
# squares are all integral
KEY_SCALE = 12

RHOMB_LABELS = ("thick", "thin")


@dataclass(frozen=True)
class Tile:
    """Labelled polygon; ``vertices`` are integer module coordinates.

    Vertex order carries the decoration.  Triangles are (apex, B, C);
    rhombs are (B, C, A, A') where BC is the bisecting diagonal.
    """

    label: str
    vertices: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(tuple(int(x) for x in v) for v in self.vertices))

    @property
    def anchor(self) -> tuple[int, ...]:
        n = len(self.vertices)
        s = np.sum(self.vertices, axis=0) * (KEY_SCALE // n)
        return tuple(int(x) for x in s)

    @property
    def shape(self) -> tuple:
        """Translation-invariant description relative to the anchor."""
        a = np.array(self.anchor)
        rel = np.array(self.vertices) * KEY_SCALE - a
        return (self.label, tuple(map(tuple, rel.tolist())))

    def outline(self) -> tuple[tuple[int, ...], ...]:
        """Boundary cycle of the polygon."""
        if self.label in RHOMB_LABELS:
            b, c, a, a2 = self.vertices
            return (a, b, a2, c)
        return self.vertices

    def translated(self, v) -> Tile:
        v = np.asarray(v, dtype=np.int64)
        return Tile(self.label, tuple(map(tuple, (np.array(self.vertices) + v).tolist())))

    def transformed(self, matrix: np.ndarray) -> Tile:
        m = np.asarray(matrix, dtype=np.int64)
        return Tile(self.label, tuple(map(tuple, (np.array(self.vertices) @ m.T).tolist())))


@dataclass(frozen=True, eq=False)
class TilingConfig:
    """Finite set of placed tiles.

    ``region`` is the area known to be covered; ``margin`` widens the
    completeness test for patches near its boundary.
    """

    tiles: tuple[Tile, ...]
    module: CoordinateModule
    region: Region | None = None
    margin: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tiles", tuple(self.tiles))

    def __len__(self) -> int:
        return len(self.tiles)

    def counts(self) -> Counter:
        return Counter(t.label for t in self.tiles)

    def anchors(self) -> np.ndarray:
        if not self.tiles:
            return np.zeros((0, self.module.rank), dtype=np.int64)
        return np.array([t.anchor for t in self.tiles], dtype=np.int64)

    def positions(self) -> np.ndarray:
        return self.module.to_float(self.anchors()) / KEY_SCALE

    def polygon(self, tile: Tile) -> np.ndarray:
        return self.module.to_float(np.array(tile.outline()))

    def area(self) -> float:
        total = 0.0
        for t in self.tiles:
            v = self.polygon(t)
            total += abs(_shoelace(v))
        return total

    def vertex_keys(self) -> np.ndarray:
        keys = {v for t in self.tiles for v in t.outline()}
        return np.array(sorted(keys), dtype=np.int64)

    def vertex_pattern(self, region: Region | None = None) -> Pattern:
        keys = self.vertex_keys()
        region = region or self.region
        if region is None:
            raise ValidationError("tiling has no region")
        pos = self.module.to_float(keys)
        p = Pattern(pos, region, keys=keys, module=self.module, tag="tiling-vertices")
        return p.restricted(region)

    def translated(self, v) -> TilingConfig:
        v = np.asarray(v, dtype=np.int64)
        shift = self.module.to_float(v)
        region = None if self.region is None else self.region.translated(shift)
        return replace(self, tiles=tuple(t.translated(v) for t in self.tiles), region=region)

    def rotated(self, p: int, q: int) -> TilingConfig:
        m = self.module.rotation_matrix(p, q)
        if m is None:
            raise ValidationError(f"rotation 2*pi*{p}/{q} is not exact in module {self.module.name}")
        from .algebra import OrthogonalMap

        region = None if self.region is None else self.region.rotated(OrthogonalMap.rotation(p, q))
        return replace(self, tiles=tuple(t.transformed(m) for t in self.tiles), region=region)

    def restricted(self, region: Region, margin: float = 0.0) -> TilingConfig:
        keep = region.interior(self.positions(), margin) if margin else region.contains(self.positions())
        return replace(self, tiles=tuple(t for t, k in zip(self.tiles, keep) if k), region=region)

    def tile_set(self) -> frozenset:
        return frozenset(self.tiles)

    def is_valid(self, tol: float = 1e-9) -> bool:
        """Edge-to-edge consistency: every directed boundary edge occurs at most once
        (all outlines counterclockwise) and the angle sum at every vertex is at most 2 pi."""
        directed = set()
        angle = Counter()
        for t in self.tiles:
            cyc = list(t.outline())
            v = self.polygon(t)
            if _shoelace(v) < 0:
                cyc, v = cyc[::-1], v[::-1]
            for i in range(len(cyc)):
                e = (cyc[i], cyc[(i + 1) % len(cyc)])
                if e in directed:
                    return False
                directed.add(e)
                a, b, c = v[i - 1], v[i], v[(i + 1) % len(v)]
                u, w = a - b, c - b
                angle[cyc[i]] += math.acos(max(-1.0, min(1.0, float(u @ w) / (np.linalg.norm(u) * np.linalg.norm(w)))))
        return all(s <= 2 * math.pi + tol for s in angle.values())

    def rotation_index(self, tile: Tile) -> int:
        """Direction of the first edge in units of the module's rotation angle."""
        order = self.module.rotation_order or 1
        v = self.module.to_float(np.array(tile.vertices[:2]))
        d = v[1] - v[0]
        return int(round(math.atan2(d[1], d[0]) / (2 * math.pi / order))) % order

    def records(self):
        """Export rows: label, rotation index, anchor numerators, common denominator, vertices."""
        for t in self.tiles:
            yield {
                "label": t.label,
                "rotation": self.rotation_index(t),
                "translation_numerators": list(t.anchor),
                "denominator": KEY_SCALE,
                "vertices": [list(v) for v in t.vertices],
            }


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def exact_area2(module: CoordinateModule, tile: Tile) -> np.ndarray:
    """4i * signed area of a tile (2i * cross-product sum) as an exact ring element."""
    cyc = np.array(tile.outline(), dtype=np.int64)
    total = np.zeros(module.rank, dtype=np.int64)
    for i in range(1, len(cyc) - 1):
        total += module.area2(cyc[i] - cyc[0], cyc[i + 1] - cyc[0])
    return total


def polygon_region(module: CoordinateModule, keys) -> PolygonRegion:
    return PolygonRegion(tuple(map(tuple, module.to_float(np.asarray(keys)).tolist())))
