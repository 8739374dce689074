"""Finite point configurations with exact module coordinates."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .algebra import OrthogonalMap, ValidationError
from .zmodule import CoordinateModule

FLOAT_KEY_TOL = 1e-9


class Region:
    dim: int

    def contains(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def interior(self, points: np.ndarray, margin: float) -> np.ndarray:
        """Points whose closed ``margin``-ball lies inside the region."""
        raise NotImplementedError

    @property
    def volume(self) -> float:
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def translated(self, v) -> Region:
        raise NotImplementedError

    def rotated(self, rot: OrthogonalMap) -> Region:
        raise NotImplementedError


@dataclass(frozen=True)
class Box(Region):
    """Half-open axis-aligned box [lo, hi)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(x) for x in np.atleast_1d(self.lo))
        hi = tuple(float(x) for x in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or any(a > b for a, b in zip(lo, hi)):
            raise ValidationError(f"bad box bounds {lo} {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, points):
        p = np.atleast_2d(points)
        return np.all((p >= self.lo) & (p < self.hi), axis=1)

    def interior(self, points, margin):
        p = np.atleast_2d(points)
        lo = np.array(self.lo) + margin
        hi = np.array(self.hi) - margin
        return np.all((p >= lo) & (p <= hi), axis=1)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def bounds(self):
        return np.array(self.lo), np.array(self.hi)

    def translated(self, v):
        v = np.atleast_1d(v)
        return Box(tuple(np.add(self.lo, v)), tuple(np.add(self.hi, v)))

    def shrunk(self, margin: float) -> Box:
        return Box(tuple(np.add(self.lo, margin)), tuple(np.subtract(self.hi, margin)))

    def rotated(self, rot):
        m = rot.matrix
        if np.allclose(np.abs(m), np.eye(len(m))):
            corners = np.array([self.lo, self.hi]) @ m.T
            return Box(tuple(corners.min(axis=0)), tuple(corners.max(axis=0)))
        if self.dim == 2:
            (x0, y0), (x1, y1) = self.lo, self.hi
            return PolygonRegion(tuple(map(tuple, rot.apply(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])).tolist())))
        raise ValidationError("general rotations are supported for planar boxes and balls only")


@dataclass(frozen=True)
class Ball(Region):
    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(x) for x in np.atleast_1d(self.center)))
        if self.radius <= 0:
            raise ValidationError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains(self, points):
        p = np.atleast_2d(points)
        return np.linalg.norm(p - self.center, axis=1) < self.radius

    def interior(self, points, margin):
        p = np.atleast_2d(points)
        return np.linalg.norm(p - self.center, axis=1) + margin <= self.radius

    @property
    def volume(self) -> float:
        d = self.dim
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * self.radius**d

    def bounds(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def translated(self, v):
        return Ball(tuple(np.add(self.center, v)), self.radius)

    def rotated(self, rot):
        return Ball(tuple(rot.apply(np.array(self.center)[None])[0]), self.radius)


@dataclass(frozen=True)
class PolygonRegion(Region):
    """Convex polygon (counterclockwise vertices), closed."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValidationError("polygon region needs at least 3 planar vertices")
        x, y = v[:, 0], v[:, 1]
        if np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)) <= 0:
            v = v[::-1]
        object.__setattr__(self, "vertices", tuple(map(tuple, v.tolist())))

    dim = 2

    def _signed(self, points) -> np.ndarray:
        p = np.atleast_2d(points)
        v = np.asarray(self.vertices)
        e = np.roll(v, -1, axis=0) - v
        n = np.stack([e[:, 1], -e[:, 0]], axis=1) / np.linalg.norm(e, axis=1)[:, None]
        # distance inside each edge line (positive inside)
        return -((p[:, None, :] - v[None]) * n[None]).sum(axis=2)

    def contains(self, points):
        return np.all(self._signed(points) >= -1e-12, axis=1)

    def interior(self, points, margin):
        return np.all(self._signed(points) >= margin, axis=1)

    @property
    def volume(self) -> float:
        v = np.asarray(self.vertices)
        return 0.5 * float(np.dot(v[:, 0], np.roll(v[:, 1], -1)) - np.dot(v[:, 1], np.roll(v[:, 0], -1)))

    def bounds(self):
        v = np.asarray(self.vertices)
        return v.min(axis=0), v.max(axis=0)

    def translated(self, v):
        return PolygonRegion(tuple(map(tuple, (np.asarray(self.vertices) + v).tolist())))

    def rotated(self, rot):
        return PolygonRegion(tuple(map(tuple, rot.apply(np.asarray(self.vertices)).tolist())))

    def scaled(self, factor: float) -> PolygonRegion:
        return PolygonRegion(tuple(map(tuple, (np.asarray(self.vertices) * factor).tolist())))


def region_from_string(text: str) -> Region:
    """Parse ``a:b`` (1D), ``a:b,c:d`` (box) or ``ball:x,y,r``."""
    text = text.strip()
    if text.startswith("ball:"):
        vals = [float(v) for v in text[5:].split(",")]
        return Ball(tuple(vals[:-1]), vals[-1])
    parts = [p.split(":") for p in text.split(",")]
    if any(len(p) != 2 for p in parts):
        raise ValidationError(f"cannot parse region {text!r}")
    return Box(tuple(float(a) for a, _ in parts), tuple(float(b) for _, b in parts))


@dataclass(frozen=True, eq=False)
class Pattern:
    """Finite point set.

    ``keys`` holds exact integer module coordinates of each point relative
    to ``origin`` (the physical image of the torus offset); ``positions`` is
    ``origin + keys @ module.embedding``.  Float-only patterns have no keys.
    """

    positions: np.ndarray
    region: Region
    keys: np.ndarray | None = None
    module: CoordinateModule | None = None
    preimages: np.ndarray | None = None
    origin: np.ndarray | None = None
    tag: str = "free-form"
    flags: frozenset = frozenset()
    metadata: dict = field(default_factory=dict)
    check_discrete: bool = True

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        if pos.size == 0:
            pos = pos.reshape(0, self.region.dim)
        object.__setattr__(self, "positions", pos)
        if self.keys is not None:
            k = np.asarray(self.keys, dtype=np.int64).reshape(len(pos), -1)
            object.__setattr__(self, "keys", k)
            if self.module is None:
                raise ValidationError("exact keys need a coordinate module")
        if self.preimages is not None:
            object.__setattr__(self, "preimages", np.asarray(self.preimages, dtype=np.int64).reshape(len(pos), -1))
        origin = np.zeros(pos.shape[1]) if self.origin is None else np.asarray(self.origin, dtype=float)
        object.__setattr__(self, "origin", origin)
        if self.check_discrete and len(pos) > 1:
            d, _ = cKDTree(pos).query(pos, k=2)
            r_min = float(d[:, 1].min())
            if r_min <= 1e-12:
                raise ValidationError("pattern is not uniformly discrete (coincident points)")

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def exact(self) -> bool:
        return self.keys is not None

    @property
    def density(self) -> float:
        return len(self) / self.region.volume

    def min_distance(self) -> float:
        if len(self) < 2:
            return math.inf
        d, _ = cKDTree(self.positions).query(self.positions, k=2)
        return float(d[:, 1].min())

    def translation_keys(self) -> np.ndarray:
        """Exact coordinates when available, else positions quantized at 1e-9."""
        if self.keys is not None:
            return self.keys
        warnings.warn("float-only pattern: comparing coordinates with tolerance 1e-9", stacklevel=2)
        return np.round(self.positions / FLOAT_KEY_TOL).astype(np.int64)

    def key_set(self) -> frozenset:
        return frozenset(map(tuple, self.translation_keys().tolist()))

    def translated(self, v) -> Pattern:
        """Shift by a float vector, or by an exact module vector when ``v`` is integer coords."""
        v = np.asarray(v)
        if self.keys is not None and v.dtype.kind in "iu" and v.shape == (self.keys.shape[1],):
            shift = self.module.to_float(v)
            return replace(
                self,
                positions=self.positions + shift,
                keys=self.keys + v,
                region=self.region.translated(shift),
                preimages=None,
            )
        v = v.astype(float)
        return replace(self, positions=self.positions + v, origin=self.origin + v, region=self.region.translated(v))

    def rotated(self, rot: OrthogonalMap) -> Pattern:
        """Apply an orthogonal map; exact when it lies in the module's rotation group."""
        region = self.region.rotated(rot)
        positions = rot.apply(self.positions)
        origin = rot.apply(self.origin[None])[0]
        mat = None
        if self.keys is not None and rot.exact is not None:
            mat = self.module.rotation_matrix(*rot.exact)
        if mat is not None:
            keys = self.keys @ mat.T
            return replace(self, positions=positions, keys=keys, origin=origin, region=region, preimages=None)
        return replace(self, positions=positions, keys=None, module=None, origin=origin, region=region, preimages=None)

    def restricted(self, region: Region) -> Pattern:
        m = region.contains(self.positions)
        return replace(
            self,
            positions=self.positions[m],
            keys=None if self.keys is None else self.keys[m],
            preimages=None if self.preimages is None else self.preimages[m],
            region=region,
            check_discrete=False,
        )

    def sorted(self) -> Pattern:
        cols = [self.positions[:, i] for i in reversed(range(self.dim))]
        if self.preimages is not None:
            cols = [self.preimages[:, i] for i in reversed(range(self.preimages.shape[1]))] + cols
        order = np.lexsort(cols) if len(self) else np.arange(0)
        return replace(
            self,
            positions=self.positions[order],
            keys=None if self.keys is None else self.keys[order],
            preimages=None if self.preimages is None else self.preimages[order],
            check_discrete=False,
        )


def chain_pattern(gaps_ab, module: CoordinateModule, start=(0, 0), region=None, tag="free-form") -> Pattern:
    """Points of a 1D chain in Z[tau] from a gap sequence of module vectors."""
    steps = np.asarray(gaps_ab, dtype=np.int64)
    keys = np.vstack([np.asarray(start, dtype=np.int64)[None], np.asarray(start) + np.cumsum(steps, axis=0)])
    pos = module.to_float(keys)
    if region is None:
        region = Box((float(pos.min()),), (float(pos.max()) + 1e-9,))
    return Pattern(pos, region, keys=keys, module=module, tag=tag).restricted(region)
