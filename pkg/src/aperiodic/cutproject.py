"""Cut-and-project construction of model sets.

A scheme is an embedding lattice Z^n with a physical projection (float) and
an internal projection known exactly over Z[tau] or Z[sqrt 2].  Points are
enumerated exhaustively inside (region x window bounding box) with a
Fincke-Pohst ellipsoid walk; window membership is then decided exactly
whenever the float test is within rounding distance of the boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy
from scipy.spatial import ConvexHull

from .algebra import QuadraticInt, TAU_FLOAT, SQRT2_FLOAT, ValidationError
from .pattern import Box, Pattern, Region
from .zmodule import CoordinateModule, golden_module, hnf_rows, in_span, integer_module, octagonal_module, pentagonal_module

_THETA = {"tau": TAU_FLOAT, "sqrt2": SQRT2_FLOAT}
EXACT_BAND = 1e-9


class UnsupportedWindowError(ValueError):
    pass


class ParameterClass(enum.Enum):
    REGULAR = "regular"
    SINGULAR = "singular"


@dataclass(frozen=True, eq=False)
class ExactLinearMap:
    """y_i = scale_i * ((A x)_i + (B x)_i * theta) with integer A, B.

    Scales are positive floats, so exact sign decisions can drop them.
    """

    ring: str
    A: np.ndarray
    B: np.ndarray
    scale: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", np.asarray(self.A, dtype=np.int64))
        object.__setattr__(self, "B", np.asarray(self.B, dtype=np.int64))
        object.__setattr__(self, "scale", tuple(float(s) for s in self.scale))
        if any(s <= 0 for s in self.scale):
            raise ValidationError("scales must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.scale)[:, None] * (self.A + _THETA[self.ring] * self.B)

    @property
    def out_dim(self) -> int:
        return self.A.shape[0]

    def exact(self, x: Sequence) -> tuple[QuadraticInt, ...]:
        """Unscaled exact coordinates of a (rational) vector."""
        out = []
        for i in range(self.out_dim):
            a = sum((int(c) * v for c, v in zip(self.A[i], x) if c), 0)
            b = sum((int(c) * v for c, v in zip(self.B[i], x) if c), 0)
            out.append(QuadraticInt(a, b, self.ring))
        return tuple(out)

    def unscale(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y) / np.asarray(self.scale)


# ------------------------------------------------------------------ windows


class Window:
    ring: str
    dim: int

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def measure(self) -> float:
        raise NotImplementedError

    def classify(self, exact_pts: list[tuple], float_pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(inside, on_boundary) masks; float_pts are unscaled coordinates."""
        raise NotImplementedError

    def fourier(self, q: np.ndarray) -> complex:
        """Integral of exp(2*pi*i q.y) over the window (q in scaled internal coordinates)."""
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        lo, hi = self.bounds()
        return float(np.linalg.norm(hi - lo))


@dataclass(frozen=True, eq=False)
class IntervalWindow(Window):
    """Half-open interval [lo, hi) with endpoints in the ring."""

    lo: QuadraticInt
    hi: QuadraticInt
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValidationError("interval window needs lo < hi")

    ring = property(lambda self: self.lo.ring)
    dim = 1

    def bounds(self):
        return np.array([float(self.lo) * self.scale]), np.array([float(self.hi) * self.scale])

    @property
    def measure(self) -> float:
        return float(self.hi - self.lo) * self.scale

    @property
    def vertices(self):
        return [(self.lo,), (self.hi,)]

    def classify(self, exact_pts, float_pts):
        y = np.asarray(float_pts, dtype=float).reshape(-1)
        lo, hi = float(self.lo), float(self.hi)
        inside = (y >= lo) & (y < hi)
        on = np.zeros(len(y), dtype=bool)
        band = (np.abs(y - lo) < EXACT_BAND * (1 + abs(lo))) | (np.abs(y - hi) < EXACT_BAND * (1 + abs(hi)))
        for i in np.flatnonzero(band):
            v = exact_pts(i)[0]
            inside[i] = self.lo <= v < self.hi
            on[i] = v == self.lo or v == self.hi
        return inside, on

    def fourier(self, q):
        return complex(self.fourier_many(np.reshape(q, (1, 1)))[0])

    def fourier_many(self, qs: np.ndarray) -> np.ndarray:
        q = np.asarray(qs, dtype=float).reshape(-1)
        lo, hi = self.bounds()
        lo, hi = float(lo[0]), float(hi[0])
        w = hi - lo
        x = np.pi * q * w
        small = np.abs(x) < 1e-6
        sinc = np.where(small, 1.0 - x * x / 6, np.sin(x) / np.where(small, 1.0, x))
        return np.exp(1j * np.pi * q * (hi + lo)) * w * sinc


@dataclass(frozen=True, eq=False)
class PolygonWindow(Window):
    """Convex polygon, counterclockwise, exact unscaled vertex coordinates.

    Boundary convention: a point on an edge belongs to the window iff the
    edge's inward normal points up, or exactly right (lower-left closed).
    """

    vertices: tuple[tuple[QuadraticInt, QuadraticInt], ...]
    scale: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        v = self.vertices
        if len(v) < 3:
            raise ValidationError("polygon window needs at least 3 vertices")
        for i in range(len(v)):
            if _cross(_sub(v[(i + 1) % len(v)], v[i]), _sub(v[(i + 2) % len(v)], v[(i + 1) % len(v)])).sign() <= 0:
                raise ValidationError("polygon window vertices must be strictly convex and counterclockwise")

    @classmethod
    def hull(cls, points: list[tuple[QuadraticInt, QuadraticInt]], scale=(1.0, 1.0)) -> PolygonWindow:
        """Convex hull of exact points (float ordering, exact pruning of collinear points)."""
        uniq = list(dict.fromkeys(points))
        f = np.array([[float(a), float(b)] for a, b in uniq])
        idx = ConvexHull(f * np.asarray(scale)).vertices
        verts = [uniq[i] for i in idx]
        changed = True
        while changed:
            changed = False
            for i in range(len(verts)):
                a, b, c = verts[i - 1], verts[i], verts[(i + 1) % len(verts)]
                if _cross(_sub(b, a), _sub(c, b)).sign() == 0:
                    verts.pop(i)
                    changed = True
                    break
        return cls(tuple(verts), tuple(scale))

    @property
    def ring(self) -> str:
        return self.vertices[0][0].ring

    dim = 2

    def float_vertices(self) -> np.ndarray:
        return np.array([[float(a), float(b)] for a, b in self.vertices]) * np.asarray(self.scale)

    def bounds(self):
        f = self.float_vertices()
        return f.min(axis=0), f.max(axis=0)

    @property
    def measure(self) -> float:
        f = self.float_vertices()
        x, y = f[:, 0], f[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def _edge_closed(self, i: int) -> bool:
        e = _sub(self.vertices[(i + 1) % len(self.vertices)], self.vertices[i])
        sx, sy = e[0].sign(), e[1].sign()
        return sx > 0 or (sx == 0 and sy < 0)

    def classify(self, exact_pts, float_pts):
        p = np.asarray(float_pts, dtype=float).reshape(-1, 2)
        fv = np.array([[float(a), float(b)] for a, b in self.vertices])
        nv = len(fv)
        inside = np.ones(len(p), dtype=bool)
        ambiguous = np.zeros(len(p), dtype=bool)
        for i in range(nv):
            a, b = fv[i], fv[(i + 1) % nv]
            e = b - a
            c = e[0] * (p[:, 1] - a[1]) - e[1] * (p[:, 0] - a[0])
            tol = EXACT_BAND * (1 + np.abs(p).sum(axis=1)) * (1 + np.abs(e).sum())
            inside &= c > -tol
            ambiguous |= np.abs(c) <= tol
        on = np.zeros(len(p), dtype=bool)
        closed = [self._edge_closed(i) for i in range(nv)]
        for k in np.flatnonzero(ambiguous & inside):
            q = exact_pts(k)
            ok, hit = True, False
            for i in range(nv):
                s = _cross(_sub(self.vertices[(i + 1) % nv], self.vertices[i]), _sub(q, self.vertices[i])).sign()
                if s < 0:
                    ok = False
                    break
                if s == 0:
                    hit = True
                    ok = ok and closed[i]
            if not ok:
                # still report boundary hits for points outside via an open edge
                hit = hit or _on_boundary(self.vertices, q)
            inside[k] = ok
            on[k] = hit
        return inside, on

    def fourier(self, q):
        return complex(self.fourier_many(np.reshape(q, (1, 2)))[0])

    def fourier_many(self, qs: np.ndarray) -> np.ndarray:
        """Edge-sum (divergence theorem) evaluation with series near removable singularities."""
        q = np.asarray(qs, dtype=float).reshape(-1, 2)
        v = self.float_vertices()
        qq = np.einsum("ij,ij->i", q, q)
        tiny = np.sqrt(qq) * self.diameter < 1e-6
        total = np.zeros(len(q), dtype=complex)
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            e = b - a
            length = float(np.hypot(*e))
            normal = np.array([e[1], -e[0]]) / length  # outward for CCW
            alpha = 2 * np.pi * (q @ e)
            small = np.abs(alpha) < 1e-6
            safe = np.where(small, 1.0, alpha)
            factor = np.where(small, 1 + 0.5j * alpha, (np.exp(1j * alpha) - 1) / (1j * safe))
            total += (q @ normal) * length * np.exp(2j * np.pi * (q @ a)) * factor
        out = total / (2j * np.pi * np.where(tiny, 1.0, qq))
        if tiny.any():
            # area + 2 pi i q . first moment
            area = self.measure
            c = _polygon_centroid(v)
            out[tiny] = area * (1 + 2j * np.pi * (q[tiny] @ c))
        return out


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _cross(u, w) -> QuadraticInt:
    return u[0] * w[1] - u[1] * w[0]


def _on_boundary(vertices, q) -> bool:
    n = len(vertices)
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        e = _sub(b, a)
        if _cross(e, _sub(q, a)).sign() != 0:
            continue
        d = _sub(q, a)
        t = d[0] * e[0] + d[1] * e[1]
        if t.sign() >= 0 and (t - (e[0] * e[0] + e[1] * e[1])).sign() <= 0:
            return True
    return False


def _polygon_centroid(v: np.ndarray) -> np.ndarray:
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    a = cr.sum() / 2
    return np.array([((x + xn) * cr).sum(), ((y + yn) * cr).sum()]) / (6 * a)


# ------------------------------------------------------------------ schemes


@dataclass(frozen=True, eq=False)
class Slice:
    """Coset of a sublattice carrying its own window.

    Lattice points are ``offset + basis @ y`` for integer y.  ``klass`` is
    the discrete class label (Penrose: sum of coordinates mod 5).
    """

    offset: np.ndarray
    basis: np.ndarray
    window: Window | None
    klass: int | None = None


@dataclass(frozen=True, eq=False)
class ProjectionScheme:
    name: str
    phys: np.ndarray
    internal: ExactLinearMap | None
    slices: tuple[Slice, ...]
    module: CoordinateModule
    module_map: np.ndarray
    class_modulus: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "phys", np.atleast_2d(np.asarray(self.phys, dtype=float)))
        object.__setattr__(self, "module_map", np.asarray(self.module_map, dtype=np.int64))
        if self.internal is not None:
            self._check_injective()

    @property
    def n(self) -> int:
        return self.phys.shape[1]

    @property
    def d(self) -> int:
        return self.phys.shape[0]

    def full_matrix(self) -> np.ndarray:
        if self.internal is None:
            return self.phys
        return np.vstack([self.phys, self.internal.matrix])

    def _check_injective(self) -> None:
        # no nonzero slice-lattice vector may have zero internal image
        for s in self.slices:
            m = self.internal.matrix @ s.basis
            ab = np.vstack([self.internal.A @ s.basis, self.internal.B @ s.basis])
            if np.linalg.matrix_rank(ab.astype(float)) < s.basis.shape[1]:
                raise ValidationError(f"scheme {self.name}: internal projection not injective")
            if np.linalg.matrix_rank(np.vstack([self.phys @ s.basis, m])) < s.basis.shape[1]:
                raise ValidationError(f"scheme {self.name}: projection not injective")

    def slice_covolume(self, s: Slice) -> float:
        return abs(float(np.linalg.det(self.full_matrix() @ s.basis)))

    @property
    def density(self) -> float:
        """vol(W)/covolume summed over slices (points per unit physical volume)."""
        return sum(
            (s.window.measure if s.window is not None else 1.0) / self.slice_covolume(s) for s in self.slices
        )

    def class_of(self, xg: np.ndarray) -> np.ndarray:
        return np.round(xg.sum(axis=-1)).astype(np.int64) % self.class_modulus

    def to_dict(self) -> dict:
        """Structured descriptor (JSON-ready)."""

        def qi(v):
            return [str(v.a), str(v.b)]

        slices = []
        for s in self.slices:
            w = s.window
            if w is None:
                wd = None
            elif isinstance(w, IntervalWindow):
                wd = {"type": "interval", "lo": qi(w.lo), "hi": qi(w.hi), "scale": w.scale}
            else:
                wd = {"type": "polygon", "vertices": [[qi(a), qi(b)] for a, b in w.vertices], "scale": list(w.scale)}
            slices.append({"class": s.klass, "offset": s.offset.tolist(), "basis": s.basis.tolist(), "window": wd})
        return {
            "name": self.name,
            "lattice_basis": np.eye(self.n, dtype=int).tolist(),
            "physical_rows": self.phys.tolist(),
            "internal": None
            if self.internal is None
            else {
                "ring": self.internal.ring,
                "A": self.internal.A.tolist(),
                "B": self.internal.B.tolist(),
                "scale": list(self.internal.scale),
            },
            "class_modulus": self.class_modulus,
            "slices": slices,
            "module": self.module.name,
            "module_map": self.module_map.tolist(),
            "metadata": self.metadata,
        }


def scheme_from_dict(doc: dict, module: CoordinateModule | None = None) -> ProjectionScheme:
    internal = None
    ring = None
    if doc.get("internal"):
        ring = doc["internal"]["ring"]
        internal = ExactLinearMap(ring, doc["internal"]["A"], doc["internal"]["B"], doc["internal"]["scale"])

    def qi(pair):
        return QuadraticInt(Fraction(pair[0]), Fraction(pair[1]), ring)

    slices = []
    for s in doc["slices"]:
        wd = s["window"]
        if wd is None:
            w = None
        elif wd["type"] == "interval":
            w = IntervalWindow(qi(wd["lo"]), qi(wd["hi"]), wd.get("scale", 1.0))
        elif wd["type"] == "polygon":
            w = PolygonWindow(tuple((qi(a), qi(b)) for a, b in wd["vertices"]), tuple(wd["scale"]))
        else:
            raise UnsupportedWindowError(wd["type"])
        slices.append(Slice(np.array(s["offset"], dtype=np.int64), np.array(s["basis"], dtype=np.int64), w, s["class"]))
    if module is None:
        module = _MODULES.get(doc["module"], lambda: None)()
        if module is None:
            raise ValidationError(f"unknown module {doc['module']!r}")
    return ProjectionScheme(
        doc["name"],
        np.array(doc["physical_rows"]),
        internal,
        tuple(slices),
        module,
        np.array(doc["module_map"]),
        doc.get("class_modulus"),
        doc.get("metadata", {}),
    )


def fibonacci_scheme() -> ProjectionScheme:
    """Z^2 with slope 1/tau; internal map is Galois conjugation m + n*tau -> m + n*(1 - tau)."""
    internal = ExactLinearMap("tau", [[1, 1]], [[0, -1]], (1.0,))
    lo = QuadraticInt(1, -1, "tau")  # 1 - tau
    hi = QuadraticInt(1, 0, "tau")
    window = IntervalWindow(lo, hi)
    return ProjectionScheme(
        "fibonacci",
        np.array([[1.0, TAU_FLOAT]]),
        internal,
        (Slice(np.zeros(2, dtype=np.int64), np.eye(2, dtype=np.int64), window),),
        golden_module(),
        np.eye(2, dtype=np.int64),
    )


def ammann_beenker_scheme() -> ProjectionScheme:
    """Z^4, physical directions pi*j/4, internal directions 3*pi*j/4, both scaled by 1/sqrt2."""
    s = 1 / math.sqrt(2)
    phys = np.array([[math.cos(math.pi * j / 4) for j in range(4)], [math.sin(math.pi * j / 4) for j in range(4)]]) * s
    # 2 * s * (cos, sin)(3*pi*j/4) over Z[sqrt2], scale 1/2
    internal = ExactLinearMap("sqrt2", [[0, -1, 0, 1], [0, 1, 0, 1]], [[1, 0, 0, 0], [0, 0, -1, 0]], (0.5, 0.5))
    _assert_rows(internal, [[math.cos(3 * math.pi * j / 4) * s for j in range(4)], [math.sin(3 * math.pi * j / 4) * s for j in range(4)]])
    corners = [internal.exact(c) for c in _cube_corners(4)]
    window = PolygonWindow.hull(corners, internal.scale)
    return ProjectionScheme(
        "ammann-beenker",
        phys,
        internal,
        (Slice(np.zeros(4, dtype=np.int64), np.eye(4, dtype=np.int64), window),),
        octagonal_module(s),
        np.eye(4, dtype=np.int64),
        metadata={"edge_length": s},
    )


def penrose_scheme() -> ProjectionScheme:
    """Z^5 with classes sum(x) mod 5; class-k window is the projected k-slice of the unit cube.

    The fifth coordinate is redundant (the diagonal (1,1,1,1,1) projects to
    zero); points are indexed by the coset representative with the given
    coordinate sum.
    """
    phys = np.array([[math.cos(2 * math.pi * j / 5) for j in range(5)], [math.sin(2 * math.pi * j / 5) for j in range(5)]])
    sigma = math.sin(math.pi / 5)
    internal = ExactLinearMap(
        "tau",
        [[2, 0, -1, -1, 0], [0, 1, 0, 0, -1]],
        [[0, -1, 1, 1, -1], [0, 0, -1, 1, 0]],
        (0.5, sigma),
    )
    _assert_rows(internal, [[math.cos(4 * math.pi * j / 5) for j in range(5)], [math.sin(4 * math.pi * j / 5) for j in range(5)]])
    basis = np.zeros((5, 4), dtype=np.int64)
    for j in range(4):
        basis[j, j] = 1
        basis[4, j] = -1
    slices = []
    for k in range(1, 5):
        corners = [internal.exact(c) for c in _cube_corners(5) if sum(c) == k]
        window = PolygonWindow.hull(corners, internal.scale)
        offset = np.zeros(5, dtype=np.int64)
        offset[4] = k
        slices.append(Slice(offset, basis, window, k))
    module_map = np.hstack([np.eye(4, dtype=np.int64), -np.ones((4, 1), dtype=np.int64)])
    return ProjectionScheme(
        "penrose",
        phys,
        internal,
        tuple(slices),
        pentagonal_module(),
        module_map,
        class_modulus=5,
        metadata={
            "edge_length": 1.0,
            "indexing": "Z^5 with redundant diagonal; preimage is the representative with coordinate sum in 1..4",
        },
    )


def lattice_scheme(basis: np.ndarray | None = None) -> ProjectionScheme:
    """Crystal: all points of an integer lattice in the plane (no window)."""
    basis = np.eye(2) if basis is None else np.asarray(basis, dtype=float)
    n = basis.shape[0]
    return ProjectionScheme(
        "lattice",
        basis.T,
        None,
        (Slice(np.zeros(n, dtype=np.int64), np.eye(n, dtype=np.int64), None),),
        integer_module(n) if np.allclose(basis, np.eye(n)) else CoordinateModule(f"lattice{basis.tolist()}", basis),
        np.eye(n, dtype=np.int64),
    )


SCHEMES = {
    "fibonacci": fibonacci_scheme,
    "ammann-beenker": ammann_beenker_scheme,
    "penrose": penrose_scheme,
    "square": lattice_scheme,
}

_MODULES = {
    "Z[tau]": golden_module,
    "Z[zeta5]": pentagonal_module,
    "Z^2": lambda: integer_module(2),
    f"Z[zeta8]*{1 / math.sqrt(2):.12g}": lambda: octagonal_module(1 / math.sqrt(2)),
}


def _assert_rows(m: ExactLinearMap, rows) -> None:
    if not np.allclose(m.matrix, np.array(rows), atol=1e-12):
        raise AssertionError("exact internal map disagrees with its float definition")


def _cube_corners(n: int):
    for i in range(2**n):
        yield tuple((i >> j) & 1 for j in range(n))


# -------------------------------------------------------------- enumeration


def lattice_points_in_box(A: np.ndarray, a0: np.ndarray, lo: np.ndarray, hi: np.ndarray, slack: float = 1e-9) -> np.ndarray:
    """All integer y with lo <= A y + a0 <= hi (A square, invertible).

    The box is enclosed in the axis-aligned ellipsoid with semi-axes
    sqrt(m) * half-widths and integer points of that ellipsoid are listed
    by the Fincke-Pohst recursion; the float box filter is applied last.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[1]
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    c = (lo + hi) / 2
    h = (hi - lo) / 2 + slack * (1 + np.abs(c))
    G = A / (h * math.sqrt(m))[:, None]
    R = np.linalg.cholesky(G.T @ G).T
    yc = np.linalg.solve(A, c - a0)
    out: list[np.ndarray] = []
    z = np.zeros(m)
    y = np.zeros(m, dtype=np.int64)

    def walk(i: int, rem: float) -> None:
        t = float(R[i, i + 1 :] @ z[i + 1 :]) if i + 1 < m else 0.0
        r = math.sqrt(max(rem, 0.0)) + 1e-9
        lo_i = math.ceil(yc[i] + (-r - t) / R[i, i])
        hi_i = math.floor(yc[i] + (r - t) / R[i, i])
        if hi_i < lo_i:
            return
        if i == 0:
            block = np.zeros((hi_i - lo_i + 1, m), dtype=np.int64)
            block[:, 1:] = y[1:]
            block[:, 0] = np.arange(lo_i, hi_i + 1)
            out.append(block)
            return
        for v in range(lo_i, hi_i + 1):
            y[i] = v
            z[i] = v - yc[i]
            s = R[i, i] * z[i] + t
            walk(i - 1, rem - s * s)

    walk(m - 1, 1.0 + 1e-9)
    if not out:
        return np.zeros((0, m), dtype=np.int64)
    pts = np.vstack(out)
    img = pts @ A.T + a0
    ok = np.all((img >= lo - slack * (1 + np.abs(lo))) & (img <= hi + slack * (1 + np.abs(hi))), axis=1)
    return pts[ok]


# ------------------------------------------------------------- parameters


@dataclass(frozen=True)
class TorusParameter:
    """Offset gamma reduced into the half-open unit cell [0,1)^n.

    Entries are Fractions (exact) or floats (generic; no exact decisions).
    """

    offset: tuple

    def __post_init__(self) -> None:
        vals = []
        for v in self.offset:
            if isinstance(v, (int, Fraction)):
                f = Fraction(v)
                vals.append(f - math.floor(f))
            else:
                fv = float(v)
                vals.append(fv - math.floor(fv))
        object.__setattr__(self, "offset", tuple(vals))

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.offset)

    def as_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.offset])

    @classmethod
    def zero(cls, n: int) -> TorusParameter:
        return cls(tuple(Fraction(0) for _ in range(n)))


def torus_reduce(scheme: ProjectionScheme, t) -> TorusParameter:
    """Translation in embedding space modulo the lattice."""
    t = tuple(t)
    if len(t) != scheme.n:
        raise ValidationError(f"offset must have {scheme.n} components")
    return TorusParameter(t)


def _coerce_gamma(scheme, gamma) -> TorusParameter:
    if gamma is None:
        return TorusParameter.zero(scheme.n)
    if isinstance(gamma, TorusParameter):
        if len(gamma.offset) != scheme.n:
            raise ValidationError(f"offset must have {scheme.n} components")
        return gamma
    return torus_reduce(scheme, gamma)


def _slice_offset(scheme: ProjectionScheme, s: Slice, gamma: TorusParameter) -> np.ndarray:
    if s.klass is None:
        return s.offset
    g = sum(gamma.offset)
    if isinstance(g, float):
        if abs(g - round(g)) > 1e-9:
            raise ValidationError("class schemes need an offset with integral coordinate sum")
        g = round(g)
    elif Fraction(g).denominator != 1:
        raise ValidationError("class schemes need an offset with integral coordinate sum")
    off = s.offset.copy()
    off[-1] -= int(g)
    return off


def generate(scheme: ProjectionScheme, gamma=None, region: Region | None = None) -> Pattern:
    """Model set {P(x+gamma) : P_int(x+gamma) in W, P(x+gamma) in region}."""
    if region is None:
        raise ValidationError("a bounded region is required")
    if region.dim != scheme.d:
        raise ValidationError(f"region dimension {region.dim} != physical dimension {scheme.d}")
    gamma = _coerce_gamma(scheme, gamma)
    gf = gamma.as_float()
    rlo, rhi = region.bounds()
    pre_all, singular = [], False
    for s in scheme.slices:
        off = _slice_offset(scheme, s, gamma)
        if s.window is None:
            lo, hi = rlo, rhi
        else:
            wlo, whi = s.window.bounds()
            lo, hi = np.concatenate([rlo, wlo]), np.concatenate([rhi, whi])
        M = scheme.full_matrix()
        A = M @ s.basis
        a0 = M @ (off + gf)
        ys = lattice_points_in_box(A, a0, lo, hi)
        xs = off + ys @ s.basis.T
        pos = (xs + gf) @ scheme.phys.T
        keep = region.contains(pos)
        xs = xs[keep]
        if s.window is not None and len(xs):
            inside, on = _window_test(scheme, s.window, xs, gamma)
            singular |= bool(on.any())
            xs = xs[inside]
        pre_all.append(xs)
    pre = np.vstack(pre_all) if pre_all else np.zeros((0, scheme.n), dtype=np.int64)
    origin = scheme.phys @ gf
    keys = pre @ scheme.module_map.T
    pos = scheme.module.to_float(keys) + origin if len(pre) else np.zeros((0, scheme.d))
    flags = frozenset({"singular-parameter"}) if singular else frozenset()
    pattern = Pattern(
        pos,
        region,
        keys=keys,
        module=scheme.module,
        preimages=pre,
        origin=origin,
        tag=scheme.name,
        flags=flags,
        metadata={"gamma": [str(v) for v in gamma.offset], **scheme.metadata},
    )
    return pattern.sorted()


def _window_test(scheme: ProjectionScheme, window: Window, xs: np.ndarray, gamma: TorusParameter):
    internal = scheme.internal
    gf = gamma.as_float()
    yf = (xs + gf) @ (internal.A + _THETA[internal.ring] * internal.B).T
    if gamma.exact:
        gx = gamma.offset

        def exact_pt(i):
            return internal.exact([int(a) + b for a, b in zip(xs[i], gx)])

        return window.classify(exact_pt, yf)

    def float_only(i):
        raise _FloatFallback

    try:
        return window.classify(float_only, yf)
    except _FloatFallback:
        # generic float offset: boundary hits have measure zero; decide by float value
        return _float_classify(window, yf)


class _FloatFallback(Exception):
    pass


def _float_classify(window: Window, yf: np.ndarray):
    if isinstance(window, IntervalWindow):
        y = yf.reshape(-1)
        return (y >= float(window.lo)) & (y < float(window.hi)), np.zeros(len(y), dtype=bool)
    fv = np.array([[float(a), float(b)] for a, b in window.vertices])
    inside = np.ones(len(yf), dtype=bool)
    for i in range(len(fv)):
        a, b = fv[i], fv[(i + 1) % len(fv)]
        e = b - a
        inside &= e[0] * (yf[:, 1] - a[1]) - e[1] * (yf[:, 0] - a[0]) >= 0
    return inside, np.zeros(len(yf), dtype=bool)


# -------------------------------------------------------- regular/singular


def classify_parameter(scheme: ProjectionScheme, gamma) -> ParameterClass:
    """Singular iff some lattice translate of gamma meets a window boundary.

    Decided exactly for rational offsets.  For every slice and boundary
    feature (interval endpoint or polygon edge line) the incidence condition
    is a system of rational linear equations whose integer solvability is
    checked with a Hermite normal form; an edge line with a solution always
    has solutions on the edge itself because the parameter along the edge
    ranges over a rank-2 lattice coset in Q(theta), which is dense.
    Float offsets are declared regular by convention.
    """
    if scheme.internal is None:
        raise UnsupportedWindowError("scheme has no window")
    gamma = _coerce_gamma(scheme, gamma)
    if not gamma.exact:
        return ParameterClass.REGULAR
    internal = scheme.internal
    for s in scheme.slices:
        w = s.window
        if w is None:
            continue
        off = _slice_offset(scheme, s, gamma)
        c = internal.exact([int(a) + b for a, b in zip(off, gamma.offset)])
        # rational expansion of the internal map on the slice lattice
        cols = [internal.exact(list(s.basis[:, j])) for j in range(s.basis.shape[1])]
        A = sympy.Matrix([[_rat_part(cols[j][i], p) for j in range(len(cols))] for i in range(internal.out_dim) for p in (0, 1)])
        if A.rank() < A.shape[1] or A.shape[0] != A.shape[1]:
            raise UnsupportedWindowError("internal map on slice is not square over Q")
        Ainv = A.inv()
        if isinstance(w, IntervalWindow):
            for v in (w.lo, w.hi):
                rhs = sympy.Matrix([_rat_part(v - c[0], p) for p in (0, 1)])
                y = Ainv * rhs
                if all(val.is_integer for val in y):
                    return ParameterClass.SINGULAR
        elif isinstance(w, PolygonWindow):
            verts = w.vertices
            for i in range(len(verts)):
                a, b = verts[i], verts[(i + 1) % len(verts)]
                e = _sub(b, a)
                theta = QuadraticInt.theta(w.ring)
                base = sympy.Matrix([_rat_part(a[k] - c[k], p) for k in range(2) for p in (0, 1)])
                d1 = sympy.Matrix([_rat_part(e[k], p) for k in range(2) for p in (0, 1)])
                d2 = sympy.Matrix([_rat_part(e[k] * theta, p) for k in range(2) for p in (0, 1)])
                if _affine_has_integer_point(Ainv * base, Ainv * d1, Ainv * d2):
                    return ParameterClass.SINGULAR
        else:
            raise UnsupportedWindowError(type(w).__name__)
    return ParameterClass.REGULAR


def _rat_part(v: QuadraticInt, p: int):
    return sympy.Rational(str(Fraction(v.a if p == 0 else v.b)))


def _affine_has_integer_point(y0: sympy.Matrix, u: sympy.Matrix, w: sympy.Matrix) -> bool:
    """Is Z^m met by y0 + span_Q(u, w)?"""
    T = sympy.Matrix.hstack(u, w)
    null = T.T.nullspace()  # vectors n with n.u = n.w = 0
    if not null:
        return True
    rows = []
    for nv in null:
        den = sympy.ilcm(*[sympy.fraction(x)[1] for x in nv])
        rows.append([int(x * den) for x in nv])
    N = sympy.Matrix(rows)
    target = N * y0
    if not all(t.is_integer for t in target):
        return False
    # target must lie in the lattice spanned by the columns of N
    basis = hnf_rows([list(N[:, j]) for j in range(N.shape[1])])
    return in_span(basis, [int(t) for t in target])
