"""Symbolic substitutions and geometric inflation rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .algebra import TAU_FLOAT, ValidationError
from .pattern import Box, Pattern, chain_pattern
from .tiling import KEY_SCALE, Tile, TilingConfig, exact_area2, polygon_region
from .zmodule import CoordinateModule, golden_module, integer_module, pentagonal_module, pentagonal_multiplier


# ------------------------------------------------------------------ symbolic


@dataclass(frozen=True)
class SymbolicSubstitution:
    name: str
    rule: dict[str, str]

    def __post_init__(self) -> None:
        for w in self.rule.values():
            if any(c not in self.rule for c in w):
                raise ValidationError("substitution images must use the alphabet")

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(self.rule)

    @property
    def matrix(self) -> np.ndarray:
        """M[i, j] = number of letter i in the image of letter j."""
        al = self.alphabet
        return np.array([[self.rule[b].count(a) for b in al] for a in al], dtype=object)

    def is_primitive(self, max_power: int = 16) -> bool:
        m = self.matrix.astype(np.int64)
        p = np.eye(len(m), dtype=np.int64)
        for _ in range(max_power):
            p = np.minimum(p @ m, 1)
            if p.min() > 0:
                return True
        return False

    @property
    def perron_eigenvalue(self) -> float:
        return float(max(abs(np.linalg.eigvals(self.matrix.astype(float)))))

    def apply(self, word: str, k: int = 1) -> str:
        for _ in range(k):
            word = "".join(self.rule[c] for c in word)
        return word

    def counts(self, word: str) -> np.ndarray:
        return np.array([word.count(a) for a in self.alphabet], dtype=object)

    def fixed_point_prefix(self, length: int, seed: str | None = None) -> str:
        """Prefix of the one-sided fixed point (seed letter must start its own image)."""
        seed = seed or self.alphabet[0]
        if not self.rule[seed].startswith(seed) or len(self.rule[seed]) < 2:
            raise ValidationError(f"letter {seed!r} does not generate a fixed point")
        w = seed
        while len(w) < length:
            w = self.apply(w)
        return w[:length]


FIBONACCI = SymbolicSubstitution("fibonacci", {"a": "ab", "b": "a"})


def word_chain(word: str, lengths: dict[str, tuple[int, int]], module: CoordinateModule | None = None) -> Pattern:
    """Points of a chain whose gaps are given per letter as Z[tau] coordinates."""
    module = module or golden_module()
    gaps = [lengths[c] for c in word]
    keys = np.vstack([np.zeros((1, 2), dtype=np.int64), np.cumsum(np.array(gaps, dtype=np.int64), axis=0)])
    end = float(module.to_float(keys[-1:])[0, 0])
    return chain_pattern(gaps, module, region=Box((0.0,), (end,)), tag="substitution")


FIBONACCI_LENGTHS = {"a": (0, 1), "b": (1, 0)}  # long gap tau, short gap 1


# ----------------------------------------------------------------- geometric


@dataclass(frozen=True, eq=False)
class GeometricInflation:
    """Inflate-and-subdivide rule.

    ``dissect`` receives a tile already scaled by the multiplier (as integer
    coordinates of the original tile) and returns unit-size children, so the
    rule renormalises outward: edge lengths stay fixed and the patch grows.
    """

    name: str
    module: CoordinateModule
    multiplier: float
    multiplier_matrix: np.ndarray
    dissect: Callable[[Tile], list[Tile]]
    prototiles: dict[str, Tile]
    geometry_verified: bool = True
    metadata: dict = field(default_factory=dict)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.prototiles)

    def children(self, tile: Tile) -> list[Tile]:
        return self.dissect(tile)

    @property
    def matrix(self) -> np.ndarray:
        """M[i, j] = number of children of label i in the inflated tile of label j."""
        lab = self.labels
        m = np.zeros((len(lab), len(lab)), dtype=np.int64)
        for j, l in enumerate(lab):
            for c in self.children(self.prototiles[l]):
                m[lab.index(c.label), j] += 1
        return m

    @property
    def perron_eigenvalue(self) -> float:
        return float(max(abs(np.linalg.eigvals(self.matrix.astype(float)))))

    def check_exact(self, tiles: Iterable[Tile] | None = None) -> bool:
        """Children areas sum to lambda^2 times the parent area exactly; no overlaps."""
        tiles = list(tiles) if tiles is not None else list(self.prototiles.values())
        lam = self.multiplier_matrix
        for parent in tiles:
            big = parent.transformed(lam)
            kids = self.children(parent)
            total = sum((_abs_area2(self.module, c) for c in kids), np.zeros(self.module.rank, dtype=np.int64))
            if not np.array_equal(total, _abs_area2(self.module, big)):
                return False
            if not TilingConfig(tuple(kids), self.module).is_valid():
                return False
            outline = self.module.to_float(np.array(big.outline()))
            for c in kids:
                if not _inside_convex(outline, self.module.to_float(np.array(c.vertices))):
                    return False
        return True


def _abs_area2(module: CoordinateModule, tile: Tile) -> np.ndarray:
    a = exact_area2(module, tile)
    # orientation from the float embedding; areas are far from zero
    im = float(np.asarray(module.to_float(a)).reshape(-1)[-1]) if module.dim == 2 else 0.0
    return -a if im < 0 else a


def _inside_convex(poly: np.ndarray, pts: np.ndarray, tol: float = 1e-9) -> bool:
    s = 1.0 if _signed_area(poly) > 0 else -1.0
    for i in range(len(poly)):
        a, b = poly[i], poly[(i + 1) % len(poly)]
        e = b - a
        c = s * (e[0] * (pts[:, 1] - a[1]) - e[1] * (pts[:, 0] - a[0]))
        if np.any(c < -tol):
            return False
    return True


def _signed_area(v: np.ndarray) -> float:
    return 0.5 * float(np.dot(v[:, 0], np.roll(v[:, 1], -1)) - np.dot(v[:, 1], np.roll(v[:, 0], -1)))


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=np.int64)


def _penrose_robinson() -> GeometricInflation:
    """Robinson halves of the rhombs: 'thin-half' (36-72-72, legs 1) and
    'thick-half' (108-36-36, legs 1); vertices (apex, B, C) with BC the
    bisecting diagonal of the parent rhomb."""
    module = pentagonal_module()
    lam = pentagonal_multiplier(0, 1)

    def dissect(t: Tile) -> list[Tile]:
        a, b, c = (_vec(v) for v in t.vertices)
        A, B, C = lam @ a, lam @ b, lam @ c
        if t.label == "thin-half":
            P = A + (b - a)
            return [Tile("thin-half", (C, P, B)), Tile("thick-half", (P, C, A))]
        if t.label == "thick-half":
            Q = B + (a - b)
            R = B + (c - b)
            return [Tile("thick-half", (R, C, A)), Tile("thick-half", (Q, R, B)), Tile("thin-half", (R, Q, A))]
        raise ValidationError(f"unknown tile label {t.label!r}")

    protos = {
        "thin-half": Tile("thin-half", ((0, 0, 0, 0), (1, 0, 0, 0), (0, 0, 0, -1))),
        "thick-half": Tile("thick-half", ((0, 0, 0, 0), (1, 0, 0, 0), (1, 1, 1, 1))),
    }
    return GeometricInflation("penrose-robinson", module, TAU_FLOAT, lam, dissect, protos)


def _ttt() -> GeometricInflation:
    """Golden triangles with the larger acute member (legs tau, base 1) and the
    obtuse member (legs 1, base tau); A -> 2A + B, B -> A + B."""
    module = pentagonal_module()
    lam = pentagonal_multiplier(0, 1)

    def dissect(t: Tile) -> list[Tile]:
        x, y, z = (_vec(v) for v in t.vertices)
        X, Y, Z = lam @ x, lam @ y, lam @ z
        if t.label == "ttt-acute":
            P = X + (y - x)
            Q = X + (z - x)
            return [Tile("ttt-acute", (Z, P, Y)), Tile("ttt-acute", (X, P, Q)), Tile("ttt-obtuse", (Q, P, Z))]
        if t.label == "ttt-obtuse":
            Q = Y + (z - y)
            return [Tile("ttt-acute", (Y, X, Q)), Tile("ttt-obtuse", (Q, X, Z))]
        raise ValidationError(f"unknown tile label {t.label!r}")

    tau = pentagonal_multiplier(0, 1)
    protos = {
        "ttt-acute": Tile("ttt-acute", ((0, 0, 0, 0), tuple(tau[:, 0]), tuple(-tau[:, 3]))),
        "ttt-obtuse": Tile("ttt-obtuse", ((0, 0, 0, 0), (1, 0, 0, 0), (1, 1, 1, 1))),
    }
    return GeometricInflation(
        "ttt", module, TAU_FLOAT, lam, dissect, protos, geometry_verified=False,
        metadata={"note": "dissection reconstructed from edge-length constraints; not compared against a reference drawing"},
    )


def _square() -> GeometricInflation:
    """Unit square -> four unit squares of the doubled square."""
    module = integer_module(2)
    lam = 2 * np.eye(2, dtype=np.int64)

    def dissect(t: Tile) -> list[Tile]:
        v0 = _vec(t.vertices[0]) * 2
        out = []
        for dx in (0, 1):
            for dy in (0, 1):
                o = v0 + (dx, dy)
                out.append(Tile("square", (o, o + (1, 0), o + (1, 1), o + (0, 1))))
        return out

    protos = {"square": Tile("square", ((0, 0), (1, 0), (1, 1), (0, 1)))}
    return GeometricInflation("square", module, 2.0, lam, dissect, protos)


RULES: dict[str, Callable[[], object]] = {
    "fibonacci": lambda: FIBONACCI,
    "penrose-robinson": _penrose_robinson,
    "ttt": _ttt,
    "square": _square,
}


def get_rule(name: str):
    try:
        return RULES[name]()
    except KeyError:
        raise ValidationError(f"unknown rule {name!r}; choose from {sorted(RULES)}") from None


# ------------------------------------------------------------------- seeds


def seed_tiling(rule: GeometricInflation, seed: str = "thick") -> TilingConfig:
    """Small legal starting patch: a decorated rhomb (two mirrored halves) or one prototile."""
    if rule.name == "penrose-robinson" and seed in ("thick", "thin"):
        half = rule.prototiles[f"{seed}-half"]
        a, b, c = (np.array(v) for v in half.vertices)
        mirror = Tile(half.label, (tuple(b + c - a), tuple(b), tuple(c)))
        tiles = (half, mirror)
        region = polygon_region(rule.module, [a, b, b + c - a, c])
    else:
        label = seed if seed in rule.prototiles else rule.labels[0]
        t = rule.prototiles[label]
        tiles = (t,)
        region = polygon_region(rule.module, t.outline())
    return TilingConfig(tiles, rule.module, region, metadata={"rule": rule.name, "depth": 0})


def periodic_rhomb_tiling(n: int = 12) -> TilingConfig:
    """Thick rhombs on the lattice spanned by two unit edges 108 degrees apart,
    every rhomb decorated identically (counterexample to the Penrose rules)."""
    module = pentagonal_module()
    half = _penrose_robinson().prototiles["thick-half"]
    a, b, c = (np.array(v) for v in half.vertices)
    tiles = []
    for i in range(n):
        for j in range(n):
            s = i * b + j * c
            tiles.append(Tile("thick-half", (a + s, b + s, c + s)))
            tiles.append(Tile("thick-half", (b + c - a + s, b + s, c + s)))
    corners = [a, n * b, n * (b + c), n * c]
    return TilingConfig(tuple(tiles), module, polygon_region(module, corners), metadata={"tag": "periodic-rhomb"})


def square_tiling(n: int = 8) -> TilingConfig:
    module = integer_module(2)
    tiles = [Tile("square", ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))) for i in range(n) for j in range(n)]
    return TilingConfig(tuple(tiles), module, Box((0.0, 0.0), (float(n), float(n))), metadata={"tag": "square"})


# -------------------------------------------------------------- substitute


def substitute(rule, x, k: int = 1):
    """k-fold substitution; tilings are renormalised outward (edge length kept)."""
    if k < 0:
        raise ValidationError("k must be non-negative")
    if isinstance(rule, SymbolicSubstitution):
        if not isinstance(x, str):
            raise ValidationError("symbolic substitution acts on words")
        return rule.apply(x, k)
    if not isinstance(x, TilingConfig):
        raise ValidationError("geometric inflation acts on tilings")
    for _ in range(k):
        tiles = [c for t in x.tiles for c in rule.children(t)]
        region = None if x.region is None else _scale_region(x.region, rule.multiplier)
        meta = dict(x.metadata)
        meta["depth"] = meta.get("depth", 0) + 1
        x = TilingConfig(tuple(tiles), rule.module, region, x.margin, meta)
    return x


def _scale_region(region, factor: float):
    if hasattr(region, "scaled"):
        return region.scaled(factor)
    if isinstance(region, Box):
        return Box(tuple(np.multiply(region.lo, factor)), tuple(np.multiply(region.hi, factor)))
    raise ValidationError(f"cannot scale region {type(region).__name__}")


def inflated_tiling(rule: GeometricInflation, depth: int, seed: str = "thick") -> TilingConfig:
    return substitute(rule, seed_tiling(rule, seed), depth)


# -------------------------------------------------------------- complexity


@dataclass(frozen=True)
class Complexity:
    n: int
    count: int
    prefix_length: int
    sufficient: bool


def _factor_count(word: str, n: int) -> int:
    if n <= 0:
        return 1
    return len({word[i : i + n] for i in range(len(word) - n + 1)})


def _word_prefix(source, length: int) -> str:
    if isinstance(source, str):
        return source[:length]
    if isinstance(source, SymbolicSubstitution):
        return source.fixed_point_prefix(length)
    if callable(source):
        return source(length)
    raise ValidationError("word source must be a string, a substitution or a callable")


def complexity(source, n: int, prefix_length: int = 20_000) -> Complexity:
    """Distinct length-n factors of a prefix; sufficiency = stable when the prefix doubles."""
    full = _word_prefix(source, 2 * prefix_length)
    half = full[: len(full) // 2]
    c_full = _factor_count(full, n)
    c_half = _factor_count(half, n)
    return Complexity(n, c_full, len(full), c_full == c_half and len(half) >= 10 * max(n, 1))


def complexity_entropy(source, n_max: int, prefix_length: int = 20_000) -> list[float]:
    """log(p(n))/n for n = 1..n_max."""
    if n_max < 4:
        raise ValidationError("n_max must be at least 4")
    full = _word_prefix(source, prefix_length)
    return [math.log(_factor_count(full, n)) / n for n in range(1, n_max + 1)]


# ------------------------------------------------------- atlas-level checks


def _factors(word: str, n: int) -> frozenset:
    return frozenset(word[i : i + n] for i in range(len(word) - n + 1))


def chain_word(p: Pattern, lengths: dict[str, tuple[int, int]] = FIBONACCI_LENGTHS) -> str:
    """Read back the letter sequence of a chain from exact gap coordinates."""
    inv = {tuple(v): k for k, v in lengths.items()}
    gaps = np.diff(p.sorted().keys, axis=0)
    try:
        return "".join(inv[tuple(g)] for g in gaps.tolist())
    except KeyError as e:
        raise ValidationError(f"gap {e.args[0]} is not a letter length") from None


def regrouping_is_local(rule: GeometricInflation, parents: TilingConfig, r: float) -> bool:
    """Can every child determine its parent tile from its own r-patch?"""
    from .equivalence import _items, _neighbours, _canonical, DIST_TOL

    kids, owner = [], []
    for t in parents.tiles:
        big = t.transformed(rule.multiplier_matrix)
        for c in rule.children(t):
            kids.append(c)
            owner.append(big)
    region = None if parents.region is None else _scale_region(parents.region, rule.multiplier)
    child_tiling = TilingConfig(tuple(kids), rule.module, region, parents.margin)
    it = _items(child_tiling)
    idx = np.flatnonzero(region.interior(it.positions, r + DIST_TOL))
    seen: dict[tuple, tuple] = {}
    for i, nb in zip(idx, _neighbours(it, idx, r)):
        pat = _canonical(it, i, nb, r)
        big = owner[i]
        rel = (big.label, tuple(map(tuple, (np.array(big.vertices) * KEY_SCALE - it.anchors[i]).tolist())))
        if seen.setdefault(pat, rel) != rel:
            return False
    return True


def inflation_symmetry_check(rule, reference, r: float, require_local_inverse: bool = False, sample_region=None) -> bool:
    """Substituted-and-renormalised reference has the same r-atlas as the reference.

    With ``require_local_inverse`` the regrouping of children into parents
    must also be decidable from r-patches.
    """
    from .equivalence import extract_atlas, li_equivalent

    if isinstance(rule, SymbolicSubstitution):
        if not isinstance(reference, Pattern):
            raise ValidationError("symbolic check needs a chain pattern as reference")
        image = word_chain(rule.apply(chain_word(reference)), FIBONACCI_LENGTHS)
        return li_equivalent(image, reference, r, None, sample_region)
    image = substitute(rule, reference, 1)
    same = extract_atlas(image, r) == extract_atlas(reference, r, sample_region)
    if require_local_inverse:
        return same and regrouping_is_local(rule, reference, r)
    return same


def build_atlas_by_inflation(rule, r, depth: int, seeds=None):
    """Reference atlas from inflated seeds; flagged unless depth and depth+1 agree.

    For symbolic rules ``r`` is a factor length in letters.
    """
    from .equivalence import PatchAtlas, extract_atlas

    def at(k: int) -> frozenset:
        if isinstance(rule, SymbolicSubstitution):
            return frozenset().union(*(_factors(rule.apply(a, k), int(r)) for a in (seeds or rule.alphabet)))
        out = frozenset()
        for s in seeds or rule.labels:
            t = substitute(rule, seed_tiling(rule, s), k)
            try:
                out |= extract_atlas(t, r).patches
            except ValidationError:
                pass
        return out

    now, nxt = at(depth), at(depth + 1)
    return PatchAtlas(r, now, {"rule": rule.name, "depth": depth, "stabilized": now == nxt, "size_next": len(nxt)})


def stabilization_depth(rule, r, max_depth: int = 12, seeds=None) -> int | None:
    """Smallest depth whose atlas equals the next one."""
    for d in range(max_depth + 1):
        atlas = build_atlas_by_inflation(rule, r, d, seeds)
        if atlas.metadata["stabilized"] and len(atlas):
            return d
    return None


def matching_rule_check(atlas, candidate, sample_region=None) -> tuple[bool, dict | None]:
    """Every complete candidate patch must be in the atlas; returns the first offender."""
    from .equivalence import _items, _patches

    if isinstance(candidate, str):
        n = int(atlas.radius)
        for i in range(len(candidate) - n + 1):
            f = candidate[i : i + n]
            if f not in atlas.patches:
                return False, {"index": i, "patch": f}
        return True, None
    it = _items(candidate)
    idx, pats = _patches(it, atlas.radius, sample_region)
    for i, p in zip(idx, pats):
        if p not in atlas.patches:
            return False, {"index": int(i), "position": it.positions[i].tolist(), "patch": p}
    return True, None
