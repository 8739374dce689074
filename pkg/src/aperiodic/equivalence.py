"""Local equivalence: r-patch atlases, LI, local derivability and translation modules.

Patches are anchored at pattern points (or tile centroids).  A patch is the
sorted tuple of (relative exact key, item shape) for all items within the
closed ball of radius r; relative keys are integer vectors, so equality is
exact whenever the input carries module coordinates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .algebra import OrthogonalMap, ValidationError
from .pattern import Pattern, Region
from .tiling import KEY_SCALE, Tile, TilingConfig
from .zmodule import hnf_rows, in_span

DIST_TOL = 1e-9
FLOAT_QUANTUM = 1e-9


class RuleInconsistencyError(RuntimeError):
    pass


@dataclass(frozen=True)
class RPatch:
    radius: float
    content: tuple
    anchor: str = "point"


@dataclass(frozen=True, eq=False)
class PatchAtlas:
    radius: float
    patches: frozenset
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.patches)

    def __iter__(self):
        return iter(sorted(self.patches, key=repr))

    def __contains__(self, patch) -> bool:
        return (patch.content if isinstance(patch, RPatch) else patch) in self.patches

    def __eq__(self, other) -> bool:
        return isinstance(other, PatchAtlas) and self.radius == other.radius and self.patches == other.patches

    def __hash__(self) -> int:
        return hash((self.radius, self.patches))

    def records(self):
        for p in self:
            if isinstance(p, str):  # factor of a symbolic word
                yield {"radius": self.radius, "patch": p}
            else:
                yield {"radius": self.radius, "patch": [{"offset": list(k), "shape": repr(s)} for k, s in p]}


# ---------------------------------------------------------------- adapters


@dataclass(frozen=True, eq=False)
class _Items:
    anchors: np.ndarray
    positions: np.ndarray
    shapes: list
    region: Region | None
    margin: float
    exact: bool
    module_name: str | None
    embed: Callable[[np.ndarray], np.ndarray] | None


def _items(obj, force_float: bool = False) -> _Items:
    if isinstance(obj, Pattern):
        pos = obj.positions
        if obj.keys is not None and not force_float:
            mod = obj.module
            return _Items(
                obj.keys * KEY_SCALE, pos, [()] * len(pos), obj.region, 0.0, True, mod.name,
                lambda k: mod.to_float(k) / KEY_SCALE,
            )
        return _Items(np.round(pos / FLOAT_QUANTUM).astype(np.int64), pos, [()] * len(pos), obj.region, 0.0, False, None, None)
    if isinstance(obj, TilingConfig):
        mod = obj.module
        anchors = obj.anchors()
        pos = obj.positions()
        if force_float:
            return _Items(
                np.round(pos / FLOAT_QUANTUM).astype(np.int64), pos,
                [(t.label, tuple(map(tuple, np.round(mod.to_float(np.array(t.shape[1])) / KEY_SCALE / FLOAT_QUANTUM).astype(np.int64).tolist()))) for t in obj.tiles],
                obj.region, obj.margin, False, None, None,
            )
        return _Items(anchors, pos, [t.shape for t in obj.tiles], obj.region, obj.margin, True, mod.name, lambda k: mod.to_float(k) / KEY_SCALE)
    raise ValidationError(f"unsupported structure {type(obj).__name__}")


def _pair_items(a, b) -> tuple[_Items, _Items]:
    ia, ib = _items(a), _items(b)
    if ia.exact and ib.exact and ia.module_name == ib.module_name:
        return ia, ib
    if ia.exact or ib.exact:
        warnings.warn("comparing without common exact coordinates: tolerance 1e-9", stacklevel=3)
    return _items(a, force_float=True), _items(b, force_float=True)


def _sample_indices(it: _Items, r: float, sample_region: Region | None) -> np.ndarray:
    if it.region is None:
        raise ValidationError("structure has no region; cannot decide which patches are complete")
    ok = it.region.interior(it.positions, r + it.margin + DIST_TOL)
    if sample_region is not None:
        ok &= sample_region.contains(it.positions)
    return np.flatnonzero(ok)


def _neighbours(it: _Items, idx: np.ndarray, r: float, tree=None) -> list[np.ndarray]:
    tree = tree or cKDTree(it.positions)
    lists = tree.query_ball_point(it.positions[idx], r + 1e-6)
    return [np.asarray(l, dtype=np.int64) for l in lists]


def _canonical(it: _Items, i: int, nb: np.ndarray, r: float, centre=None) -> tuple:
    base = it.anchors[i] if centre is None else centre
    rel = it.anchors[nb] - base
    if it.embed is not None:
        d = np.linalg.norm(np.atleast_2d(it.embed(rel)), axis=1)
    else:
        d = np.linalg.norm(it.positions[nb] - it.positions[i], axis=1)
    keep = d <= r + DIST_TOL
    return tuple(sorted(zip(map(tuple, rel[keep].tolist()), [it.shapes[j] for j in nb[keep]])))


def _patches(it: _Items, r: float, sample_region: Region | None = None):
    idx = _sample_indices(it, r, sample_region)
    if len(idx) == 0:
        raise ValidationError("no complete patches: region too small for this radius")
    nbs = _neighbours(it, idx, r)
    return idx, [_canonical(it, i, nb, r) for i, nb in zip(idx, nbs)]


def canonical_patch(obj, index: int, r: float) -> RPatch:
    it = _items(obj)
    nb = _neighbours(it, np.array([index]), r)[0]
    return RPatch(r, _canonical(it, index, nb, r))


def extract_atlas(obj, r: float, sample_region: Region | None = None) -> PatchAtlas:
    """Deduplicated canonical r-patches around every sample location."""
    if r <= 0:
        raise ValidationError("radius must be positive")
    it = _items(obj)
    idx, pats = _patches(it, r, sample_region)
    return PatchAtlas(r, frozenset(pats), {"locations": len(idx), "exact": it.exact, "module": it.module_name})


def li_equivalent(a, b, r: float, sample_a: Region | None = None, sample_b: Region | None = None) -> bool:
    """Both atlases coincide at radius r (each patch of one occurs in the other)."""
    ia, ib = _pair_items(a, b)
    return frozenset(_patches(ia, r, sample_a)[1]) == frozenset(_patches(ib, r, sample_b)[1])


def li_difference(a, b, r: float, sample_a: Region | None = None, sample_b: Region | None = None) -> tuple[int, int]:
    """Counts of patches occurring only in a, only in b."""
    ia, ib = _pair_items(a, b)
    pa, pb = frozenset(_patches(ia, r, sample_a)[1]), frozenset(_patches(ib, r, sample_b)[1])
    return len(pa - pb), len(pb - pa)


def generalized_symmetry(a: Pattern, rot: OrthogonalMap, r: float, sample_region: Region | None = None) -> bool:
    """Is rot(a) locally indistinguishable from a at radius r?

    Exact when rot lies in the rotation group of a's coordinate module,
    otherwise compared with the float tolerance.
    """
    ra = a.rotated(rot)
    rs = None if sample_region is None else sample_region.rotated(rot)
    return li_equivalent(a, ra, r, sample_region, rs)


# ------------------------------------------------------------- derivation


@dataclass(frozen=True)
class DerivationRule:
    """Local rule: ``apply(centre, neighbours)`` sees tiles translated so the
    centre's first vertex is the origin and returns output tiles in the same
    frame.  Neighbours are all tiles with anchor within ``radius``."""

    name: str
    radius: float
    apply: Callable[[Tile, list[Tile]], list[Tile]]
    inverse: str | None = None
    output_margin: float = 0.0


def _as_tiling(obj) -> tuple[TilingConfig, bool]:
    if isinstance(obj, TilingConfig):
        return obj, False
    if isinstance(obj, Pattern):
        if obj.keys is None:
            raise ValidationError("derivation needs exact coordinates")
        tiles = tuple(Tile("point", (tuple(k),)) for k in obj.keys.tolist())
        return TilingConfig(tiles, obj.module, obj.region), True
    raise ValidationError(f"unsupported structure {type(obj).__name__}")


def derive(rule: DerivationRule, obj):
    """Apply a local rule at every tile and merge; overlapping outputs must agree."""
    tiling, was_pattern = _as_tiling(obj)
    it = _items(tiling)
    out: dict[frozenset, Tile] = {}
    if len(tiling):
        nbs = _neighbours(it, np.arange(len(tiling)), rule.radius)
        for i, nb in enumerate(nbs):
            centre = tiling.tiles[i]
            origin = np.array(centre.vertices[0], dtype=np.int64)
            local = [tiling.tiles[j].translated(-origin) for j in nb if j != i]
            for t in rule.apply(centre.translated(-origin), local):
                t = t.translated(origin)
                key = frozenset(t.vertices)
                prev = out.get(key)
                if prev is not None and prev != t:
                    raise RuleInconsistencyError(f"rule {rule.name} disagrees on overlap at {sorted(key)}")
                out[key] = t
    tiles = tuple(sorted(out.values(), key=lambda t: (t.anchor, t.label)))
    if was_pattern and all(t.label == "point" for t in tiles):
        keys = np.array([t.vertices[0] for t in tiles], dtype=np.int64).reshape(-1, tiling.module.rank)
        return Pattern(tiling.module.to_float(keys), obj.region, keys=keys, module=obj.module, tag=obj.tag)
    return TilingConfig(tiles, tiling.module, tiling.region, max(tiling.margin, rule.output_margin), dict(tiling.metadata))


IDENTITY = DerivationRule("identity", 0.0, lambda c, nb: [c], inverse="identity")


def _split_rhomb(centre: Tile, neighbours: list[Tile]) -> list[Tile]:
    if centre.label not in ("thick", "thin"):
        raise RuleInconsistencyError(f"penrose-to-robinson expects rhombs, got {centre.label!r}")
    b, c, a, a2 = centre.vertices
    half = f"{centre.label}-half"
    return [Tile(half, (a, b, c)), Tile(half, (a2, b, c))]


def _join_halves(centre: Tile, neighbours: list[Tile]) -> list[Tile]:
    if centre.label not in ("thick-half", "thin-half"):
        raise RuleInconsistencyError(f"robinson-to-penrose expects triangles, got {centre.label!r}")
    a, b, c = centre.vertices
    a2 = tuple(int(x) for x in np.add(b, c) - np.array(a))
    partner = Tile(centre.label, (a2, b, c))
    if partner not in neighbours:
        return []  # partner outside the patch; this rhomb is left out
    apexes = sorted([a, a2])
    return [Tile(centre.label[: -len("-half")], (b, c, apexes[0], apexes[1]))]


# rhomb diameter bounds how far a dropped half can reach into the region
PENROSE_TO_ROBINSON = DerivationRule("penrose-to-robinson", 0.0, _split_rhomb, inverse="robinson-to-penrose")
ROBINSON_TO_PENROSE = DerivationRule("robinson-to-penrose", 2.0, _join_halves, inverse="penrose-to-robinson", output_margin=1.7)

DERIVATION_RULES = {r.name: r for r in (IDENTITY, PENROSE_TO_ROBINSON, ROBINSON_TO_PENROSE)}


def penrose_to_robinson(tiling: TilingConfig) -> TilingConfig:
    return derive(PENROSE_TO_ROBINSON, tiling)


def robinson_to_penrose(tiling: TilingConfig) -> TilingConfig:
    return derive(ROBINSON_TO_PENROSE, tiling)


@dataclass(frozen=True)
class Derivability:
    holds: bool
    pairs_checked: int
    classes: int
    violation: tuple | None = None

    def __bool__(self) -> bool:
        return self.holds


def is_locally_derivable(a, b, r: float, sample_region: Region | None = None, rho: float | None = None) -> Derivability:
    """Empirical test: equal r-patches of a always carry equal b-content.

    b-content at an a-location is every b item whose anchor lies within rho
    (default r) of it, relative to the location.  Only locations whose
    r-patch in a and rho-neighbourhood in b are complete are used.
    """
    rho = r if rho is None else rho
    ia, ib = _pair_items(a, b)
    idx, pats = _patches(ia, r, sample_region)
    okb = ib.region.interior(ia.positions[idx], rho + ib.margin + DIST_TOL) if ib.region is not None else np.ones(len(idx), bool)
    idx = idx[okb]
    pats = [p for p, k in zip(pats, okb) if k]
    tree_b = cKDTree(ib.positions) if len(ib.positions) else None
    seen: dict[tuple, tuple[int, tuple]] = {}
    pairs = 0
    for i, pat in zip(idx, pats):
        if tree_b is None:
            content = ()
        else:
            nb = np.asarray(tree_b.query_ball_point(ia.positions[i], rho + 1e-6), dtype=np.int64)
            content = _canonical(ib, -1, nb, rho, centre=ia.anchors[i]) if ib.embed is not None else _float_content(ia, ib, i, nb, rho)
        if pat in seen:
            pairs += 1
            j, ref = seen[pat]
            if ref != content:
                return Derivability(False, pairs, len(seen), (ia.positions[j].tolist(), ia.positions[i].tolist()))
        else:
            seen[pat] = (i, content)
    return Derivability(True, pairs, len(seen))


def _float_content(ia: _Items, ib: _Items, i: int, nb: np.ndarray, rho: float) -> tuple:
    rel = ib.anchors[nb] - ia.anchors[i]
    d = np.linalg.norm(ib.positions[nb] - ia.positions[i], axis=1)
    keep = d <= rho + DIST_TOL
    return tuple(sorted(zip(map(tuple, rel[keep].tolist()), [ib.shapes[j] for j in nb[keep]])))


# -------------------------------------------------------------------- LTM


@dataclass(frozen=True)
class LTMEstimate:
    radius: float
    generators: np.ndarray
    rank: int
    basis: np.ndarray
    degenerate: bool

    def contains(self, v) -> bool:
        return in_span(self.basis, v) if len(self.basis) else not np.any(v)


def ltm_estimate(obj, r: float, sample_region: Region | None = None) -> LTMEstimate:
    """Translations between equal r-patches, reduced to a Z-basis (Hermite normal form)."""
    it = _items(obj)
    if not it.exact:
        raise ValidationError("translation modules need exact coordinates")
    try:
        idx, pats = _patches(it, r, sample_region)
    except ValidationError:
        idx, pats = np.zeros(0, dtype=np.int64), []
    first: dict[tuple, int] = {}
    gens = []
    for i, p in zip(idx, pats):
        if p in first:
            t = it.anchors[i] - it.anchors[first[p]]
            gens.append(t // KEY_SCALE)
        else:
            first[p] = i
    rank_dim = it.anchors.shape[1] if len(it.anchors) else 0
    if not gens:
        return LTMEstimate(r, np.zeros((0, rank_dim), dtype=np.int64), 0, np.zeros((0, rank_dim), dtype=np.int64), True)
    gens = np.unique(np.array(gens, dtype=np.int64), axis=0)
    basis = np.zeros((0, rank_dim), dtype=np.int64)
    for g in gens:
        if not (len(basis) and in_span(basis, g)):
            basis = hnf_rows([*basis.tolist(), g.tolist()])
    return LTMEstimate(r, gens, len(basis), basis, False)
