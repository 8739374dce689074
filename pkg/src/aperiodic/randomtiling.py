"""Random tiling ensembles: Bernoulli chains and the dart-rhombus model.

Dart-rhombus encoding: the torus is a triangular lattice with L1 x L2 cells,
each holding an up (U) and a down (D) triangle.  Every lattice triangle is
cut into three 30-30-120 isosceles pieces by joining its centre to its
corners; piece k of a triangle sits on its lattice edge k.  A rhombus glues
two pieces across a lattice edge, a dart glues two pieces inside the same
lattice triangle.  Tilings are perfect matchings of this piece graph.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from .algebra import TAU_FLOAT, ValidationError

ENUMERATION_BUDGET = 96  # pieces (six per cell)


class BudgetExceededError(RuntimeError):
    pass


# -------------------------------------------------------------- Bernoulli


def bernoulli_entropy(nu_a: float) -> float:
    """-nu log nu - (1 - nu) log(1 - nu), natural log, 0 log 0 = 0."""
    if not 0.0 <= nu_a <= 1.0:
        raise ValidationError("frequency must lie in [0, 1]")
    return -sum(p * math.log(p) for p in (nu_a, 1.0 - nu_a) if p > 0)


@dataclass(frozen=True)
class BinaryEnsemble:
    nu_a: float
    n: int
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.nu_a <= 1.0:
            raise ValidationError("frequency must lie in [0, 1]")
        if self.n < 0:
            raise ValidationError("length must be non-negative")


def sample_binary_chain(e: BinaryEnsemble) -> str:
    rng = np.random.default_rng(e.seed)
    draws = rng.random(e.n) < e.nu_a
    return "".join(np.where(draws, "a", "b"))


def block_entropy(word: str, b: int) -> float:
    """Plug-in entropy of overlapping b-blocks, per letter."""
    if b < 1:
        raise ValidationError("block length must be positive")
    if len(word) < b:
        raise ValidationError("word shorter than block length")
    counts = Counter(word[i : i + b] for i in range(len(word) - b + 1))
    total = sum(counts.values())
    p = np.array(list(counts.values()), dtype=float) / total
    return float(-(p * np.log(p)).sum() / b) + 0.0


# ---------------------------------------------------------- dart-rhombus

RHOMB, DART = "rhombus", "dart"


@dataclass(frozen=True)
class PieceGraph:
    """Adjacency of the isosceles pieces on an L1 x L2 torus."""

    L1: int
    L2: int
    neighbours: tuple[tuple[tuple[int, str], ...], ...]

    @property
    def n(self) -> int:
        return 6 * self.L1 * self.L2

    def index(self, i: int, j: int, t: str, k: int) -> int:
        return (((i % self.L1) * self.L2 + (j % self.L2)) * 2 + (t == "D")) * 3 + k

    def label(self, p: int) -> tuple[int, int, str, int]:
        k = p % 3
        q = p // 3
        t = "D" if q % 2 else "U"
        q //= 2
        return q // self.L2, q % self.L2, t, k

    def kind(self, p: int, q: int) -> str | None:
        for r, kd in self.neighbours[p]:
            if r == q:
                return kd
        return None


@lru_cache(maxsize=None)
def piece_graph(L1: int, L2: int) -> PieceGraph:
    if L1 < 1 or L2 < 1:
        raise ValidationError("torus dimensions must be positive")
    nb: list[list[tuple[int, str]]] = [[] for _ in range(6 * L1 * L2)]
    g = PieceGraph(L1, L2, ())

    def add(a, b, kind):
        ia, ib = g.index(*a), g.index(*b)
        nb[ia].append((ib, kind))
        nb[ib].append((ia, kind))

    for i in range(L1):
        for j in range(L2):
            for t in "UD":
                for k in range(3):
                    for k2 in range(k + 1, 3):
                        add((i, j, t, k), (i, j, t, k2), DART)
            add((i, j, "U", 0), (i, j - 1, "D", 0), RHOMB)
            add((i, j, "U", 1), (i - 1, j, "D", 1), RHOMB)
            add((i, j, "U", 2), (i, j, "D", 2), RHOMB)
    return PieceGraph(L1, L2, tuple(tuple(x) for x in nb))


@dataclass(frozen=True, eq=False)
class DartRhombusConfig:
    """Perfect matching of pieces; ``partner[p]`` is the piece glued to p."""

    L1: int
    L2: int
    partner: tuple[int, ...]
    seed: int | None = None

    @property
    def graph(self) -> PieceGraph:
        return piece_graph(self.L1, self.L2)

    def __eq__(self, other) -> bool:
        return isinstance(other, DartRhombusConfig) and (self.L1, self.L2, self.partner) == (other.L1, other.L2, other.partner)

    def __hash__(self) -> int:
        return hash((self.L1, self.L2, self.partner))

    def tiles(self) -> list[tuple[str, int, tuple[int, int, str, int]]]:
        """(kind, orientation, anchor piece).

        Rhombus orientation = lattice edge direction k (3 values); dart
        orientation = 3 * (0 for U, 1 for D) + missing piece (6 values).
        """
        g = self.graph
        out = []
        for p, q in enumerate(self.partner):
            if p < q:
                i, j, t, k = g.label(p)
                if g.kind(p, q) == RHOMB:
                    out.append((RHOMB, k, g.label(p)))
                else:
                    missing = 3 - k - g.label(q)[3]
                    out.append((DART, 3 * (t == "D") + missing, g.label(p)))
        return out

    def counts(self) -> tuple[int, int, int, int]:
        c = [0, 0, 0, 0]
        for kind, o, _ in self.tiles():
            c[o if kind == RHOMB else 3] += 1
        return tuple(c)

    def records(self):
        for kind, o, (i, j, t, k) in self.tiles():
            yield {"label": kind, "orientation": o, "cell": [i, j], "triangle": t, "piece": k}


def is_valid(cfg: DartRhombusConfig) -> bool:
    """Perfect cover by allowed tiles, alternation rule, dart short-edge rule."""
    g = cfg.graph
    if len(cfg.partner) != g.n:
        return False
    for p, q in enumerate(cfg.partner):
        if not 0 <= q < g.n or q == p or cfg.partner[q] != p or g.kind(p, q) is None:
            return False
    tile_of = {}
    for p, q in enumerate(cfg.partner):
        tile_of[p] = (min(p, q), max(p, q))
    # tiles sharing an edge: pieces adjacent through a leg (same lattice triangle)
    for p in range(g.n):
        for r, kind in g.neighbours[p]:
            if kind != DART or tile_of[p] == tile_of[r]:
                continue
            tp, tr = tile_of[p], tile_of[r]
            kp, kr = g.kind(*tp), g.kind(*tr)
            if kp == RHOMB and kr == RHOMB and g.label(tp[0])[3] == g.label(tr[0])[3]:
                return False  # translate-identical rhombi sharing an edge
            if kp == DART and kr == DART:
                return False  # darts sharing a short edge
    return True


def all_rhombus_config(L1: int, L2: int) -> DartRhombusConfig:
    """Periodic seed: every piece glued across its lattice edge."""
    g = piece_graph(L1, L2)
    partner = [0] * g.n
    for p in range(g.n):
        partner[p] = next(q for q, kind in g.neighbours[p] if kind == RHOMB)
    return DartRhombusConfig(L1, L2, tuple(partner))


def _check_budget(L1: int, L2: int, budget: int) -> None:
    n = 6 * L1 * L2
    if n > budget:
        # count grows roughly like 2^(cells); memo states scale with the frontier
        raise BudgetExceededError(
            f"{n} pieces exceeds the enumeration budget of {budget}; "
            f"expected count about 2^{L1 * L2 + 1}, frontier states up to 2^{min(n, 6 * min(L1, L2) * 2)}"
        )


def _memo_counter(L1: int, L2: int, weighted: bool):
    g = piece_graph(L1, L2)
    full = (1 << g.n) - 1
    nbr = [tuple(q for q, _ in g.neighbours[p]) for p in range(g.n)]
    keys = [{q: (g.label(p)[3] if kind == RHOMB else 3) for q, kind in g.neighbours[p]} for p in range(g.n)]

    @lru_cache(maxsize=None)
    def f(mask: int):
        if mask == full:
            return Counter({(0, 0, 0, 0): 1}) if weighted else 1
        p = (~mask & (mask + 1)).bit_length() - 1
        if weighted:
            out: Counter = Counter()
            for q in nbr[p]:
                if not mask >> q & 1:
                    slot = keys[p][q]
                    for key, v in f(mask | 1 << p | 1 << q).items():
                        kk = list(key)
                        kk[slot] += 1
                        out[tuple(kk)] += v
            return out
        return sum(f(mask | 1 << p | 1 << q) for q in nbr[p] if not mask >> q & 1)

    return f


def enumerate_configs(L1: int, L2: int, density: dict | None = None, budget: int = ENUMERATION_BUDGET) -> int:
    """Exact number of dart-rhombus tilings of the torus.

    ``density`` optionally fixes tile counts: keys ``r0``, ``r1``, ``r2``
    (rhombi per orientation) and ``dart``.
    """
    if L1 < 1 or L2 < 1:
        return 0
    _check_budget(L1, L2, budget)
    if not density:
        return int(_memo_counter(L1, L2, False)(0))
    unknown = set(density) - {"r0", "r1", "r2", "dart"}
    if unknown:
        raise ValidationError(f"unknown density keys {sorted(unknown)}")
    order = ("r0", "r1", "r2", "dart")
    return sum(
        v for key, v in count_distribution(L1, L2, budget).items()
        if all(key[order.index(k)] == val for k, val in density.items())
    )


def count_distribution(L1: int, L2: int, budget: int = ENUMERATION_BUDGET) -> Counter:
    """Counts keyed by (rhombi orientation 0, 1, 2, darts)."""
    if L1 < 1 or L2 < 1:
        return Counter()
    _check_budget(L1, L2, budget)
    return Counter(_memo_counter(L1, L2, True)(0))


def iter_configs(L1: int, L2: int, budget: int = 48) -> Iterator[DartRhombusConfig]:
    """Every tiling explicitly (small tori only)."""
    _check_budget(L1, L2, budget)
    g = piece_graph(L1, L2)
    partner = [-1] * g.n

    def rec():
        try:
            p = partner.index(-1)
        except ValueError:
            yield DartRhombusConfig(L1, L2, tuple(partner))
            return
        for q, _ in g.neighbours[p]:
            if partner[q] == -1 and q != p:
                partner[p], partner[q] = q, p
                yield from rec()
                partner[p] = partner[q] = -1

    yield from rec()


def ladder_entropies(tori, budget: int = ENUMERATION_BUDGET) -> list[dict]:
    """log(count) normalised per piece and per tile for each torus."""
    out = []
    for L1, L2 in tori:
        c = enumerate_configs(L1, L2, budget=budget)
        pieces = 6 * L1 * L2
        out.append({
            "L1": L1, "L2": L2, "count": c, "pieces": pieces, "tiles": pieces // 2,
            "per_piece": math.log(c) / pieces, "per_tile": math.log(c) / (pieces // 2),
        })
    return out


# ------------------------------------------------------------ Monte Carlo


@lru_cache(maxsize=None)
def move_table(L1: int, L2: int) -> tuple[tuple[int, ...], ...]:
    """Moves as sets of lattice edges (named by their U piece) whose
    rhombus/dart status is toggled.

    A tiling is equivalent to marking lattice edges (marked = crossed by a
    rhombus) so that every lattice triangle has one or three marked edges.
    Toggling the six edges at a vertex, or a row of edges crossed by a
    winding loop, preserves those parities; together these moves reach
    every marking.
    """
    g = piece_graph(L1, L2)
    raw = []
    for i in range(L1):
        for j in range(L2):
            raw.append([(i, j, 0), (i, j, 1), (i - 1, j, 0), (i - 1, j, 2), (i, j - 1, 1), (i, j - 1, 2)])
    raw.append([(i, 0, k) for i in range(L1) for k in (1, 2)])
    raw.append([(0, j, k) for j in range(L2) for k in (0, 2)])
    moves = set()
    for edges in raw:
        par = Counter(g.index(i, j, "U", k) for i, j, k in edges)
        m = tuple(sorted(e for e, c in par.items() if c % 2))
        if m:
            moves.add(m)
    return tuple(sorted(moves))


def _rhomb_partner(g: PieceGraph, p: int) -> int:
    return next(q for q, kind in g.neighbours[p] if kind == RHOMB)


def _apply_move(g: PieceGraph, partner: list[int], move: tuple[int, ...]) -> None:
    marked = {}
    for u in move:
        d = _rhomb_partner(g, u)
        for p in (u, d):
            marked[p] = g.kind(p, partner[p]) != RHOMB
    for base in {p - p % 3 for p in marked}:
        pieces = (base, base + 1, base + 2)
        flags = [marked.get(p, g.kind(p, partner[p]) == RHOMB) for p in pieces]
        free = [p for p, f in zip(pieces, flags) if not f]
        for p, f in zip(pieces, flags):
            if f:
                partner[p] = _rhomb_partner(g, p)
        if len(free) == 2:
            a, b = free
            partner[a], partner[b] = b, a
        elif free:
            raise RuntimeError("move broke the triangle parity")


def _picks(rng: np.random.Generator, n_moves: int, steps: int) -> np.ndarray:
    # lazy chain: hold with probability 1/2.  Every move flips a parity
    # class, so without holding the chain has period two.
    return rng.integers(0, 2 * n_moves, size=steps) if n_moves else np.full(steps, 0)


def mc_sample(cfg: DartRhombusConfig, steps: int, seed: int = 0, moves=None, check: bool = True) -> DartRhombusConfig:
    """Lazy chain of uniformly proposed involutive moves; proposals are
    symmetric and always accepted, so the stationary law is uniform.  With
    ``check`` every visited state is validated."""
    if steps < 0:
        raise ValidationError("steps must be non-negative")
    if not is_valid(cfg):
        raise ValidationError("initial configuration is not a valid tiling")
    moves = move_table(cfg.L1, cfg.L2) if moves is None else moves
    rng = np.random.default_rng(seed)
    partner = list(cfg.partner)
    g = cfg.graph
    for m in _picks(rng, len(moves), steps):
        if m >= len(moves):
            continue
        _apply_move(g, partner, moves[m])
        if check and not is_valid(DartRhombusConfig(cfg.L1, cfg.L2, tuple(partner))):
            raise RuntimeError("move produced an invalid tiling")
    return DartRhombusConfig(cfg.L1, cfg.L2, tuple(partner), seed)


def mc_visits(cfg: DartRhombusConfig, steps: int, seed: int = 0, thin: int = 1) -> Counter:
    """Visit counts of configurations along one chain (every ``thin`` steps)."""
    moves = move_table(cfg.L1, cfg.L2)
    rng = np.random.default_rng(seed)
    partner = list(cfg.partner)
    visits: Counter = Counter()
    g = cfg.graph
    for s, m in enumerate(_picks(rng, len(moves), steps)):
        if m < len(moves):
            _apply_move(g, partner, moves[m])
        if s % thin == 0:
            visits[tuple(partner)] += 1
    return visits


def move_graph_connected(L1: int, L2: int) -> bool:
    """Exhaustive ergodicity check of the move set on a small torus."""
    configs = {c.partner for c in iter_configs(L1, L2)}
    moves = move_table(L1, L2)
    start = next(iter(configs))
    seen = {start}
    queue = deque([start])
    g = piece_graph(L1, L2)
    while queue:
        cur = queue.popleft()
        for m in moves:
            p = list(cur)
            _apply_move(g, p, m)
            t = tuple(p)
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return seen == configs


# ---------------------------------------------------------- entropy scans


@dataclass(frozen=True)
class EntropyScan:
    family: str
    grid: np.ndarray
    entropy: np.ndarray
    errors: np.ndarray
    argmax: float
    fit: np.ndarray  # quadratic coefficients, highest power first
    r2: float
    residuals: np.ndarray
    metadata: dict = field(default_factory=dict)


def _quadratic_fit(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    coef = np.polyfit(x, y, 2)
    res = y - np.polyval(coef, x)
    ss = float(((y - y.mean()) ** 2).sum())
    return coef, (1.0 - float((res**2).sum()) / ss) if ss > 0 else 1.0, res


def entropy_scan(family: str, grid=None, torus=(4, 4), window: int = 3, budget: int = ENUMERATION_BUDGET) -> EntropyScan:
    """Entropy as a function of a density parameter, with a quadratic fit near the maximum.

    binary: grid of nu_a, exact Bernoulli entropy.  dart-rhombus: parameter =
    number of orientation-0 rhombi (exact constrained counts), entropy per
    tile; the fit uses the points within ``window`` of the maximum.
    """
    if family == "binary":
        x = np.linspace(0.05, 0.95, 19) if grid is None else np.asarray(grid, dtype=float)
        y = np.array([bernoulli_entropy(v) for v in x])
        i = int(np.argmax(y))
        sel = np.abs(x - x[i]) <= 0.2 + 1e-12
        coef, r2, res = _quadratic_fit(x[sel], y[sel])
        return EntropyScan(family, x, y, np.zeros_like(y), float(x[i]), coef, r2, res)
    if family == "dart-rhombus":
        L1, L2 = torus
        dist = count_distribution(L1, L2, budget)
        marg: Counter = Counter()
        for key, v in dist.items():
            marg[key[0]] += v
        tiles = 3 * L1 * L2
        x_all = np.array(sorted(marg))
        x = x_all if grid is None else np.array([g for g in grid if g in marg])
        y = np.array([math.log(marg[int(v)]) / tiles for v in x])
        i = int(np.argmax(y))
        sel = np.abs(x - x[i]) <= window
        coef, r2, res = _quadratic_fit(x[sel].astype(float), y[sel])
        return EntropyScan(
            family, x, y, np.zeros_like(y), float(x[i]), coef, r2, res,
            {"torus": (L1, L2), "symmetric_point": L1 * L2 / 2, "tiles": tiles, "parameter": "orientation-0 rhombus count"},
        )
    raise ValidationError(f"unknown ensemble family {family!r}")


GOLDEN_FREQUENCY = 1 / TAU_FLOAT
