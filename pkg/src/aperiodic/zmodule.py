"""Integer coordinate modules for exact point positions.

A point set generated from a lattice lives in a finitely generated Z-module
of physical space (Z[tau] on the line, Z[zeta_8] or Z[zeta_5] in the plane).
Every point is stored as an integer vector over a fixed module basis; the
float embedding is only used for distances and drawing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class CoordinateModule:
    """Z-module with an integer coordinate system and a float embedding.

    ``embedding`` has shape (rank, dim): row i is the physical position of
    basis element i.  ``rotation_generator`` optionally gives the integer
    matrix (acting on column coordinate vectors) of the rotation by
    ``2*pi/rotation_order``.
    """

    name: str
    embedding: np.ndarray
    rotation_order: int | None = None
    rotation_generator: np.ndarray | None = None
    cyclotomic: int | None = None
    _powers: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "embedding", np.asarray(self.embedding, dtype=float))
        if self.rotation_generator is not None:
            g = np.asarray(self.rotation_generator, dtype=np.int64)
            object.__setattr__(self, "rotation_generator", g)
            emb = self.embedding
            a = 2 * math.pi / self.rotation_order
            if self.dim == 1:
                rot = np.array([[math.cos(a)]])
            else:
                rot = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
            if not np.allclose(g.T @ emb, emb @ rot.T, atol=1e-12):
                raise ValueError(f"rotation generator of module {self.name} is inconsistent")

    @property
    def rank(self) -> int:
        return self.embedding.shape[0]

    @property
    def dim(self) -> int:
        return self.embedding.shape[1]

    def to_float(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(coords, dtype=np.int64) @ self.embedding

    def rotation_matrix(self, p: int, q: int) -> np.ndarray | None:
        """Integer matrix of the rotation by 2*pi*p/q, or None if not in the module's group."""
        if self.rotation_generator is None:
            return None
        n = self.rotation_order
        if (p * n) % q:
            return None
        k = (p * n // q) % n
        if k not in self._powers:
            m = np.eye(self.rank, dtype=np.int64)
            for _ in range(k):
                m = self.rotation_generator @ m
            self._powers[k] = m
        return self._powers[k]

    def multiply(self, u, w) -> np.ndarray:
        """Product in Z[zeta_n] when the basis is 1, zeta, ..., zeta^(deg-1)."""
        if self.cyclotomic is None:
            raise ValueError(f"module {self.name} has no ring structure")
        u = [int(x) for x in u]
        w = [int(x) for x in w]
        prod = [0] * (len(u) + len(w) - 1)
        for i, a in enumerate(u):
            if a:
                for j, b in enumerate(w):
                    prod[i + j] += a * b
        return _reduce_cyclotomic(prod, self.cyclotomic, self.rank)

    def conjugate(self, u) -> np.ndarray:
        """Complex conjugation zeta^j -> zeta^(n-j)."""
        n = self.cyclotomic
        if n is None:
            raise ValueError(f"module {self.name} has no ring structure")
        poly = [0] * n
        for j, a in enumerate(u):
            poly[(n - j) % n] += int(a)
        return _reduce_cyclotomic(poly, n, self.rank)

    def area2(self, u, w) -> np.ndarray:
        """conj(u) w - u conj(w) = 2i * (u x w): exact signed-area element."""
        return self.multiply(self.conjugate(u), w) - self.multiply(u, self.conjugate(w))

    def __eq__(self, other) -> bool:
        return isinstance(other, CoordinateModule) and self.name == other.name

    def __hash__(self) -> int:
        return hash(self.name)


_CYCLOTOMIC = {4: [1, 0, 1], 5: [1, 1, 1, 1, 1], 8: [1, 0, 0, 0, 1]}


def _reduce_cyclotomic(poly: list[int], n: int, deg: int) -> np.ndarray:
    phi = _CYCLOTOMIC[n]
    poly = list(poly)
    for k in range(len(poly) - 1, deg - 1, -1):
        c = poly[k]
        if c:
            poly[k] = 0
            for j in range(deg):
                poly[k - deg + j] -= c * phi[j]
    out = poly[:deg] + [0] * max(0, deg - len(poly))
    return np.array(out, dtype=np.int64)


def _cyclic_shift(n: int, wrap_sign: int) -> np.ndarray:
    """Multiplication by zeta on basis 1, zeta, ..., zeta^(n-1) where zeta^n = wrap."""
    g = np.zeros((n, n), dtype=np.int64)
    for j in range(n - 1):
        g[j + 1, j] = 1
    g[:, n - 1] = wrap_sign
    return g


def integer_module(d: int) -> CoordinateModule:
    gen = None
    order = None
    if d == 2:
        gen, order = np.array([[0, -1], [1, 0]]), 4
    elif d == 1:
        gen, order = np.array([[-1]]), 2
    return CoordinateModule(f"Z^{d}", np.eye(d), order, gen, 4 if d == 2 else None)


def golden_module() -> CoordinateModule:
    """Z[tau] on the line, basis (1, tau)."""
    tau = (1 + math.sqrt(5)) / 2
    return CoordinateModule("Z[tau]", np.array([[1.0], [tau]]), 2, np.array([[-1, 0], [0, -1]]))


def octagonal_module(scale: float = 1.0) -> CoordinateModule:
    """Z[zeta_8] with basis zeta^j, j = 0..3 (zeta^4 = -1)."""
    emb = np.array([[math.cos(math.pi * j / 4), math.sin(math.pi * j / 4)] for j in range(4)]) * scale
    gen = np.zeros((4, 4), dtype=np.int64)
    for j in range(3):
        gen[j + 1, j] = 1
    gen[0, 3] = -1
    return CoordinateModule(f"Z[zeta8]*{scale:.12g}", emb, 8, gen, 8)


def pentagonal_module() -> CoordinateModule:
    """Z[zeta_5] with basis zeta^j, j = 0..3, zeta^4 = -(1 + zeta + zeta^2 + zeta^3).

    Rotation generator is multiplication by zeta_10 = -zeta^3 (angle pi/5).
    """
    emb = np.array([[math.cos(2 * math.pi * j / 5), math.sin(2 * math.pi * j / 5)] for j in range(4)])
    z = _cyclic_shift(4, -1)
    zeta10 = -(z @ z @ z)
    return CoordinateModule("Z[zeta5]", emb, 10, zeta10, 5)


def pentagonal_multiplier(a: int, b: int) -> np.ndarray:
    """Integer matrix of multiplication by a + b*tau on Z[zeta_5] (tau = -zeta^2 - zeta^3)."""
    z = _cyclic_shift(4, -1)
    tau = -(z @ z) - (z @ z @ z)
    return a * np.eye(4, dtype=np.int64) + b * tau


# --------------------------------------------------------------- reduction


def hnf_rows(vectors) -> np.ndarray:
    """Row Hermite normal form basis of the Z-span of integer row vectors."""
    rows = [list(map(int, v)) for v in vectors if any(int(x) for x in v)]
    if not rows:
        return np.zeros((0, len(vectors[0]) if len(vectors) else 0), dtype=np.int64)
    m = len(rows[0])
    basis: list[list[int]] = []
    col = 0
    work = rows
    while work and col < m:
        nz = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0]
        if not nz:
            col += 1
            continue
        # Euclid on the column
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            pivot = nz[0]
            new = [pivot]
            for r in nz[1:]:
                q = r[col] // pivot[col]
                r2 = [x - q * y for x, y in zip(r, pivot)]
                if r2[col] != 0:
                    new.append(r2)
                elif any(r2):
                    rest.append(r2)
            nz = new
        pivot = nz[0]
        if pivot[col] < 0:
            pivot = [-x for x in pivot]
        basis.append(pivot)
        work = rest
        col += 1
    # reduce entries above pivots
    pivots = []
    for i, row in enumerate(basis):
        pc = next(c for c, x in enumerate(row) if x != 0)
        pivots.append(pc)
        for j in range(i):
            q = basis[j][pc] // row[pc]
            if q:
                basis[j] = [x - q * y for x, y in zip(basis[j], row)]
    return np.array(basis, dtype=np.int64)


def in_span(basis: np.ndarray, vector) -> bool:
    """Integer-span membership of ``vector`` for an HNF basis."""
    v = [int(x) for x in vector]
    for row in basis:
        pc = next(c for c, x in enumerate(row) if x != 0)
        if v[pc] % int(row[pc]):
            return False
        q = v[pc] // int(row[pc])
        v = [x - q * int(y) for x, y in zip(v, row)]
    return not any(v)


def is_unimodular_equivalent(a: np.ndarray, b: np.ndarray) -> bool:
    """Two bases span the same Z-module."""
    return all(in_span(a, r) for r in b) and all(in_span(b, r) for r in a) and len(a) == len(b)
