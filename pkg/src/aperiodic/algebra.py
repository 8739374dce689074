"""Exact arithmetic for lattices and the quadratic rings Z[tau], Z[sqrt 2].

Floating point enters only when a value is finally embedded in the plane;
everything that decides membership or equality stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from numbers import Rational
from typing import Sequence

import mpmath
import numpy as np

TAU_FLOAT = (1 + math.sqrt(5)) / 2
SQRT2_FLOAT = math.sqrt(2)

# theta^2 = p + q*theta for each ring
_RING_RELATION = {"tau": (1, 1), "sqrt2": (2, 0)}
_RING_THETA = {"tau": TAU_FLOAT, "sqrt2": SQRT2_FLOAT}
_RING_DISC = {"tau": 5, "sqrt2": 8}


class UnsupportedDimensionError(ValueError):
    pass


class ValidationError(ValueError):
    pass


def _coerce_coefficient(x) -> int | Fraction:
    if isinstance(x, bool):
        raise TypeError("boolean is not a ring coefficient")
    if isinstance(x, int):
        return x
    if isinstance(x, Rational):
        f = Fraction(x)
        return f.numerator if f.denominator == 1 else f
    raise TypeError(f"cannot use {type(x).__name__} as an exact coefficient")


@total_ordering
class QuadraticInt:
    """Element ``a + b*theta`` with theta = tau (golden ratio) or sqrt(2).

    Coefficients are integers for ring elements; rational coefficients are
    accepted so that quotients (field elements) and rational offsets stay
    exact as well.
    """

    __slots__ = ("a", "b", "ring")

    def __init__(self, a=0, b=0, ring: str = "tau") -> None:
        if ring not in _RING_RELATION:
            raise ValueError(f"unknown ring {ring!r}")
        self.a = _coerce_coefficient(a)
        self.b = _coerce_coefficient(b)
        self.ring = ring

    @classmethod
    def theta(cls, ring: str = "tau") -> QuadraticInt:
        return cls(0, 1, ring)

    def _lift(self, other) -> QuadraticInt | None:
        if isinstance(other, QuadraticInt):
            if other.ring != self.ring:
                raise ValueError(f"mixing rings {self.ring} and {other.ring}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadraticInt(other, 0, self.ring)
        return None

    @property
    def is_integral(self) -> bool:
        return isinstance(self.a, int) and isinstance(self.b, int)

    def __repr__(self) -> str:
        return f"QuadraticInt({self.a}, {self.b}, {self.ring!r})"

    def __str__(self) -> str:
        sym = "τ" if self.ring == "tau" else "√2"
        return f"{self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}{sym}"

    def __hash__(self) -> int:
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.ring))

    def __eq__(self, other) -> bool:
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, other) -> bool:
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QuadraticInt(self.a + o.a, self.b + o.b, self.ring)

    __radd__ = __add__

    def __neg__(self) -> QuadraticInt:
        return QuadraticInt(-self.a, -self.b, self.ring)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QuadraticInt(self.a - o.a, self.b - o.b, self.ring)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        p, q = _RING_RELATION[self.ring]
        bb = self.b * o.b
        return QuadraticInt(self.a * o.a + p * bb, self.a * o.b + self.b * o.a + q * bb, self.ring)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> QuadraticInt:
        if k < 0:
            return (QuadraticInt(1, 0, self.ring) / self) ** (-k)
        result = QuadraticInt(1, 0, self.ring)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> QuadraticInt:
        """Galois conjugate: tau -> 1 - tau, sqrt2 -> -sqrt2."""
        if self.ring == "tau":
            return QuadraticInt(self.a + self.b, -self.b, self.ring)
        return QuadraticInt(self.a, -self.b, self.ring)

    def norm(self) -> int | Fraction:
        n = self * self.conj()
        assert n.b == 0
        return n.a

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        num = self * o.conj()
        return QuadraticInt(Fraction(num.a) / n, Fraction(num.b) / n, self.ring)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o / self

    def sign(self) -> int:
        """Exact sign of the real number a + b*theta."""
        a, b = self.a, self.b
        if self.ring == "tau":
            # a + b*tau = (2a + b)/2 + b*sqrt5/2
            a, b, d = 2 * a + b, b, 5
        else:
            d = 2
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb if sa == 0 else sa
        # opposite signs: compare a^2 with d*b^2
        lhs, rhs = a * a, d * b * b
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def __abs__(self) -> QuadraticInt:
        return -self if self.sign() < 0 else self

    def __bool__(self) -> bool:
        return self.a != 0 or self.b != 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * _RING_THETA[self.ring]

    def mp(self, dps: int = 50):
        """High-precision value (mpmath)."""
        with mpmath.workdps(dps):
            theta = (1 + mpmath.sqrt(5)) / 2 if self.ring == "tau" else mpmath.sqrt(2)
            a, b = Fraction(self.a), Fraction(self.b)
            return mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator * theta


TAU = QuadraticInt(0, 1, "tau")
SQRT2 = QuadraticInt(0, 1, "sqrt2")


def _is_zero(x) -> bool:
    return x == 0


def exact_det(rows: Sequence[Sequence]) -> object:
    """Determinant by Gaussian elimination over the entries' field.

    Works for any entries supporting +, -, *, / and exact ``== 0``
    (int, Fraction, QuadraticInt).
    """
    m = [list(r) for r in rows]
    n = len(m)
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if not _is_zero(m[r][col])), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        p = m[col][col]
        det = _normalize(det * p)
        for r in range(col + 1, n):
            if _is_zero(m[r][col]):
                continue
            f = _to_field(m[r][col]) / p
            for c in range(col, n):
                m[r][c] = m[r][c] - f * m[col][c]
    return det


def exact_inverse(rows: Sequence[Sequence]) -> list[list]:
    n = len(rows)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not _is_zero(aug[r][col])), None)
        if pivot is None:
            raise ValidationError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [_to_field(v) / p for v in aug[col]]
        for r in range(n):
            if r != col and not _is_zero(aug[r][col]):
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [[_normalize(v) for v in row[n:]] for row in aug]


def _to_field(v):
    return Fraction(v) if isinstance(v, int) else v


def _normalize(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    if isinstance(v, QuadraticInt) and v.b == 0:
        return _normalize(Fraction(v.a))
    return v


def exact_matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    cols = list(zip(*b))
    return [[_normalize(sum((x * y for x, y in zip(row, col)), 0)) for col in cols] for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*a)]


@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice given by basis vectors (rows) with exact entries."""

    basis: tuple[tuple, ...]
    covolume: object = field(init=False, compare=False)

    def __post_init__(self) -> None:
        basis = tuple(tuple(_normalize(_coerce_entry(v)) for v in row) for row in self.basis)
        n = len(basis)
        if n == 0 or any(len(r) != n for r in basis):
            raise ValidationError("basis must be a non-empty square array")
        det = exact_det(basis)
        if _is_zero(det):
            raise ValidationError("basis vectors are linearly dependent")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "covolume", _normalize(abs(det)))

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def as_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.basis])

    def contains_lattice(self, other: Lattice) -> bool:
        """True if every basis vector of ``other`` is an integer combination of ours."""
        coeffs = exact_matmul(other.basis, exact_inverse(self.basis))
        return all(_is_integer(c) for row in coeffs for c in row)

    def same_lattice(self, other: Lattice) -> bool:
        return self.contains_lattice(other) and other.contains_lattice(self)

    @classmethod
    def integer(cls, n: int) -> Lattice:
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))


def _coerce_entry(v):
    if isinstance(v, QuadraticInt):
        return v
    return _coerce_coefficient(v)


def _is_integer(c) -> bool:
    c = _normalize(c)
    return isinstance(c, int)


def dual_lattice(lattice: Lattice) -> Lattice:
    """Dual lattice {y : x.y in Z for all x in L}, basis = inverse transpose."""
    inv = exact_inverse(lattice.basis)
    return Lattice(tuple(tuple(row) for row in transpose(inv)))


def gram_product(a: Lattice, b: Lattice) -> list[list]:
    """Matrix of inner products a_i . b_j; identity when b is dual to a."""
    return exact_matmul(a.basis, transpose(b.basis))


# ---------------------------------------------------------------- symmetry


@dataclass(frozen=True)
class OrthogonalMap:
    """Orthogonal matrix with tolerance; optionally an exact planar rotation 2*pi*p/q."""

    matrix: np.ndarray
    tol: float = 1e-9
    exact: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("orthogonal map must be square")
        if not np.allclose(m.T @ m, np.eye(m.shape[0]), atol=self.tol * 10, rtol=0):
            raise ValidationError("matrix is not orthogonal within tolerance")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def rotation(cls, p: int, q: int) -> OrthogonalMap:
        """Planar rotation by 2*pi*p/q."""
        a = 2 * math.pi * p / q
        c, s = math.cos(a), math.sin(a)
        return cls(np.array([[c, -s], [s, c]]), exact=(p, q))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def angle(self) -> float | None:
        if self.dimension != 2:
            return None
        return math.atan2(self.matrix[1, 0], self.matrix[0, 0])

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.matrix.T


def crystallographic_orders(n: int) -> set[int]:
    if n == 1:
        return {1, 2}
    if n in (2, 3):
        return {1, 2, 3, 4, 6}
    raise UnsupportedDimensionError(f"dimension {n} not supported (only 1, 2, 3)")


def is_crystallographic_rotation(rot: OrthogonalMap) -> bool:
    """Integer characteristic polynomial test (equivalently, integer trace data)."""
    if rot.exact is not None and rot.dimension == 2:
        p, q = rot.exact
        with mpmath.workdps(60):
            two_cos = 2 * mpmath.cos(2 * mpmath.pi * p / q)
            coeffs = [mpmath.mpf(1), -two_cos, mpmath.mpf(1)]
            residual = max(abs(c - mpmath.nint(c)) for c in coeffs)
        return bool(residual < rot.tol)
    coeffs = np.poly(rot.matrix).real
    return bool(np.max(np.abs(coeffs - np.round(coeffs))) < rot.tol)


def euler_totient(n: int) -> int:
    if n < 1:
        raise ValueError("totient defined for n >= 1")
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def min_embedding_dim(symmetry: int | str) -> int:
    """Smallest lattice dimension admitting the symmetry.

    Planar n-fold symmetry needs phi(n) dimensions (phi(2m) = phi(m) for odd m
    is handled by the totient itself); the icosahedral group needs 6.
    """
    if isinstance(symmetry, str):
        if symmetry.lower() in ("icosahedral", "ico", "i"):
            return 6
        raise ValueError(f"unknown symmetry {symmetry!r}")
    if symmetry < 1:
        raise ValueError("order must be positive")
    return euler_totient(symmetry)
