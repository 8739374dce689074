"""Kinematic diffraction of point sets.

Fourier kernel is exp(-2 pi i k.x).  Numeric quantities come from finite
patches (normalised by region volume); analytic Bragg amplitudes of model
sets are window Fourier transforms evaluated at internal wave vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.spatial import cKDTree

from .algebra import TAU_FLOAT, Lattice, ValidationError, dual_lattice
from .cutproject import (
    IntervalWindow,
    PolygonWindow,
    ProjectionScheme,
    UnsupportedWindowError,
    _coerce_gamma,
    _slice_offset,
    lattice_points_in_box,
)
from .pattern import Pattern


@dataclass(frozen=True, eq=False)
class Autocorrelation:
    """Coefficients nu(z) per unit volume on the difference set."""

    vectors: np.ndarray
    coefficients: np.ndarray
    volume: float
    keys: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.coefficients)

    @property
    def central(self) -> float:
        return float(self.coefficients[np.argmin(np.linalg.norm(self.vectors, axis=1))])

    def value(self, z, tol: float = 1e-9) -> float:
        d = np.linalg.norm(self.vectors - np.atleast_1d(z), axis=1)
        i = int(np.argmin(d))
        return float(self.coefficients[i]) if d[i] <= tol else 0.0

    def fourier(self, k: np.ndarray) -> complex:
        phase = np.exp(-2j * np.pi * (self.vectors @ np.atleast_1d(k)))
        return complex(np.dot(self.coefficients, phase))


@dataclass(frozen=True, eq=False)
class Spectrum:
    k: np.ndarray
    k_int_norm: np.ndarray
    amplitude: np.ndarray
    intensity: np.ndarray
    provenance: str
    k_pre: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        order = np.lexsort((*np.asarray(self.k).T[::-1], -np.round(np.asarray(self.intensity), 14)))
        for name in ("k", "k_int_norm", "amplitude", "intensity", "k_pre"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v)[order])

    def __len__(self) -> int:
        return len(self.intensity)

    @property
    def central_intensity(self) -> float:
        i = np.flatnonzero(np.linalg.norm(self.k, axis=1) < 1e-12)
        return float(self.intensity[i[0]]) if len(i) else 0.0

    def rows(self):
        for j in range(len(self)):
            kin = self.k_int_norm[j]
            yield [*self.k[j], None if kin is None or np.isnan(kin) else kin, self.intensity[j]]

    def nearest(self, k, tol: float = 1e-6) -> int | None:
        d = np.linalg.norm(self.k - np.atleast_1d(k), axis=1)
        i = int(np.argmin(d))
        return i if d[i] <= tol else None


# ---------------------------------------------------------------- numerics


def _difference_counts(p: Pattern, r_max: float | None):
    pos = p.positions
    exact = p.keys is not None
    keys = p.keys if exact else None
    counts: dict[tuple, int] = {}
    vecs: dict[tuple, np.ndarray] = {}

    def add(ii, jj):
        if exact:
            diff = keys[ii] - keys[jj]
        else:
            diff = np.round((pos[ii] - pos[jj]) / 1e-9).astype(np.int64)
        uniq, inv, cnt = np.unique(diff, axis=0, return_inverse=True, return_counts=True)
        inv = inv.reshape(-1)
        for u, c, first in zip(map(tuple, uniq.tolist()), cnt, _first_index(inv, len(uniq))):
            counts[u] = counts.get(u, 0) + int(c)
            if u not in vecs:
                vecs[u] = pos[ii[first]] - pos[jj[first]]

    n = len(pos)
    if r_max is None:
        step = max(1, 2_000_000 // max(n, 1))
        for s in range(0, n, step):
            ii = np.repeat(np.arange(s, min(n, s + step)), n)
            jj = np.tile(np.arange(n), min(n, s + step) - s)
            add(ii, jj)
    else:
        pairs = cKDTree(pos).query_pairs(r_max + 1e-9, output_type="ndarray")
        ii = np.concatenate([pairs[:, 0], pairs[:, 1], np.arange(n)])
        jj = np.concatenate([pairs[:, 1], pairs[:, 0], np.arange(n)])
        add(ii, jj)
    return counts, vecs


def _first_index(inv: np.ndarray, m: int) -> np.ndarray:
    first = np.full(m, len(inv))
    np.minimum.at(first, inv, np.arange(len(inv)))
    return first


def autocorrelation(p: Pattern, r_max: float | None) -> Autocorrelation:
    """nu(z) = #{(x, y): x - y = z} / V for |z| <= r_max (all differences when r_max is None)."""
    if r_max is not None and r_max <= 0:
        raise ValidationError("r_max must be positive")
    if len(p) == 0:
        raise ValidationError("empty pattern")
    counts, vecs = _difference_counts(p, r_max)
    keys = sorted(counts)
    vectors = np.array([vecs[k] for k in keys])
    if r_max is not None:
        keep = np.linalg.norm(vectors, axis=1) <= r_max + 1e-9
        keys = [k for k, m in zip(keys, keep) if m]
        vectors = vectors[keep]
    coeff = np.array([counts[k] for k in keys], dtype=float) / p.region.volume
    return Autocorrelation(vectors, coeff, p.region.volume, np.array(keys) if p.keys is not None else None)


def structure_factor(p: Pattern, k) -> complex:
    """(1/V) sum over points of exp(-2 pi i k.x)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if len(p) == 0:
        return 0j
    return complex(np.exp(-2j * np.pi * (p.positions @ k)).sum() / p.region.volume)


def structure_factors(p: Pattern, ks: np.ndarray, chunk: int = 256) -> np.ndarray:
    ks = np.atleast_2d(np.asarray(ks, dtype=float))
    out = np.empty(len(ks), dtype=complex)
    for s in range(0, len(ks), chunk):
        ph = np.exp(-2j * np.pi * (p.positions @ ks[s : s + chunk].T))
        out[s : s + chunk] = ph.sum(axis=0) / p.region.volume
    return out


def wiener_check(p: Pattern, k_grid, r_max: float | None = None) -> float:
    """Max over k of |V |S(k)|^2 - sum_z nu(z) e^{-2 pi i k z}| relative to the k = 0 value.

    With all differences included both sides agree up to rounding; a finite
    r_max exposes the truncation discrepancy.
    """
    ks = np.atleast_2d(np.asarray(k_grid, dtype=float))
    if ks.shape[1] != p.dim:
        ks = ks.reshape(-1, p.dim)
    if len(p) == 0:
        return 0.0
    ac = autocorrelation(p, r_max)
    V = p.region.volume
    lhs = V * np.abs(structure_factors(p, ks)) ** 2
    rhs = np.array([ac.fourier(k).real for k in ks])
    central = len(p) ** 2 / V
    return float(np.max(np.abs(lhs - rhs)) / central)


# ----------------------------------------------------------------- spectra


def lattice_diffraction(L: Lattice, K: float) -> Spectrum:
    """Bragg peaks d^2 on all dual-lattice points with |k| <= K."""
    if K <= 0:
        raise ValidationError("cutoff must be positive")
    dual = dual_lattice(L).as_float()
    n = L.dimension
    d = 1.0 / float(L.covolume)
    pts = lattice_points_in_box(dual.T, np.zeros(n), -K * np.ones(n), K * np.ones(n))
    ks = pts @ dual
    keep = np.linalg.norm(ks, axis=1) <= K * (1 + 1e-12)
    ks, pts = ks[keep], pts[keep]
    amp = np.full(len(ks), d, dtype=complex)
    return Spectrum(ks, np.full(len(ks), np.nan), amp, np.full(len(ks), d * d), "lattice", pts)


@dataclass(frozen=True)
class _DualData:
    phys: np.ndarray  # d x n
    internal: np.ndarray  # m x n
    comp_dual: np.ndarray  # c x n
    comp: np.ndarray  # c x n
    enum_basis: np.ndarray  # n x r


def _dual_data(scheme: ProjectionScheme) -> _DualData:
    if scheme.internal is None:
        raise UnsupportedWindowError("scheme has no internal space")
    M = scheme.full_matrix()
    n = scheme.n
    comp = null_space(M).T if M.shape[0] < n else np.zeros((0, n))
    sq = np.vstack([M, comp])
    D = np.linalg.inv(sq).T
    d, m = scheme.d, scheme.internal.out_dim
    if len(comp):
        # representatives of Z^n modulo vectors that only move the complement
        enum_basis = np.eye(n, dtype=np.int64)[:, : n - len(comp)]
    else:
        enum_basis = np.eye(n, dtype=np.int64)
    return _DualData(D[:d], D[d : d + m], D[d + m :], comp, enum_basis)


def bragg_amplitude(scheme: ProjectionScheme, k_pre, gamma=None) -> tuple[np.ndarray, complex]:
    """Physical wave vector and Bragg amplitude for a dual lattice vector.

    Per slice: (1/covolume) * integral over W of exp(2 pi i k_int.y), which is
    d/vol(W) times the transform of the indicator of -W; slice phases come
    from the complement coordinate of the class heights.
    """
    ks, amps = bragg_amplitudes(scheme, np.atleast_2d(k_pre), gamma)
    return ks[0], complex(amps[0])


def bragg_amplitudes(scheme: ProjectionScheme, k_pres: np.ndarray, gamma=None) -> tuple[np.ndarray, np.ndarray]:
    kp = np.atleast_2d(np.asarray(k_pres, dtype=float))
    if kp.shape[1] != scheme.n:
        raise ValidationError(f"dual vectors must have {scheme.n} components")
    dd = _dual_data(scheme)
    gamma = _coerce_gamma(scheme, gamma)
    gf = gamma.as_float()
    q = kp @ dd.internal.T
    kc = kp @ dd.comp_dual.T
    amp = np.zeros(len(kp), dtype=complex)
    for s in scheme.slices:
        w = s.window
        if not isinstance(w, (IntervalWindow, PolygonWindow)):
            raise UnsupportedWindowError(type(w).__name__)
        xc = dd.comp @ (_slice_offset(scheme, s, gamma) + gf)
        amp += np.exp(2j * np.pi * (kc @ xc)) * w.fourier_many(q) / scheme.slice_covolume(s)
    amp *= np.exp(-2j * np.pi * (kp @ gf))
    return kp @ dd.phys.T, amp


def envelope_constant(scheme: ProjectionScheme) -> float:
    """c with intensity * |k_int|^2 <= c for every peak.

    Interval: |a| <= 1/(covol * pi |q|), i.e. c = d^2/(pi w)^2.  Polygon:
    |integral| <= perimeter/(2 pi |q|) from the edge-sum representation.
    """
    total = 0.0
    for s in scheme.slices:
        w = s.window
        if isinstance(w, IntervalWindow):
            total += 1.0 / math.pi / scheme.slice_covolume(s)
        elif isinstance(w, PolygonWindow):
            v = w.float_vertices()
            per = float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())
            total += per / (2 * math.pi) / scheme.slice_covolume(s)
        else:
            raise UnsupportedWindowError(type(w).__name__)
    return total * total


def model_set_spectrum(scheme: ProjectionScheme, gamma=None, K: float = 5.0, intensity_floor: float = 1e-3) -> Spectrum:
    """All Bragg peaks with |k| <= K and intensity >= floor * central intensity.

    Exhaustive: the envelope bounds |k_int| by sqrt(c / (floor * d^2)).
    """
    if intensity_floor <= 0:
        raise ValidationError("intensity_floor must be positive")
    if K <= 0:
        raise ValidationError("K must be positive")
    dd = _dual_data(scheme)
    d = scheme.density
    central = d * d
    qmax = math.sqrt(envelope_constant(scheme) / (intensity_floor * central))
    E = dd.enum_basis
    A = np.vstack([dd.phys, dd.internal]) @ E
    lo = np.concatenate([-K * np.ones(scheme.d), -qmax * np.ones(len(dd.internal))])
    ys = lattice_points_in_box(A, np.zeros(A.shape[0]), lo, -lo)
    pres = ys @ E.T
    ks = pres @ dd.phys.T
    qs = pres @ dd.internal.T
    keep = (np.linalg.norm(ks, axis=1) <= K * (1 + 1e-12)) & (np.linalg.norm(qs, axis=1) <= qmax * (1 + 1e-12))
    pres, ks, qs = pres[keep], ks[keep], qs[keep]
    amps = bragg_amplitudes(scheme, pres, gamma)[1] if len(pres) else np.zeros(0, dtype=complex)
    inten = np.abs(amps) ** 2
    sel = inten >= intensity_floor * central * (1 - 1e-12)
    return Spectrum(
        ks[sel],
        np.linalg.norm(qs[sel], axis=1),
        amps[sel],
        inten[sel],
        "analytic",
        pres[sel],
        {"scheme": scheme.name, "K": K, "floor": intensity_floor, "qmax": qmax, "density": d},
    )


def numeric_spectrum(p: Pattern, ks: np.ndarray) -> Spectrum:
    ks = np.atleast_2d(np.asarray(ks, dtype=float))
    amps = structure_factors(p, ks)
    return Spectrum(ks, np.full(len(ks), np.nan), amps, np.abs(amps) ** 2, "numeric")


# ------------------------------------------------------------ almost periods


def _fibonacci_numbers(limit: int) -> list[int]:
    out, a, b = [], 1, 2
    while a <= limit:
        out.append(a)
        a, b = b, a + b
    return out


def almost_periods(eps: float, search_range=(1, 1000), samples: int = 100_000, exhaustive_limit: int = 100_000) -> list[float]:
    """t = 2 pi m with sup_x |f(x) - f(x + t)| < eps for f(x) = sin x + sin(tau x).

    Candidates: every m in range when it is small enough, otherwise small m
    plus convergent denominators of tau (Fibonacci numbers) and their sums.
    The sup is estimated on a dense sample after an exact-sup prefilter
    (the deviation is 2|sin(pi m tau)| in the limit of infinite sampling).
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    lo, hi = int(search_range[0]), int(search_range[1])
    if hi - lo <= exhaustive_limit:
        cand = np.arange(lo, hi + 1)
    else:
        fib = _fibonacci_numbers(hi)
        extra = {a * f for f in fib for a in (1, 2, 3)} | {f + g for f in fib for g in fib}
        cand = np.array(sorted(set(range(lo, min(hi, lo + 1000) + 1)) | {m for m in extra if lo <= m <= hi}))
    analytic = 2 * np.abs(np.sin(np.pi * ((cand * TAU_FLOAT) % 2.0)))
    cand = cand[analytic < 2 * eps]
    x = np.linspace(0.0, 200 * np.pi, samples)
    f0 = np.sin(x) + np.sin(TAU_FLOAT * x)
    out = []
    for m in cand:
        t = 2 * np.pi * m
        # sin(x + t) = sin(x) exactly for t in 2 pi Z; only the tau-part shifts
        shift = 2 * np.pi * ((m * TAU_FLOAT) % 1.0)
        ft = np.sin(x) + np.sin(TAU_FLOAT * x + shift)
        if float(np.max(np.abs(ft - f0))) < eps:
            out.append(float(t))
    return out
