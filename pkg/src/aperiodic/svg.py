"""Minimal SVG emitters for point sets, tilings and diffraction disc plots."""

from __future__ import annotations

import math
import os
import tempfile

import numpy as np

from .diffraction import Spectrum
from .randomtiling import RHOMB, DartRhombusConfig
from .tiling import TilingConfig

_PALETTE = {
    "thick": "#d9a441", "thin": "#4a7fb5", "thick-half": "#d9a441", "thin-half": "#4a7fb5",
    "acute": "#7fb069", "obtuse": "#c8553d", "square": "#9aa5b1",
    "rhombus": "#d9a441", "dart": "#4a7fb5",
}


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _frame(lo: np.ndarray, hi: np.ndarray, size: float, body: list[str]) -> str:
    span = max(float(np.max(hi - lo)), 1e-9)
    s = size / span
    w, h = (hi - lo) * s
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2f}" height="{h:.2f}" '
        f'viewBox="0 0 {w:.2f} {h:.2f}">\n<rect width="100%" height="100%" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _mapper(lo: np.ndarray, hi: np.ndarray, size: float):
    s = size / max(float(np.max(hi - lo)), 1e-9)

    def f(p):
        return (p[0] - lo[0]) * s, (hi[1] - p[1]) * s

    return f, s


def points_svg(positions: np.ndarray, size: float = 600.0, dot: float = 2.0) -> str:
    pos = np.asarray(positions, dtype=float)
    if pos.ndim == 1 or pos.shape[1] == 1:
        x = pos.reshape(-1)
        pos = np.column_stack([x, np.zeros_like(x)])
    if len(pos) == 0:
        return _frame(np.zeros(2), np.ones(2), size, [])
    lo, hi = pos.min(axis=0) - 1, pos.max(axis=0) + 1
    f, _ = _mapper(lo, hi, size)
    body = [f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{dot}" fill="black"/>' for x, y in map(f, pos)]
    return _frame(lo, hi, size, body)


def tiling_svg(tiling: TilingConfig, size: float = 800.0) -> str:
    polys = [tiling.polygon(t) for t in tiling.tiles]
    if not polys:
        return _frame(np.zeros(2), np.ones(2), size, [])
    allv = np.vstack(polys)
    lo, hi = allv.min(axis=0) - 0.5, allv.max(axis=0) + 0.5
    f, _ = _mapper(lo, hi, size)
    body = []
    for t, v in zip(tiling.tiles, polys):
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(f, v))
        body.append(f'<polygon points="{pts}" fill="{_PALETTE.get(t.label, "#cccccc")}" stroke="black" stroke-width="0.4"/>')
    return _frame(lo, hi, size, body)


def disc_plot_svg(spectrum: Spectrum, floor: float = 1e-3, size: float = 600.0, max_radius: float = 12.0) -> str:
    """Discs at the peak positions, area proportional to intensity; peaks
    below ``floor`` times the central intensity are omitted."""
    k = np.asarray(spectrum.k, dtype=float)
    if k.shape[1] == 1:
        k = np.column_stack([k[:, 0], np.zeros(len(k))])
    ref = spectrum.central_intensity or float(np.max(spectrum.intensity, initial=0.0))
    keep = spectrum.intensity >= floor * ref
    k, inten = k[keep], spectrum.intensity[keep]
    if len(k) == 0:
        return _frame(np.zeros(2), np.ones(2), size, [])
    ext = float(np.max(np.abs(k))) + 0.5
    lo, hi = np.array([-ext, -ext]), np.array([ext, ext])
    f, _ = _mapper(lo, hi, size)
    body = []
    for p, i in zip(k, inten):
        r = max_radius * math.sqrt(i / ref)
        x, y = f(p)
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.3f}" fill="black"/>')
    return _frame(lo, hi, size, body)


_E1, _E2 = np.array([1.0, 0.0]), np.array([0.5, math.sqrt(3) / 2])


def _piece_polygon(i: int, j: int, t: str, k: int) -> np.ndarray:
    """Isosceles third of a lattice triangle: base on edge k, apex at the centroid."""
    v = lambda a, b: a * _E1 + b * _E2  # noqa: E731
    if t == "U":
        corners = [v(i, j), v(i + 1, j), v(i, j + 1)]
        edges = [(0, 1), (0, 2), (1, 2)]
    else:
        corners = [v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]
        edges = [(2, 1), (0, 1), (0, 2)]
    a, b = edges[k]
    return np.array([corners[a], corners[b], sum(corners) / 3])


def _share_edge(a: np.ndarray, b: np.ndarray) -> bool:
    common = sum(any(np.allclose(x, y) for y in b) for x in a)
    return common == 2


def dart_rhombus_svg(cfg: DartRhombusConfig, size: float = 600.0) -> str:
    """Snapshot of a torus configuration drawn on one fundamental domain."""
    g = cfg.graph
    shifts = [a * cfg.L1 * _E1 + b * cfg.L2 * _E2 for a in (0, -1, 1) for b in (0, -1, 1)]
    polys, kinds = [], []
    for p, q in enumerate(cfg.partner):
        if p < q:
            a, b = _piece_polygon(*g.label(p)), _piece_polygon(*g.label(q))
            # a rhombus across the domain boundary: move its partner piece by a period
            b = next(b + sh for sh in shifts if _share_edge(a, b + sh))
            polys.append([a, b])
            kinds.append(g.kind(p, q))
    allv = np.vstack([x for pair in polys for x in pair])
    lo, hi = allv.min(axis=0) - 0.3, allv.max(axis=0) + 0.3
    f, _ = _mapper(lo, hi, size)
    body = []
    for pair, kind in zip(polys, kinds):
        colour = _PALETTE[kind]
        edges: dict = {}
        for poly in pair:
            for a, b in zip(poly, np.roll(poly, -1, axis=0)):
                key = frozenset((tuple(np.round(a, 9)), tuple(np.round(b, 9))))
                edges[key] = edges.get(key, 0) + 1
            pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(f, poly))
            body.append(f'<polygon points="{pts}" fill="{colour}" stroke="{colour}" stroke-width="0.5"/>')
        # outline: piece edges not shared inside the tile
        for key, c in edges.items():
            if c == 1:
                (x1, y1), (x2, y2) = map(f, key)
                body.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="black" stroke-width="0.6"/>')
    return _frame(lo, hi, size, body)
