"""Deterministic SVG rendering of schemes, scars, collars, and disk systems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .scheme import FiniteScheme
from .scar import ScarGraph

PALETTE = [
    "#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#d68910",
    "#148f77", "#7b241c", "#2e4053", "#a04000", "#5b2c6f",
]


@dataclass
class Scene:
    width: float = 640.0
    height: float = 640.0
    elements: list[str] = field(default_factory=list)
    bounds: Optional[tuple[float, float, float, float]] = None

    def _grow(self, x: float, y: float):
        if self.bounds is None:
            self.bounds = (x, y, x, y)
        else:
            (x0, y0, x1, y1) = self.bounds
            self.bounds = (min(x0, x), min(y0, y), max(x1, x), max(y1, y))

    def polyline(self, pts: Sequence[tuple], stroke: str = "#000000",
                 width: float = 0.004, dash: Optional[str] = None,
                 fill: str = "none", close: bool = False):
        coords = []
        for (x, y) in pts:
            fx, fy = float(x), float(y)
            self._grow(fx, fy)
            coords.append(f"{fx:.6g},{fy:.6g}")
        d = " ".join(coords)
        tag = "polygon" if close else "polyline"
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.elements.append(
            f'<{tag} points="{d}" fill="{fill}" stroke="{stroke}" '
            f'stroke-width="{width:.6g}"{dash_attr} />'
        )

    def circle(self, c: tuple, r: float, fill: str = "#000000"):
        fx, fy = float(c[0]), float(c[1])
        self._grow(fx - r, fy - r)
        self._grow(fx + r, fy + r)
        self.elements.append(
            f'<circle cx="{fx:.6g}" cy="{fy:.6g}" r="{r:.6g}" fill="{fill}" />'
        )

    def curve(self, a: tuple, b: tuple, ctrl: tuple, stroke: str, width: float = 0.003):
        for (x, y) in (a, b, ctrl):
            self._grow(float(x), float(y))
        self.elements.append(
            f'<path d="M {float(a[0]):.6g} {float(a[1]):.6g} '
            f'Q {float(ctrl[0]):.6g} {float(ctrl[1]):.6g} '
            f'{float(b[0]):.6g} {float(b[1]):.6g}" fill="none" '
            f'stroke="{stroke}" stroke-width="{width:.6g}" />'
        )

    def to_svg(self) -> str:
        (x0, y0, x1, y1) = self.bounds or (0.0, 0.0, 1.0, 1.0)
        pad = 0.05 * max(x1 - x0, y1 - y0, 1e-9)
        vb = (x0 - pad, y0 - pad, (x1 - x0) + 2 * pad, (y1 - y0) + 2 * pad)
        header = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{self.width:.6g}" height="{self.height:.6g}" '
            f'viewBox="{vb[0]:.6g} {vb[1]:.6g} {vb[2]:.6g} {vb[3]:.6g}">\n'
            f'<g transform="translate(0,{(2 * y0 + (y1 - y0)):.6g}) scale(1,-1)">\n'
        )
        return header + "\n".join(self.elements) + "\n</g>\n</svg>\n"


def _families(fs: FiniteScheme) -> dict[str, str]:
    fams = sorted({_family_of(p, fs) for p in fs.pairings})
    return {f: PALETTE[i % len(PALETTE)] for i, f in enumerate(fams)}


def _family_of(pairing, fs: FiniteScheme) -> str:
    # pairings from one generator family share a length ratio chain; group by
    # the base pairing whose repeated rule images produce them (best effort:
    # by congruent log-length class against the base list)
    for base in fs.scheme.pairings:
        if pairing.key() == base.key():
            return f"base:{base.a_lo}"
    best = None
    for base in fs.scheme.pairings:
        if pairing.length <= base.length:
            ratio = base.length / pairing.length
            key = (base.a_lo, base.a_hi)
            if best is None or ratio < best[0]:
                best = (ratio, f"base:{base.a_lo}")
    return best[1] if best else "base:?"


def scheme_scene(fs: FiniteScheme) -> Scene:
    sc = Scene()
    poly = fs.scheme.multipolygon.polygons[0]
    sc.polyline(list(poly.vertices), stroke="#222222", width=0.006, close=True)
    colors = _families(fs)
    for p in sorted(fs.pairings, key=lambda p: p.key()):
        color = colors[_family_of(p, fs)]
        a_pts = [poly.point_at(p.a_lo), poly.point_at(p.a_hi)]
        b_pts = [poly.point_at(p.b_lo), poly.point_at(p.b_hi)]
        sc.polyline(a_pts, stroke=color, width=0.012)
        sc.polyline(b_pts, stroke=color, width=0.012)
        ma = poly.point_at((p.a_lo + p.a_hi) / 2)
        mb = poly.point_at((p.b_lo + p.b_hi) / 2)
        ctrl = ((float(ma[0]) + float(mb[0])) / 2.0, (float(ma[1]) + float(mb[1])) / 2.0)
        centroid = (sum(float(v[0]) for v in poly.vertices) / len(poly.vertices),
                    sum(float(v[1]) for v in poly.vertices) / len(poly.vertices))
        ctrl = (0.5 * ctrl[0] + 0.5 * centroid[0], 0.5 * ctrl[1] + 0.5 * centroid[1])
        sc.curve(ma, mb, ctrl, stroke=color)
    for (lo, hi) in fs.gaps:
        sc.polyline([poly.point_at(lo), poly.point_at(hi)], stroke="#bbbbbb", width=0.013)
    return sc


def scar_scene(graph: ScarGraph) -> Scene:
    """Radial embedding of the scar: breadth-first from a maximal-degree
    node, angles allocated by subtree leaf counts, unit depth rings."""
    sc = Scene()
    n = len(graph.nodes)
    deg = [0] * n
    for e in graph.edges:
        deg[e.u] += 1
        deg[e.v] += 1
    root = max(range(n), key=lambda i: (deg[i], -i))
    children: dict[int, list[tuple[int, int]]] = {}
    seen = {root}
    order = [root]
    tree_parent = {root: None}
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for (v, eid, _w) in sorted(graph.adj[u], key=lambda x: (x[1])):
            if v not in seen:
                seen.add(v)
                children.setdefault(u, []).append((v, eid))
                tree_parent[v] = u
                order.append(v)
    leaves: dict[int, int] = {}
    for u in reversed(order):
        kids = children.get(u, [])
        leaves[u] = max(1, sum(leaves[v] for (v, _) in kids))
    pos: dict[int, tuple[float, float]] = {root: (0.0, 0.0)}
    spans = {root: (0.0, 2 * math.pi)}
    depth = {root: 0}
    for u in order:
        (a0, a1) = spans[u]
        kids = children.get(u, [])
        total = sum(leaves[v] for (v, _) in kids) or 1
        cur = a0
        for (v, _eid) in kids:
            frac = leaves[v] / total
            b0, b1 = cur, cur + (a1 - a0) * frac
            cur = b1
            spans[v] = (b0, b1)
            depth[v] = depth[u] + 1
            ang = (b0 + b1) / 2
            rad = depth[v]
            pos[v] = (rad * math.cos(ang), rad * math.sin(ang))
    for eid, e in enumerate(graph.edges):
        if e.u in pos and e.v in pos:
            dash = "0.08,0.05" if e.kind == "gap" else None
            color = "#999999" if e.kind == "gap" else "#1b6ca8"
            sc.polyline([pos[e.u], pos[e.v]], stroke=color, width=0.02, dash=dash)
    for u, p in pos.items():
        node = graph.nodes[u]
        big = len(node.params) != 2 or node.has_poly_vertex
        sc.circle(p, 0.045 if big else 0.02,
                  fill="#c0392b" if node.touches_gap else "#222222")
    return sc


def collar_scene(spec) -> Scene:
    sc = Scene()
    poly = spec.polygon
    sc.polyline(list(poly.vertices), stroke="#222222", width=0.006, close=True)
    n = len(poly.vertices)
    for i in range(n):
        quad = spec.trapezoid(i)
        sc.polyline(list(quad), stroke="#1e8449", width=0.004, close=True)
    for k in (1, 2, 3):
        h = spec.hbar * Fraction(k, 4)
        ring = []
        for i in range(n):
            (_, _, tr, tl) = spec.trapezoid(i, h)
            ring.extend([tl, tr])
        sc.polyline(ring + ring[:1], stroke="#8e44ad", width=0.002)
    return sc


def disk_scene(spec, disks: Sequence, colors: Optional[Sequence[str]] = None) -> Scene:
    sc = collar_scene(spec)
    for i, disk in enumerate(disks):
        color = (colors[i] if colors else PALETTE[i % len(PALETTE)])
        for (_t, seg) in disk.verticals:
            sc.polyline(list(seg), stroke=color, width=0.006)
        for (_iv, pts) in disk.horizontals:
            sc.polyline(pts, stroke=color, width=0.006)
    return sc


def write_svg(scene: Scene, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scene.to_svg())
