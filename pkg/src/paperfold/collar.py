"""Foliated collar of a polygon and the disks cut out of it.

The collar is a union of trapezoids, one per side: base the side itself,
vertical sides along the interior angle bisectors, all of one height.  The
height must keep every top between half and twice its base and the
trapezoids disjoint except along shared vertical sides.

With rational vertex coordinates and rational side lengths every
cot(half-angle) is rational, so all collar geometry stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .rationals import fmt, sqrt_exact
from .scheme import Multipolygon, Polygon, SchemeError
from .scar import ScarPair, LambdaUnit, component_certified

Point = tuple[Fraction, Fraction]


def _half_angle_cots(poly: Polygon) -> tuple[Fraction, ...]:
    """cot of half the interior angle at each vertex, exact."""
    n = len(poly.vertices)
    cots = []
    for i in range(n):
        a = poly.vertices[(i - 1) % n]
        b = poly.vertices[i]
        c = poly.vertices[(i + 1) % n]
        u_in = (b[0] - a[0], b[1] - a[1])
        u_out = (c[0] - b[0], c[1] - b[1])
        li = sqrt_exact(u_in[0] ** 2 + u_in[1] ** 2)
        lo = sqrt_exact(u_out[0] ** 2 + u_out[1] ** 2)
        if li is None or lo is None:
            raise SchemeError("irrational side length")
        ui = (u_in[0] / li, u_in[1] / li)
        uo = (u_out[0] / lo, u_out[1] / lo)
        cross = ui[0] * uo[1] - ui[1] * uo[0]
        dot = ui[0] * uo[0] + ui[1] * uo[1]
        if cross == 0:
            raise SchemeError("straight or degenerate vertex angle")
        cots.append((1 - dot) / cross)
    return tuple(cots)


@dataclass(frozen=True)
class CollarSpec:
    polygon: Polygon
    hbar: Fraction
    cots: tuple[Fraction, ...]

    def side_frame(self, i: int):
        """(base point, unit direction, inward normal, side length)."""
        poly = self.polygon
        n = len(poly.vertices)
        a, b = poly.vertices[i], poly.vertices[(i + 1) % n]
        length = poly.side_lengths[i]
        u = ((b[0] - a[0]) / length, (b[1] - a[1]) / length)
        nrm = (-u[1], u[0])  # inward for positive orientation
        return a, u, nrm, length

    def top_length(self, i: int, h: Fraction) -> Fraction:
        n = len(self.polygon.vertices)
        return self.polygon.side_lengths[i] - h * (self.cots[i] + self.cots[(i + 1) % n])

    def trapezoid(self, i: int, h: Optional[Fraction] = None) -> tuple[Point, Point, Point, Point]:
        """Base-left, base-right, top-right, top-left corners at height h."""
        h = self.hbar if h is None else Fraction(h)
        a, u, nrm, length = self.side_frame(i)
        n = len(self.polygon.vertices)
        b = (a[0] + length * u[0], a[1] + length * u[1])
        tl = (a[0] + h * (self.cots[i] * u[0] + nrm[0]),
              a[1] + h * (self.cots[i] * u[1] + nrm[1]))
        cj = self.cots[(i + 1) % n]
        tr = (b[0] + h * (-cj * u[0] + nrm[0]),
              b[1] + h * (-cj * u[1] + nrm[1]))
        return (a, b, tr, tl)

    def point(self, t: Fraction, h: Fraction) -> Point:
        """The collar parameterization: the point at boundary parameter t and
        height h, on the straight vertical leaf through the base point."""
        t = Fraction(t) % self.polygon.perimeter
        h = Fraction(h)
        if not (0 <= h <= self.hbar):
            raise SchemeError(f"height {fmt(h)} outside [0, {fmt(self.hbar)}]")
        i = self.polygon.side_index(t)
        base = self.polygon.point_at(t)
        (_, _, tr, tl) = self.trapezoid(i, self.hbar)
        s = (t - self.polygon.vertex_params[i]) / self.polygon.side_lengths[i]
        top = (tl[0] + s * (tr[0] - tl[0]), tl[1] + s * (tr[1] - tl[1]))
        lam = h / self.hbar
        return (base[0] + lam * (top[0] - base[0]), base[1] + lam * (top[1] - base[1]))

    def retract(self, t: Fraction, h: Fraction, h2: Fraction) -> Point:
        """Slide along the vertical leaf from height h down to h2 <= h."""
        if Fraction(h2) > Fraction(h):
            raise SchemeError("retraction cannot increase height")
        return self.point(t, h2)

    def height_of_radius(self, r: Fraction, rbar: Fraction) -> Fraction:
        return (self.hbar / (2 * Fraction(rbar))) * Fraction(r)


def _orient(a: Point, b: Point, c: Point) -> int:
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (v > 0) - (v < 0)


def _convex_interiors_disjoint(q1: Sequence[Point], q2: Sequence[Point]) -> bool:
    """Separating axis test for two convex polygons in positive orientation;
    sharing boundary is allowed."""
    for (pa, pb) in ((q1, q2), (q2, q1)):
        m = len(pa)
        for i in range(m):
            a, b = pa[i], pa[(i + 1) % m]
            if all(_orient(a, b, p) <= 0 for p in pb):
                return True
    return False


def _conditions_hold(poly: Polygon, cots: Sequence[Fraction], h: Fraction) -> bool:
    n = len(poly.vertices)
    spec = CollarSpec(poly, Fraction(h), tuple(cots))
    for i in range(n):
        top = spec.top_length(i, h)
        base = poly.side_lengths[i]
        if not (base / 2 <= top <= 2 * base):
            return False
    quads = [spec.trapezoid(i, h) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if not _convex_interiors_disjoint(quads[i], quads[j]):
                return False
    return True


def build_collar(mp: Multipolygon, hbar_override: Optional[Fraction] = None) -> CollarSpec:
    """Pick a collar height: the supremum passing both trapezoid conditions
    is bracketed by 40 bisection steps with exact predicates and scaled back
    by 9/10.  An override is accepted iff it passes the conditions."""
    if len(mp.polygons) != 1:
        raise SchemeError("collar construction expects a single polygon")
    poly = mp.polygons[0]
    cots = _half_angle_cots(poly)
    if hbar_override is not None:
        h = Fraction(hbar_override)
        if h <= 0 or not _conditions_hold(poly, cots, h):
            raise SchemeError(f"collar height override {fmt(h)} rejected")
        return CollarSpec(poly, h, cots)
    n = len(poly.vertices)
    hi0 = min(poly.side_lengths)
    for i in range(n):
        csum = cots[i] + cots[(i + 1) % n]
        if csum > 0:
            hi0 = min(hi0, poly.side_lengths[i] / (2 * csum))
    if _conditions_hold(poly, cots, hi0):
        best = hi0
    else:
        lo, hi = Fraction(0), hi0
        best = None
        for _ in range(40):
            mid = (lo + hi) / 2
            if mid > 0 and _conditions_hold(poly, cots, mid):
                best, lo = mid, mid
            else:
                hi = mid
        if best is None:
            raise SchemeError("no valid collar height found")
    return CollarSpec(poly, best * Fraction(9, 10), cots)


# ---------------------------------------------------------------------------
# disks cut from the collar


@dataclass
class DiskBoundary:
    r: Fraction
    h: Fraction
    n: int
    verticals: list[tuple[Fraction, tuple[Point, Point]]]   # (param, plane segment)
    horizontals: list[tuple[tuple[Fraction, Fraction], list[Point]]]  # (param interval, polyline)
    covered_intervals: list[tuple[Fraction, Fraction]]


def _component_param_intervals(pair, units, q, r):
    """Maximal boundary parameter intervals covered by q's component."""
    from .scar import coverage, _component_of_locator
    g = pair.free
    locs = [(u.free_loc, u.uid) for u in units]
    cov = coverage(g, locs, r)
    q_loc = g.locate(Fraction(q) % g.L)
    root = _component_of_locator(g, cov, q_loc)
    ivs = []
    for eid, plist in cov._pieces_by_edge.items():
        e = g.edges[eid]
        for (s, t, item) in plist:
            if cov._find(item) != root:
                continue
            ivs.append((e.a_lo + s, e.a_lo + t))
            if e.kind == "pair":
                m1 = e.mirror_const - (e.a_lo + t)
                m2 = e.mirror_const - (e.a_lo + s)
                ivs.append((m1, m2))
    ivs.sort()
    merged = []
    for (lo, hi) in ivs:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    # wrap-around join at the parameter origin
    L = g.L
    if len(merged) > 1 and merged[0][0] == 0 and merged[-1][1] == L:
        merged[0][0] = merged[-1][0] - L
        merged.pop()
    return [(lo, hi) for (lo, hi) in merged]


def disk_boundary(pair: ScarPair, spec: CollarSpec, units: Sequence[LambdaUnit],
                  q: Fraction, r: Fraction, rbar: Fraction) -> DiskBoundary:
    """Boundary of the collar disk over q's component: one trimmed vertical
    leaf per frontier point plus the horizontal subarcs joining them."""
    info = component_certified(pair, units, q, r, rbar=Fraction(rbar))
    if not info.exact or info.frontier_count is None:
        raise SchemeError("disk boundary needs a certified planar radius "
                          f"(flags: {sorted(info.flags)})")
    h = spec.height_of_radius(r, rbar)
    verticals = []
    frontier_fiber = []
    for (_, params) in info.frontier:
        for t in params:
            t = t % spec.polygon.perimeter
            frontier_fiber.append(t)
            verticals.append((t, (spec.point(t, Fraction(0)), spec.point(t, h))))
    ivs = _component_param_intervals(pair, units, q, r)
    if len(ivs) != info.frontier_count:
        raise SchemeError("covered intervals do not close up with the frontier")
    ends = sorted(x % spec.polygon.perimeter for iv in ivs for x in iv)
    if ends != sorted(frontier_fiber):
        raise SchemeError("interval endpoints do not match the frontier fiber")
    horizontals = []
    for (lo, hi) in ivs:
        pts = [spec.point(lo, h)]
        for vp in spec.polygon.vertex_params:
            for base in (vp, vp + spec.polygon.perimeter):
                if lo < base < hi:
                    pts.append(spec.point(base, h))
        pts.append(spec.point(hi, h))
        horizontals.append(((lo, hi), pts))
    return DiskBoundary(r=Fraction(r), h=h, n=info.frontier_count,
                        verticals=verticals, horizontals=horizontals,
                        covered_intervals=ivs)


def strip_turning(spec: CollarSpec, interval: tuple[Fraction, Fraction], h: Fraction,
                  samples: int = 64) -> float:
    """Total signed turning of one covered strip's boundary, in radians.

    A strip is the collar region over one covered parameter interval, below
    height h; its boundary is a simple plane polygon, so the turning is 2*pi.
    """
    (lo, hi) = interval
    pts: list[Point] = []
    for k in range(samples + 1):
        t = lo + (hi - lo) * Fraction(k, samples)
        pts.append(spec.point(t % spec.polygon.perimeter, Fraction(0)))
    for k in range(samples + 1):
        t = hi - (hi - lo) * Fraction(k, samples)
        pts.append(spec.point(t % spec.polygon.perimeter, h))
    uniq = [pts[0]]
    for p in pts[1:]:
        if p != uniq[-1]:
            uniq.append(p)
    if uniq[0] == uniq[-1]:
        uniq.pop()
    total = 0.0
    m = len(uniq)
    for i in range(m):
        a, b, c = uniq[i], uniq[(i + 1) % m], uniq[(i + 2) % m]
        v1 = (float(b[0] - a[0]), float(b[1] - a[1]))
        v2 = (float(c[0] - b[0]), float(c[1] - b[1]))
        total += math.atan2(v1[0] * v2[1] - v1[1] * v2[0], v1[0] * v2[0] + v1[1] * v2[1])
    return total


# ---------------------------------------------------------------------------
# module bounds


def annulus_module_bound(profile, r: Fraction, s: Fraction) -> float:
    """Lower bound for the module of the annulus between planar radii r < s:
    the certified goodness integral (already M-scaled)."""
    from .criterion import integral_lower_bound
    if not Fraction(r) < Fraction(s):
        raise SchemeError("need r < s")
    return integral_lower_bound(profile, r, s)


def grotzsch_bound(R: float, z1: complex, z2: complex) -> float:
    """Upper bound for the module of an annulus inside |z| <= R whose bounded
    complementary component contains z1 and z2."""
    d = abs(complex(z1) - complex(z2))
    if d == 0:
        raise SchemeError("need distinct points")
    if R <= 0:
        raise SchemeError("need positive R")
    return math.log(8 * R / d) / (2 * math.pi)
