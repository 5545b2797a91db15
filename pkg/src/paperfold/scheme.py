"""Folding schemes: polygons with boundary segments glued in pairs.

A scheme consists of a multipolygon with exact rational vertex coordinates
and a collection of length-preserving, orientation-reversing identifications
of boundary segments.  Countable collections are described by a finite list
of base pairings plus affine self-similarity rules that replicate pairings
into ever smaller copies.  Truncating such a generator yields a finite
scheme whose uncovered boundary intervals ("gaps") carry the unexpanded
tail.

Boundary coordinates are arc-length parameters in [0, L) along the
positively oriented boundary, exact rationals throughout.  Irrational side
lengths are rejected: exact fullness checks and exact breakpoint arithmetic
need rational arc lengths.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

from .rationals import fmt, sqrt_exact

Frac = Fraction
Point = tuple[Fraction, Fraction]


class SchemeError(Exception):
    """Structural problem that makes a scheme unusable."""


# ---------------------------------------------------------------------------
# geometry primitives


def _orient(a: Point, b: Point, c: Point) -> int:
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (v > 0) - (v < 0)


def _on_segment(a: Point, b: Point, p: Point) -> bool:
    if _orient(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Exact closed-segment intersection test."""
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return (
        (o1 == 0 and _on_segment(a, b, c))
        or (o2 == 0 and _on_segment(a, b, d))
        or (o3 == 0 and _on_segment(c, d, a))
        or (o4 == 0 and _on_segment(c, d, b))
    )


def point_in_polygon(vertices: tuple[Point, ...], p: Point) -> bool:
    """Exact point-in-closed-polygon test (boundary counts as inside)."""
    n = len(vertices)
    for i in range(n):
        if _on_segment(vertices[i], vertices[(i + 1) % n], p):
            return True
    inside = False
    x, y = p
    for i in range(n):
        (x1, y1), (x2, y2) = vertices[i], vertices[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            # exact crossing test against the horizontal ray to +inf
            t = Fraction(y - y1, y2 - y1)
            xc = x1 + t * (x2 - x1)
            if xc > x:
                inside = not inside
    return inside


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, positively oriented, rational coordinates and side lengths."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise SchemeError("polygon needs at least 3 vertices")
        lengths = []
        for i in range(len(self.vertices)):
            a = self.vertices[i]
            b = self.vertices[(i + 1) % len(self.vertices)]
            l2 = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
            if l2 == 0:
                raise SchemeError("zero-length polygon side")
            l = sqrt_exact(l2)
            if l is None:
                raise SchemeError("irrational side length (not representable)")
            lengths.append(l)
        object.__setattr__(self, "_side_lengths", tuple(lengths))
        params = [Fraction(0)]
        for l in lengths[:-1]:
            params.append(params[-1] + l)
        object.__setattr__(self, "_vertex_params", tuple(params))
        object.__setattr__(self, "_perimeter", params[-1] + lengths[-1])

    @property
    def side_lengths(self) -> tuple[Fraction, ...]:
        return self._side_lengths

    @property
    def vertex_params(self) -> tuple[Fraction, ...]:
        return self._vertex_params

    @property
    def perimeter(self) -> Fraction:
        return self._perimeter

    def signed_area2(self) -> Fraction:
        s = Fraction(0)
        n = len(self.vertices)
        for i in range(n):
            (x1, y1), (x2, y2) = self.vertices[i], self.vertices[(i + 1) % n]
            s += x1 * y2 - x2 * y1
        return s

    def is_simple(self) -> bool:
        n = len(self.vertices)
        for i in range(n):
            a, b = self.vertices[i], self.vertices[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                c, d = self.vertices[j], self.vertices[(j + 1) % n]
                if segments_intersect(a, b, c, d):
                    return False
        return True

    def side_index(self, t: Fraction) -> int:
        """Index of the side containing boundary parameter t (left-closed)."""
        t = t % self.perimeter
        lo, hi = 0, len(self.vertices) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._vertex_params[mid] <= t:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def point_at(self, t: Fraction) -> Point:
        """Plane point at boundary arc-length parameter t."""
        t = t % self.perimeter
        i = self.side_index(t)
        a = self.vertices[i]
        b = self.vertices[(i + 1) % len(self.vertices)]
        s = (t - self._vertex_params[i]) / self._side_lengths[i]
        return (a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]))


@dataclass(frozen=True)
class Multipolygon:
    polygons: tuple[Polygon, ...]

    @property
    def boundary_length(self) -> Fraction:
        return sum((p.perimeter for p in self.polygons), Fraction(0))

    def disjoint(self) -> bool:
        polys = self.polygons
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                a, b = polys[i], polys[j]
                na, nb = len(a.vertices), len(b.vertices)
                for k in range(na):
                    for m in range(nb):
                        if segments_intersect(
                            a.vertices[k], a.vertices[(k + 1) % na],
                            b.vertices[m], b.vertices[(m + 1) % nb],
                        ):
                            return False
                if point_in_polygon(a.vertices, b.vertices[0]) or point_in_polygon(b.vertices, a.vertices[0]):
                    return False
        return True


# ---------------------------------------------------------------------------
# pairings and generator rules


@dataclass(frozen=True, order=True)
class Pairing:
    """Orientation-reversing identification of two boundary segments.

    Both segments are stored by increasing boundary parameter; the gluing
    sends a_lo <-> b_hi (and a_hi <-> b_lo), which is the orientation
    reversing convention.  Segments must not cross the parameter origin.
    """

    a_lo: Fraction
    a_hi: Fraction
    b_lo: Fraction
    b_hi: Fraction
    poly: int = 0

    def __post_init__(self):
        if not (self.a_lo < self.a_hi and self.b_lo < self.b_hi):
            raise SchemeError("pairing segments must have positive length")
        if self.a_lo > self.b_lo:
            raise SchemeError("pairing segments must be in boundary order")
        if self.a_hi - self.a_lo != self.b_hi - self.b_lo:
            raise SchemeError(
                f"pairing length mismatch: {fmt(self.a_hi - self.a_lo)} vs {fmt(self.b_hi - self.b_lo)}"
            )
        if self.a_hi > self.b_lo:
            raise SchemeError("pairing segments overlap")

    @property
    def length(self) -> Fraction:
        return self.a_hi - self.a_lo

    @property
    def is_fold(self) -> bool:
        return self.a_hi == self.b_lo

    def mirror(self, x: Fraction) -> Fraction:
        """Image of a parameter of either segment under the identification."""
        return self.a_lo + self.b_hi - x

    def key(self):
        return (self.poly, self.a_lo, self.a_hi, self.b_lo, self.b_hi)

    def segments(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        return ((self.a_lo, self.a_hi), (self.b_lo, self.b_hi))


@dataclass(frozen=True)
class RulePiece:
    src_lo: Fraction
    src_hi: Fraction
    dst_lo: Fraction
    dst_hi: Fraction

    def __post_init__(self):
        if not (self.src_lo < self.src_hi and self.dst_lo < self.dst_hi):
            raise SchemeError("degenerate rule piece")

    @property
    def sigma(self) -> Fraction:
        return (self.dst_hi - self.dst_lo) / (self.src_hi - self.src_lo)

    def contains(self, lo: Fraction, hi: Fraction) -> bool:
        return self.src_lo <= lo and hi <= self.src_hi

    def apply(self, x: Fraction) -> Fraction:
        return self.dst_lo + (x - self.src_lo) * self.sigma


@dataclass(frozen=True)
class Rule:
    """Affine self-similarity rule; pieces share a contraction ratio.

    A pairing is replicated when each of its two segments fits inside some
    piece's source interval; the replica applies the piece maps segmentwise.
    """

    name: str
    pieces: tuple[RulePiece, ...]

    def __post_init__(self):
        sigmas = {p.sigma for p in self.pieces}
        if len(sigmas) != 1:
            raise SchemeError(f"rule {self.name}: pieces disagree on contraction ratio")
        sigma = next(iter(sigmas))
        if not (0 < sigma < 1):
            raise SchemeError(f"rule {self.name}: contraction ratio must be in (0,1)")

    @property
    def sigma(self) -> Fraction:
        return self.pieces[0].sigma

    def _piece_for(self, lo: Fraction, hi: Fraction) -> Optional[RulePiece]:
        for p in self.pieces:
            if p.contains(lo, hi):
                return p
        return None

    def apply_to_pairing(self, q: Pairing) -> Optional[Pairing]:
        pa = self._piece_for(q.a_lo, q.a_hi)
        pb = self._piece_for(q.b_lo, q.b_hi)
        if pa is None or pb is None:
            return None
        a = sorted((pa.apply(q.a_lo), pa.apply(q.a_hi)))
        b = sorted((pb.apply(q.b_lo), pb.apply(q.b_hi)))
        (a, b) = sorted((tuple(a), tuple(b)))
        return Pairing(a[0], a[1], b[0], b[1], q.poly)

    def apply_to_param(self, x: Fraction) -> list[Fraction]:
        return [p.apply(x) for p in self.pieces if p.src_lo <= x <= p.src_hi]


@dataclass(frozen=True)
class CantorSpec:
    """Self-similar Cantor set on [lo, hi]: iteratively remove the open
    middle portion of relative length `ratio` from every retained piece."""

    lo: Fraction
    hi: Fraction
    ratio: Fraction

    def __post_init__(self):
        if not (self.lo < self.hi and 0 < self.ratio < 1):
            raise SchemeError("bad cantor spec")

    def _children(self, a: Fraction, b: Fraction):
        side = (b - a) * (1 - self.ratio) / 2
        return (a, a + side), (b - side, b)

    def contains(self, x: Fraction, max_depth: int = 200) -> bool:
        a, b = self.lo, self.hi
        if not (a <= x <= b):
            return False
        seen = set()
        for _ in range(max_depth):
            if x == a or x == b:
                return True
            (l1, r1), (l2, r2) = self._children(a, b)
            if l1 <= x <= r1:
                a, b = l1, r1
            elif l2 <= x <= r2:
                a, b = l2, r2
            else:
                return False
            pos = (x - a) / (b - a)
            if pos in seen:
                return True
            seen.add(pos)
        return True  # undecided at depth cap: conservative

    def intersects(self, lo: Fraction, hi: Fraction, max_depth: int = 200) -> bool:
        """Does the Cantor set meet the closed interval [lo, hi]?"""
        if hi < self.lo or lo > self.hi:
            return False
        stack = [(self.lo, self.hi, 0)]
        while stack:
            a, b, d = stack.pop()
            if b < lo or a > hi:
                continue
            if lo <= a <= hi or lo <= b <= hi:
                return True
            # piece strictly contains [lo, hi]; recurse
            if d >= max_depth:
                return True  # conservative
            for (ca, cb) in self._children(a, b):
                stack.append((ca, cb, d + 1))
        return False

    def endpoints_to_depth(self, depth: int) -> list[Fraction]:
        pts = []
        pieces = [(self.lo, self.hi)]
        for _ in range(depth):
            nxt = []
            for (a, b) in pieces:
                nxt.extend(self._children(a, b))
            pieces = nxt
        for (a, b) in pieces:
            pts.extend((a, b))
        return sorted(set(pts))


@dataclass(frozen=True)
class SingularSpec:
    """Declared singular boundary parameters: explicit points (closed under
    the scheme's rules) and/or Cantor set descriptions."""

    params: tuple[Fraction, ...] = ()
    cantor: tuple[CantorSpec, ...] = ()

    def is_empty(self) -> bool:
        return not self.params and not self.cantor

    def matches(self, x: Fraction) -> bool:
        return x in self.params or any(c.contains(x) for c in self.cantor)

    def meets_interval(self, lo: Fraction, hi: Fraction) -> bool:
        if any(lo <= p <= hi for p in self.params):
            return True
        return any(c.intersects(lo, hi) for c in self.cantor)


@dataclass(frozen=True)
class Meta:
    name: str = ""
    rbar: Optional[Fraction] = None
    hbar: Optional[Fraction] = None


@dataclass(frozen=True)
class FoldingScheme:
    multipolygon: Multipolygon
    pairings: tuple[Pairing, ...]
    rules: tuple[Rule, ...] = ()
    singular: SingularSpec = SingularSpec()
    meta: Meta = Meta()

    def __post_init__(self):
        object.__setattr__(self, "pairings",
                           tuple(sorted(self.pairings, key=Pairing.key)))

    @property
    def boundary_length(self) -> Fraction:
        return self.multipolygon.boundary_length

    @property
    def is_generator(self) -> bool:
        return bool(self.rules)

    def closed_singular_params(self, into_gaps=None, cap: int = 4096) -> list[Fraction]:
        """Explicit singular parameters closed under the rules.

        Expansion of a parameter stops when it falls strictly inside one of
        the intervals in `into_gaps` (an optional sorted list of (lo, hi));
        such parameters are still reported.
        """
        out = set(self.singular.params)
        work = list(self.singular.params)
        def in_gap(x):
            if not into_gaps:
                return False
            return any(lo < x < hi for (lo, hi) in into_gaps)
        while work and len(out) < cap:
            x = work.pop()
            if in_gap(x):
                continue
            for r in self.rules:
                for y in r.apply_to_param(x):
                    if y not in out:
                        out.add(y)
                        work.append(y)
        return sorted(out)


@dataclass(frozen=True)
class FiniteScheme:
    """Finite truncation: expanded pairings plus the uncovered gaps."""

    scheme: FoldingScheme
    pairings: tuple[Pairing, ...]
    gaps: tuple[tuple[Fraction, Fraction], ...]
    tail_measure: Fraction
    eps: Optional[Fraction] = None

    @property
    def boundary_length(self) -> Fraction:
        return self.scheme.boundary_length

    @property
    def max_gap(self) -> Fraction:
        return max((hi - lo for (lo, hi) in self.gaps), default=Fraction(0))


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    entries: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, check: str, ok: bool, detail: str = ""):
        self.entries.append((check, ok, detail))

    @property
    def ok(self) -> bool:
        return all(ok for (_, ok, _) in self.entries)

    def failures(self) -> list[tuple[str, str]]:
        return [(c, d) for (c, ok, d) in self.entries if not ok]


def _covered_intervals(pairings: Iterable[Pairing]) -> list[tuple[Fraction, Fraction]]:
    segs = []
    for p in pairings:
        segs.append((p.a_lo, p.a_hi))
        segs.append((p.b_lo, p.b_hi))
    segs.sort()
    return segs


def _check_interior_disjoint(pairings) -> Optional[tuple]:
    segs = _covered_intervals(pairings)
    for i in range(len(segs) - 1):
        if segs[i + 1][0] < segs[i][1]:
            return (segs[i], segs[i + 1])
    return None


def gaps_of(pairings: Iterable[Pairing], length: Fraction) -> list[tuple[Fraction, Fraction]]:
    """Maximal uncovered boundary intervals, as closed param intervals."""
    segs = _covered_intervals(pairings)
    if not segs:
        return [(Fraction(0), length)]
    out = []
    if segs[0][0] > 0:
        out.append((Fraction(0), segs[0][0]))
    cur = segs[0][1]
    for (lo, hi) in segs[1:]:
        if lo > cur:
            out.append((cur, lo))
        cur = max(cur, hi)
    if cur < length:
        out.append((cur, length))
    return out


def validate(scheme: FoldingScheme, depths: tuple[Fraction, ...] = (Fraction(1, 8), Fraction(1, 32), Fraction(1, 128))) -> ValidationReport:
    """Run all structural checks; failures are report entries, not raises."""
    rep = ValidationReport()
    mp = scheme.multipolygon
    for i, poly in enumerate(mp.polygons):
        rep.add(f"polygon[{i}].simple", poly.is_simple())
        rep.add(f"polygon[{i}].oriented", poly.signed_area2() > 0, "positive orientation required")
    rep.add("polygons.disjoint", mp.disjoint())

    if len(mp.polygons) == 1:
        L = mp.polygons[0].perimeter
        for p in scheme.pairings:
            rep.add("pairing.range", 0 <= p.a_lo and p.b_hi <= L,
                    f"pairing {fmt(p.a_lo)}..{fmt(p.b_hi)} outside [0,{fmt(L)}]")
        bad = _check_interior_disjoint(scheme.pairings)
        rep.add("pairings.interior_disjoint", bad is None,
                "" if bad is None else f"overlap near {fmt(max(bad[0][0], bad[1][0]))}..{fmt(min(bad[0][1], bad[1][1]))}")

        if not scheme.is_generator:
            total = sum((p.length for p in scheme.pairings), Fraction(0))
            rep.add("fullness.exact", 2 * total == L,
                    f"2*{fmt(total)} vs |dP|={fmt(L)}")
        else:
            tails = []
            okdisj = True
            for eps in depths:
                try:
                    fs = truncate(scheme, eps)
                except SchemeError as exc:
                    rep.add("generator.expansion", False, str(exc))
                    okdisj = False
                    break
                tails.append(fs.tail_measure)
                if _check_interior_disjoint(fs.pairings) is not None:
                    okdisj = False
            rep.add("generator.interior_disjoint", okdisj)
            if tails:
                dec = all(tails[i + 1] <= tails[i] for i in range(len(tails) - 1))
                rep.add("fullness.tail_decreasing", dec, f"tails {[fmt(t) for t in tails]}")
                rep.add("fullness.tail_small", tails[-1] <= depths[-1])
            # declared singular parameters must be accumulation points of
            # pairing endpoints: a breakpoint must exist within tail scale
            try:
                fs = truncate(scheme, depths[-1])
                endpoints = sorted({x for p in fs.pairings for x in (p.a_lo, p.a_hi, p.b_lo, p.b_hi)})
                reps_ok = True
                detail = ""
                for x in scheme.closed_singular_params(into_gaps=fs.gaps)[:64]:
                    near = _nearest(endpoints, x)
                    scale = max(fs.max_gap, Fraction(1, 10**9))
                    if near is None or abs(near - x) > scale:
                        reps_ok = False
                        detail = f"no endpoint within {fmt(scale)} of declared {fmt(x)}"
                        break
                rep.add("generator.singular_accumulation", reps_ok, detail)
            except SchemeError as exc:
                rep.add("generator.singular_accumulation", False, str(exc))
    else:
        rep.add("pairings.single_polygon", not scheme.pairings,
                "pairings on multipolygons are not supported")
    return rep


def _nearest(sorted_vals: list[Fraction], x: Fraction) -> Optional[Fraction]:
    if not sorted_vals:
        return None
    import bisect
    i = bisect.bisect_left(sorted_vals, x)
    cands = [sorted_vals[j] for j in (i - 1, i) if 0 <= j < len(sorted_vals)]
    return min(cands, key=lambda v: abs(v - x))


# ---------------------------------------------------------------------------
# plainness


@dataclass(frozen=True)
class PlainnessResult:
    plain: bool
    reason: str = ""
    witness: Optional[tuple[Pairing, Pairing]] = None


def _unlinked_scan(pairings: Iterable[Pairing]) -> Optional[tuple[Pairing, Pairing]]:
    """Noncrossing test for the matching that pairs each pairing's two
    segments; returns a linked witness pair or None.

    Segments have disjoint interiors, so in boundary order they form a word
    with each pairing label appearing twice; the matching is noncrossing
    exactly when the word reduces to nothing by cancelling adjacent equal
    letters (stack scan, cut-point invariant).
    """
    plist = list(pairings)
    word = []  # (position, label)
    for idx, p in enumerate(plist):
        for (lo, hi) in p.segments():
            word.append((lo, hi, idx))
    word.sort(key=lambda e: (e[0], e[1]))
    stack: list[int] = []
    for (_, _, idx) in word:
        if stack and stack[-1] == idx:
            stack.pop()
        else:
            stack.append(idx)
    if not stack:
        return None
    # witness: some two residual labels interleave
    pos: dict[int, list[int]] = {}
    for i, (_, _, idx) in enumerate(word):
        pos.setdefault(idx, []).append(i)
    residual = list(dict.fromkeys(stack))
    for i in range(len(residual)):
        for j in range(i + 1, len(residual)):
            (a1, a2), (b1, b2) = pos[residual[i]], pos[residual[j]]
            if (a1 < b1 < a2 < b2) or (b1 < a1 < b2 < a2):
                return (plist[residual[i]], plist[residual[j]])
    # fall back to the first two residual labels
    return (plist[residual[0]], plist[residual[1]])


def is_plain(obj: Union[FoldingScheme, FiniteScheme], eps: Fraction = Fraction(1, 64)) -> PlainnessResult:
    """Decide plainness: single polygon and an unlinked pairing collection.

    Finite schemes are decided outright by the nesting scan.  Generators are
    scanned at two truncation depths; affine order-preserving rules replicate
    nested structure into gaps, so deeper expansions cannot introduce new
    crossings once the scanned depths are clean and every expansion step
    stays interior disjoint (verified during truncation).
    """
    scheme = obj.scheme if isinstance(obj, FiniteScheme) else obj
    if len(scheme.multipolygon.polygons) > 1:
        return PlainnessResult(False, "multiple polygons")
    if isinstance(obj, FiniteScheme):
        fs_list = [obj]
    elif scheme.is_generator:
        fs_list = [truncate(scheme, eps), truncate(scheme, eps / 8)]
    else:
        fs_list = [FiniteScheme(scheme, tuple(sorted(scheme.pairings, key=Pairing.key)),
                                tuple(gaps_of(scheme.pairings, scheme.boundary_length)),
                                Fraction(0))]
    for fs in fs_list:
        witness = _unlinked_scan(fs.pairings)
        if witness is not None:
            return PlainnessResult(False, "linked pairings", witness)
    return PlainnessResult(True)


# ---------------------------------------------------------------------------
# truncation


def _children_of(p: Pairing, rules: tuple[Rule, ...]) -> list[Pairing]:
    out = []
    for r in rules:
        c = r.apply_to_pairing(p)
        if c is not None and c.length < p.length:
            out.append(c)
    return out


class _GapSet:
    """Uncovered intervals maintained incrementally; interior disjointness
    means each new segment lands inside exactly one existing gap."""

    def __init__(self, length: Fraction):
        self.starts = [Fraction(0)]
        self.ends = {Fraction(0): length}
        self.heap = [(-length, Fraction(0))]
        self.total = length

    def remove(self, lo: Fraction, hi: Fraction):
        from bisect import bisect_right, insort
        i = bisect_right(self.starts, lo) - 1
        if i < 0:
            raise SchemeError("segment outside every gap")
        glo = self.starts[i]
        ghi = self.ends.get(glo)
        if ghi is None or not (glo <= lo and hi <= ghi):
            raise SchemeError("segment overlaps covered boundary")
        self.total -= hi - lo
        del self.ends[glo]
        self.starts.pop(i)
        if lo > glo:
            self.ends[glo] = lo
            insort(self.starts, glo)
            heapq.heappush(self.heap, (-(lo - glo), glo))
        if ghi > hi:
            self.ends[hi] = ghi
            insort(self.starts, hi)
            heapq.heappush(self.heap, (-(ghi - hi), hi))

    def max_gap(self) -> Fraction:
        while self.heap:
            (neg, lo) = self.heap[0]
            if self.ends.get(lo) == lo - neg:
                return -neg
            heapq.heappop(self.heap)
        return Fraction(0)

    def intervals(self):
        return tuple((lo, self.ends[lo]) for lo in self.starts)


def _truncate_impl(scheme: FoldingScheme, eps: Optional[Fraction],
                   gap_bound: Optional[Fraction], _cap: int = 2_000_000) -> FiniteScheme:
    L = scheme.boundary_length
    expanded: list[Pairing] = []
    seen: set = set()
    gaps = _GapSet(L)
    pool: list = []

    def push(p: Pairing):
        if p.key() not in seen:
            seen.add(p.key())
            heapq.heappush(pool, (-p.length, p.a_lo, p))

    for p in scheme.pairings:
        push(p)
    n_base = len(scheme.pairings)

    def done() -> bool:
        if len(expanded) < n_base:
            return False
        if eps is not None and gaps.total > eps:
            return False
        if gap_bound is not None and gaps.max_gap() > gap_bound:
            return False
        return True

    while pool and not done():
        if len(expanded) >= _cap:
            raise SchemeError("expansion cap exceeded")
        (_, _, p) = heapq.heappop(pool)
        expanded.append(p)
        gaps.remove(p.a_lo, p.a_hi)
        gaps.remove(p.b_lo, p.b_hi)
        for c in _children_of(p, scheme.rules):
            push(c)
    if not done():
        raise SchemeError("cannot reach the requested truncation")
    expanded.sort(key=Pairing.key)
    return FiniteScheme(scheme, tuple(expanded), gaps.intervals(), gaps.total, eps)


def truncate(scheme: FoldingScheme, eps: Fraction) -> FiniteScheme:
    """Expand generator rules largest-pairing-first until the uncovered
    boundary measure is at most eps.  Deterministic: ties break on the
    smaller start parameter.  Finite schemes pass through unchanged."""
    eps = Fraction(eps)
    if eps <= 0:
        raise SchemeError("eps must be positive")
    return _truncate_impl(scheme, eps, None)


def truncate_max_gap(scheme: FoldingScheme, bound: Fraction) -> FiniteScheme:
    """Truncate until every single gap is shorter than `bound`.

    Certification of window data only needs local resolution, which the
    total tail measure tracks far too slowly for slowly-converging tails.
    """
    bound = Fraction(bound)
    if bound <= 0:
        raise SchemeError("bound must be positive")
    return _truncate_impl(scheme, None, bound)


def virtual_gap_links(fs: FiniteScheme, rounds: int = 3) -> list[tuple[int, int]]:
    """Pairs of gap indices connected by unexpanded pairings.

    Expands the generator a few more generations without adding the results
    to the scheme; every virtual pairing's two segments each lie inside some
    gap (interior disjointness), and the pair of gaps is linked.  Affine
    nesting-preserving rules replicate each link pattern inside the same gap
    pair, so the link set stabilizes after a round with no new links.
    """
    cached = getattr(fs, "_vgl_cache", None)
    if cached is not None:
        return cached
    scheme = fs.scheme
    if not scheme.rules:
        object.__setattr__(fs, "_vgl_cache", [])
        return []
    gaps = fs.gaps
    from bisect import bisect_right
    gap_lo = [g[0] for g in gaps]

    def gap_index(lo: Fraction, hi: Fraction) -> Optional[int]:
        i = bisect_right(gap_lo, lo) - 1
        if 0 <= i < len(gaps) and gaps[i][0] <= lo and hi <= gaps[i][1]:
            return i
        return None

    rule_pieces = [[(pc.src_lo, pc.src_hi, pc.dst_lo, pc.sigma) for pc in r.pieces]
                   for r in scheme.rules]

    def map_seg(pieces, lo, hi):
        for (slo, shi, dlo, sig) in pieces:
            if slo <= lo and hi <= shi:
                a, b = dlo + (lo - slo) * sig, dlo + (hi - slo) * sig
                return (a, b) if a <= b else (b, a)
        return None

    links: set[tuple[int, int]] = set()
    seen: set = set()
    frontier = [(p.a_lo, p.a_hi, p.b_lo, p.b_hi) for p in fs.pairings]
    seen.update(frontier)
    for _ in range(rounds):
        nxt = []
        new_links = set()
        for (alo, ahi, blo, bhi) in frontier:
            for pieces in rule_pieces:
                sa = map_seg(pieces, alo, ahi)
                sb = map_seg(pieces, blo, bhi)
                if sa is None or sb is None:
                    continue
                (a, b) = sorted((sa, sb))
                key = (a[0], a[1], b[0], b[1])
                if key in seen or a[1] - a[0] >= ahi - alo:
                    continue
                seen.add(key)
                nxt.append(key)
                ga = gap_index(a[0], a[1])
                gb = gap_index(b[0], b[1])
                if ga is not None and gb is not None and ga != gb:
                    new_links.add((ga, gb))
        frontier = nxt
        if not (new_links - links) and links:
            break
        links |= new_links
        if not frontier:
            break
    out = sorted(links)
    object.__setattr__(fs, "_vgl_cache", out)
    return out


# ---------------------------------------------------------------------------
# built-in schemes


def _unit_square() -> Multipolygon:
    F = Fraction
    return Multipolygon((Polygon(((F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1)))),))


def builtin_example(name: str, eps: Optional[Fraction] = None) -> Union[FoldingScheme, FiniteScheme]:
    """Built-in worked examples.

    "seq": unit square, vertical sides paired, top folded, and a countable
    self-similar family of folds on the bottom accumulating on a sequence of
    points which itself accumulates at the origin corner.

    "cantor": unit square, vertical sides paired, top folded; the bottom
    carries identifications whose singular set is a middle-thirds Cantor set.

    With eps given, the truncation at that tail is returned instead.
    """
    F = Fraction
    if name == "seq":
        scheme = FoldingScheme(
            multipolygon=_unit_square(),
            pairings=(
                Pairing(F(1), F(2), F(3), F(4)),          # vertical sides glued
                Pairing(F(2), F(5, 2), F(5, 2), F(3)),    # top side folded in half
                Pairing(F(1, 2), F(5, 8), F(7, 8), F(1)),  # outer pairing of block 0
                Pairing(F(3, 4), F(13, 16), F(13, 16), F(7, 8)),  # first fold of block 0
            ),
            rules=(
                Rule("r1", (RulePiece(F(5, 8), F(7, 8), F(5, 8), F(3, 4)),)),
                Rule("r2", (RulePiece(F(0), F(1), F(0), F(1, 2)),)),
            ),
            singular=SingularSpec(params=(F(0), F(5, 8))),
            meta=Meta(name="seq"),
        )
    elif name == "cantor":
        scheme = FoldingScheme(
            multipolygon=_unit_square(),
            pairings=(
                Pairing(F(1), F(2), F(3), F(4)),
                Pairing(F(2), F(5, 2), F(5, 2), F(3)),
                Pairing(F(2, 9), F(5, 18), F(5, 6), F(8, 9)),    # beta
                Pairing(F(5, 18), F(1, 3), F(1, 3), F(7, 18)),   # alpha fold
                Pairing(F(7, 18), F(4, 9), F(7, 9), F(5, 6)),    # gamma
            ),
            rules=(
                Rule("l", (
                    RulePiece(F(0), F(2, 3), F(0), F(2, 9)),
                    RulePiece(F(2, 3), F(1), F(8, 9), F(1)),
                )),
                Rule("r", (RulePiece(F(0), F(1), F(4, 9), F(7, 9)),)),
            ),
            singular=SingularSpec(cantor=(CantorSpec(F(0), F(2, 3), F(1, 3)),)),
            meta=Meta(name="cantor", rbar=F(1, 6), hbar=F(1, 4)),
        )
    elif name == "pillow":
        # every side folded at its midpoint; handy fully-finite test scheme
        scheme = FoldingScheme(
            multipolygon=_unit_square(),
            pairings=tuple(
                Pairing(F(i), F(2 * i + 1, 2), F(2 * i + 1, 2), F(i + 1)) for i in range(4)
            ),
            meta=Meta(name="pillow"),
        )
    else:
        raise SchemeError(f"unknown builtin {name!r}")
    if eps is not None:
        return truncate(scheme, Fraction(eps))
    return scheme
