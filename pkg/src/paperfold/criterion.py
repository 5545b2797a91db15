"""Divergence criterion machinery on scar graphs.

For the singular set L of a plain scheme, the component data cm(q;r) and
cn(q;r) of the r-neighborhood of L determine the goodness integrand
M/(cm + r*cn).  Divergence of its integral at r -> 0 at every singular
point is the sufficient condition for the conformal structure to extend,
and the per-window certified lower bounds computed here are also the
module bounds used by the nested-annulus system.

All window data is exact: between breakpoints (cluster merge radii, vertex
hitting radii, wavefront collision radii) cn is constant and cm is linear
with slope 2*cn, which the profile builder verifies at two sample radii per
subinterval against both gap-handling modes before marking a segment exact.
Non-exact segments contribute zero to every integral, keeping all reported
bounds rigorous lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .rationals import fmt
from .scheme import FiniteScheme, FoldingScheme, SchemeError, truncate, truncate_max_gap
from .scar import (
    COLLAPSE,
    FREE,
    ComponentInfo,
    LambdaUnit,
    Locator,
    ScarGraph,
    ScarPair,
    component_certified,
    coverage,
    dijkstra,
    lambda_units,
    point_units,
)

Frac = Fraction

CERTIFIED = "CERTIFIED_UNDER_HYPOTHESIS"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class CriterionParams:
    """Injectivity radius and the collar-shape constant M."""

    rbar: Fraction
    hbar: Fraction

    @property
    def M(self) -> Fraction:
        return Fraction(1, 5) * min(self.rbar / self.hbar, self.hbar / self.rbar)


# ---------------------------------------------------------------------------
# injectivity radius


def _vertex_like(graph: ScarGraph, ni: int, pair: ScarPair) -> bool:
    node = graph.nodes[ni]
    if len(node.params) != 2 or node.has_poly_vertex or node.touches_gap:
        return True
    return any(pair.matches_singular(p) for p in node.params)


def injectivity_radius(pair: ScarPair, override: Optional[Fraction] = None) -> Fraction:
    """An r̄ such that closed component balls of radius below it are proper
    subtrees.  Auto mode takes the middle third of the longest pairing edge
    with certified planar interior and returns its collapse distance to the
    vertex-like node set (gap nodes included, conservatively).  An override
    is sanity checked instead of recomputed."""
    g = pair.collapse
    if override is None and pair.fs.scheme.meta.rbar is not None:
        override = pair.fs.scheme.meta.rbar
    if override is not None:
        override = Fraction(override)
        if override <= 0:
            raise SchemeError("override must be positive")
        units = lambda_units(pair)
        r = override * Fraction(15, 16)
        for u in units[:4]:
            info = component_certified(pair, units, u.rep_param, r)
            if info.measure >= pair.free.total_measure:
                raise SchemeError(f"override rbar={fmt(override)} rejected: ball not proper")
        return override
    sing = pair.fs.scheme.singular
    best = None
    for eid, e in enumerate(g.edges):
        if e.kind != "pair":
            continue
        a1, a2 = e.a_lo, e.a_lo + e.length
        b2, b1 = e.mirror_const - e.a_lo, e.mirror_const - e.a_lo - e.length
        if sing.meets_interval(a1, a2) or sing.meets_interval(b1, b2):
            continue
        if best is None or e.length > g.edges[best].length:
            best = eid
    if best is None:
        raise SchemeError("no certified-planar edge at this truncation")
    e = g.edges[best]
    third = e.length / 3
    sources = [(Locator(edge=best, offset=third), Fraction(0)),
               (Locator(edge=best, offset=2 * third), Fraction(0))]
    dist = dijkstra(g, sources)
    rbar = None
    for ni in range(len(g.nodes)):
        if _vertex_like(g, ni, pair) and ni in dist:
            rbar = dist[ni] if rbar is None else min(rbar, dist[ni])
    if rbar is None or rbar <= 0:
        raise SchemeError("injectivity radius not positive")
    return rbar


# ---------------------------------------------------------------------------
# merge structure (single linkage over the singular units)


@dataclass
class MergeStructure:
    units: list[LambdaUnit]
    merges: list[tuple[Fraction, int, int]]  # (radius = d/2, uid, uid), ascending

    def merge_radii(self) -> list[Fraction]:
        return sorted({m[0] for m in self.merges})

    def clusters_at(self, r: Fraction) -> list[frozenset]:
        parent = {u.uid: u.uid for u in self.units}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (rad, a, b) in self.merges:
            if rad < Fraction(r):
                parent[find(a)] = find(b)
        out: dict[int, set] = {}
        for u in self.units:
            out.setdefault(find(u.uid), set()).add(u.uid)
        return [frozenset(s) for s in out.values()]

    def ncc(self, r: Fraction) -> int:
        return len(self.clusters_at(r))


def _merge_structure(graph: ScarGraph, units: Sequence[LambdaUnit]) -> MergeStructure:
    locs = [((u.free_loc if graph.mode == FREE else u.collapse_loc), u.uid) for u in units]
    from .scar import dijkstra_labeled
    dist, label = dijkstra_labeled(graph, [(loc, Fraction(0), uid) for (loc, uid) in locs])
    cands: list[tuple[Fraction, int, int]] = []
    by_edge: dict[int, list[tuple[Fraction, int]]] = {}
    for (loc, uid) in locs:
        if loc.edge is not None:
            by_edge.setdefault(loc.edge, []).append((loc.offset, uid))
    for eid, e in enumerate(graph.edges):
        du, dv = dist.get(e.u), dist.get(e.v)
        lu, lv = label.get(e.u), label.get(e.v)
        anchors = []
        if du is not None:
            anchors.append((Fraction(0), du, lu))
        for (off, uid) in sorted(by_edge.get(eid, ())):
            anchors.append((off, Fraction(0), uid))
        if dv is not None:
            anchors.append((e.length, dv, lv))
        for i in range(len(anchors) - 1):
            (p1, c1, l1), (p2, c2, l2) = anchors[i], anchors[i + 1]
            if l1 is not None and l2 is not None and l1 != l2:
                cands.append((c1 + c2 + (p2 - p1), l1, l2))
    cands.sort(key=lambda t: t[0])
    # Kruskal: keep the merges that actually join clusters
    parent = {u.uid: u.uid for u in units}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merges = []
    for (d, a, b) in cands:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            merges.append((d / 2, a, b))
    return MergeStructure(list(units), merges)


def merge_structures(pair: ScarPair, units: Sequence[LambdaUnit]):
    return _merge_structure(pair.free, units), _merge_structure(pair.collapse, units)


# ---------------------------------------------------------------------------
# goodness profiles


@dataclass(frozen=True)
class ProfileSegment:
    lo: Fraction
    hi: Fraction
    cn: int
    cm_lo: Fraction          # cm at s = lo (limit from inside the segment)
    exact: bool = True

    def cm_at(self, s: Fraction) -> Fraction:
        return self.cm_lo + 2 * self.cn * (Fraction(s) - self.lo)

    def g_at(self, s: Fraction) -> Fraction:
        return self.cm_at(s) + Fraction(s) * self.cn

    def linear_coeffs(self) -> tuple[Fraction, Fraction]:
        """g(s) = A + C*s on the segment."""
        return (self.cm_lo - 2 * self.cn * self.lo, 3 * Fraction(self.cn))


@dataclass
class GoodnessProfile:
    """Piecewise data for the goodness integrand of one component class."""

    window: tuple[Fraction, Fraction]
    M: Fraction
    segments: list[ProfileSegment]
    members: frozenset = frozenset()
    label: str = ""

    @property
    def approximate(self) -> bool:
        return any(not s.exact for s in self.segments)

    def iota(self, s: Fraction) -> float:
        s = Fraction(s)
        for seg in self.segments:
            if seg.lo < s < seg.hi or (s == seg.lo == self.window[0]) or (s == seg.hi == self.window[1]):
                if not seg.exact:
                    return 0.0
                return float(self.M / seg.g_at(s))
        return 0.0

    def g_upper(self, s: Fraction) -> Optional[Fraction]:
        for seg in self.segments:
            if seg.lo <= s <= seg.hi and seg.exact:
                return seg.g_at(s)
        return None


def integral_lower_bound(profile: GoodnessProfile, a: Fraction, b: Fraction,
                         unnormalized: bool = False,
                         allow_approximate: bool = False) -> float:
    """Certified lower bound of the goodness integral over [a, b].

    Exact segments integrate their linear form in closed form; non-exact
    segments contribute zero (only with allow_approximate).  Breakpoints are
    a null set and contribute nothing.
    """
    a, b = Fraction(a), Fraction(b)
    if a > b:
        raise SchemeError("bad integration range")
    (wlo, whi) = profile.window
    if a < wlo or b > whi:
        raise SchemeError(f"range [{fmt(a)},{fmt(b)}] outside profile window [{fmt(wlo)},{fmt(whi)}]")
    if profile.approximate and not allow_approximate:
        raise SchemeError("profile is approximate; pass allow_approximate=True")
    total = 0.0
    scale = 1.0 if unnormalized else float(profile.M)
    for seg in profile.segments:
        u, v = max(a, seg.lo), min(b, seg.hi)
        if u >= v:
            continue
        if not seg.exact:
            continue
        A, C = seg.linear_coeffs()
        if C == 0:
            total += scale * float((v - u) / A)
        else:
            total += (scale / float(C)) * math.log(float((A + C * v) / (A + C * u)))
    return total


@dataclass
class WindowProfiles:
    window: tuple[Fraction, Fraction]
    breakpoints: list[Fraction]
    classes: list[GoodnessProfile]
    certified: bool

    def profile_for(self, uid: int) -> GoodnessProfile:
        for p in self.classes:
            if uid in p.members:
                return p
        raise SchemeError("unit not in any class profile")


def _vertex_candidates(graph: ScarGraph, pair: ScarPair, dist, lo, hi) -> set[Fraction]:
    out = set()
    for ni in range(len(graph.nodes)):
        if ni in dist and lo < dist[ni] < hi and _vertex_like(graph, ni, pair):
            out.add(dist[ni])
    return out


def _peak_candidates(graph: ScarGraph, dist, src_by_edge, lo, hi) -> set[Fraction]:
    out = set()
    for eid, e in enumerate(graph.edges):
        du, dv = dist.get(e.u), dist.get(e.v)
        anchors = []
        if du is not None:
            anchors.append((Fraction(0), du))
        for (off, c) in sorted(src_by_edge.get(eid, ())):
            anchors.append((off, c))
        if dv is not None:
            anchors.append((e.length, dv))
        for i in range(len(anchors) - 1):
            (p1, c1), (p2, c2) = anchors[i], anchors[i + 1]
            peak = (c1 + c2 + (p2 - p1)) / 2
            if lo < peak < hi:
                out.add(peak)
    return out


class LambdaAnalysis:
    """Shared exact data for one truncation and one singular base set.

    Distance fields are computed once per mode and reused by every window
    and radius query.
    """

    def __init__(self, pair: ScarPair, units: Optional[Sequence[LambdaUnit]] = None):
        self.pair = pair
        self.units = list(units) if units is not None else lambda_units(pair)
        self._fields = {}
        self._src = {}
        self._cov_cache = {}
        for graph in (pair.free, pair.collapse):
            locs = [((u.free_loc if graph.mode == FREE else u.collapse_loc), u.uid)
                    for u in self.units]
            self._src[graph.mode] = locs
            self._fields[graph.mode] = dijkstra(graph, [(l, Fraction(0)) for (l, _) in locs])
        self.merge_free = _merge_structure(pair.free, self.units)
        self.merge_collapse = _merge_structure(pair.collapse, self.units)

    def graph(self, mode):
        return self.pair.free if mode == FREE else self.pair.collapse

    def coverage_at(self, mode: str, r: Fraction):
        key = (mode, Fraction(r))
        cached = self._cov_cache.get(key)
        if cached is None:
            cached = coverage(self.graph(mode), self._src[mode], r,
                              node_dist=self._fields[mode])
            if len(self._cov_cache) > 64:
                self._cov_cache.clear()
            self._cov_cache[key] = cached
        return cached

    def _class_rows(self, mode: str, r: Fraction):
        """members-frozenset -> (measure, cn or None, frontier param tuple, flags)."""
        cov = self.coverage_at(mode, r)
        rows = {}
        for rec in cov.components.values():
            members = frozenset(rec["members"])
            if not members:
                continue
            flags = frozenset(rec["flags"])
            fparams = tuple(sorted(p for (_, p) in rec["frontier"]))
            cn = len(rec["frontier"]) if not flags else None
            rows[members] = (rec["measure"], cn, fparams, flags)
        return rows

    def window_profiles(self, lo: Fraction, hi: Fraction, M: Fraction) -> WindowProfiles:
        lo, hi = Fraction(lo), Fraction(hi)
        cands: set[Fraction] = set()
        certified = True
        per_mode: dict[str, set[Fraction]] = {}
        src_by_edge: dict[str, dict] = {}
        for mode in (FREE, COLLAPSE):
            graph = self.graph(mode)
            sbe: dict[int, list] = {}
            for (l, _uid) in self._src[mode]:
                if l.edge is not None:
                    sbe.setdefault(l.edge, []).append((l.offset, Fraction(0)))
            src_by_edge[mode] = sbe
            got = _vertex_candidates(graph, self.pair, self._fields[mode], lo, hi)
            got |= _peak_candidates(graph, self._fields[mode], sbe, lo, hi)
            ms = self.merge_free if mode == FREE else self.merge_collapse
            got |= {m for m in ms.merge_radii() if lo < m < hi}
            per_mode[mode] = got
        if per_mode[FREE] != per_mode[COLLAPSE]:
            certified = False
        cands = per_mode[FREE] | per_mode[COLLAPSE]
        cuts = [lo] + sorted(cands) + [hi]

        seg_rows: dict[frozenset, list[ProfileSegment]] = {}
        for i in range(len(cuts) - 1):
            u, v = cuts[i], cuts[i + 1]
            r1 = u + (v - u) * Fraction(1, 2)
            r2 = u + (v - u) * Fraction(1, 4)
            data = {}
            ok = True
            for mode in (FREE, COLLAPSE):
                data[mode] = (self._class_rows(mode, r1), self._class_rows(mode, r2))
            if set(data[FREE][0]) != set(data[COLLAPSE][0]):
                ok = False
            rows = {}
            if ok:
                for members in data[FREE][0]:
                    f1, f2 = data[FREE][0][members], data[FREE][1].get(members)
                    c1, c2 = data[COLLAPSE][0][members], data[COLLAPSE][1].get(members)
                    good = (
                        f2 is not None and c2 is not None
                        and f1 == c1 and f2 == c2
                        and f1[1] is not None and f2[1] is not None
                        and f1[1] == f2[1]
                        and f1[0] - f2[0] == 2 * f1[1] * (r1 - r2)
                    )
                    if good:
                        cn = f1[1]
                        cm_lo = f1[0] - 2 * cn * (r1 - u)
                        rows[members] = ProfileSegment(u, v, cn, cm_lo, exact=True)
                    else:
                        rows[members] = ProfileSegment(u, v, 0, Fraction(0), exact=False)
            else:
                for members in set(data[FREE][0]) | set(data[COLLAPSE][0]):
                    rows[members] = ProfileSegment(u, v, 0, Fraction(0), exact=False)
            for members, seg in rows.items():
                seg_rows.setdefault(members, []).append(seg)

        profiles = []
        for members, segs in seg_rows.items():
            profiles.append(GoodnessProfile(
                window=(lo, hi), M=M, segments=sorted(segs, key=lambda s: s.lo),
                members=members,
                label=",".join(fmt(self.units[u].rep_param) for u in sorted(members)[:3]),
            ))
        certified = certified and all(not p.approximate for p in profiles)
        return WindowProfiles((lo, hi), sorted(cands), profiles, certified)

    def component_at(self, mode: str, q_param: Fraction, r: Fraction) -> ComponentInfo:
        """Single-mode component of the r-ball at q, reusing distance fields."""
        from .scar import _component_of_locator
        graph = self.graph(mode)
        cov = self.coverage_at(mode, r)
        q_loc = graph.locate(Fraction(q_param) % graph.L)
        root = _component_of_locator(graph, cov, q_loc)
        rec = cov.components[root]
        flags = frozenset(rec["flags"])
        cn = len(rec["frontier"]) if not flags else None
        return ComponentInfo(
            r=Fraction(r), mode=mode, measure=rec["measure"],
            frontier=sorted(rec["frontier"], key=lambda fp: fp[1]),
            frontier_count=cn, members=frozenset(rec["members"]), flags=flags,
        )

    def certified_component(self, q_param: Fraction, r: Fraction) -> ComponentInfo:
        a = self.component_at(FREE, q_param, r)
        b = self.component_at(COLLAPSE, q_param, r)
        if (not a.flags and not b.flags and a.measure == b.measure
                and a.frontier_count == b.frontier_count
                and a.frontier_params() == b.frontier_params()):
            return ComponentInfo(
                r=a.r, mode="certified", measure=a.measure, frontier=a.frontier,
                frontier_count=a.frontier_count,
                members=a.members | b.members, flags=frozenset(), exact=True,
            )
        return ComponentInfo(
            r=a.r, mode="interval", measure=b.measure, frontier=b.frontier,
            frontier_count=None, members=a.members | b.members,
            flags=a.flags | b.flags | {"mode_disagreement"}, exact=False,
        )

    def unit_for_param(self, q: Fraction) -> int:
        q = Fraction(q) % self.pair.L
        loc = self.pair.free.locate(q)
        for u in self.units:
            if u.free_loc.key() == loc.key():
                return u.uid
        # parameters inside carried gaps: nearest unit by collapse distance
        locc = self.pair.collapse.locate(q)
        for u in self.units:
            if u.collapse_loc.key() == locc.key():
                return u.uid
        raise SchemeError(f"parameter {fmt(q)} is not a singular unit at this truncation")


def breakpoints(pair: ScarPair, window: tuple[Fraction, Fraction],
                params: CriterionParams,
                units: Optional[Sequence[LambdaUnit]] = None) -> list[Fraction]:
    """Merge radii and vertex/collision radii inside the window, exact and
    mode-agreeing.  Raises when the window leaves (0, r̄)."""
    lo, hi = Fraction(window[0]), Fraction(window[1])
    if not (0 < lo < hi <= params.rbar):
        raise SchemeError("window outside (0, rbar)")
    an = LambdaAnalysis(pair, units)
    wp = an.window_profiles(lo, hi, params.M)
    if not wp.certified:
        raise SchemeError("breakpoints not certified at this truncation")
    return wp.breakpoints


def goodness(pair: ScarPair, q: Fraction, window: tuple[Fraction, Fraction],
             params: CriterionParams, base: str = "lambda") -> GoodnessProfile:
    """Profile of the goodness integrand for q's component over the window.

    base="lambda" uses the declared singular set; base="point" uses the
    single-point variant around a non-singular q.
    """
    lo, hi = Fraction(window[0]), Fraction(window[1])
    if not (0 < lo < hi <= params.rbar):
        raise SchemeError("window outside (0, rbar)")
    if base == "point":
        units = point_units(pair, q)
        an = LambdaAnalysis(pair, units)
        uid = 0
    else:
        an = LambdaAnalysis(pair)
        uid = an.unit_for_param(q)
    wp = an.window_profiles(lo, hi, params.M)
    # stitch q's class across NC boundaries inside the window
    segs = []
    for p in wp.classes:
        if uid in p.members:
            segs.extend(p.segments)
    if not segs:
        raise SchemeError("no profile segments for q")
    segs.sort(key=lambda s: s.lo)
    return GoodnessProfile(window=(lo, hi), M=params.M, segments=segs,
                           members=frozenset([uid]), label=fmt(Fraction(q)))


# ---------------------------------------------------------------------------
# divergence certificate


@dataclass
class WindowBound:
    k: int
    lo: Fraction
    hi: Fraction
    value: float                     # min over classes of the certified bound
    certified: bool
    n_classes: int
    per_class: list[tuple[str, float]] = field(default_factory=list)


@dataclass
class DivergenceCertificate:
    scheme_name: str
    hypothesis: str
    rbar: Fraction
    M: Fraction
    windows: list[WindowBound]
    c: Optional[float]
    verdict: str
    notes: list[str] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED


def window_schedule(rbar: Fraction, merge_radii: Sequence[Fraction], K: int) -> list[Fraction]:
    """K+1 decreasing radii bounding K windows: merge radii below r̄, padded
    geometrically (ratio 1/2) when they run out."""
    radii = [Fraction(rbar)]
    nc = sorted((m for m in merge_radii if 0 < m < rbar), reverse=True)
    for m in nc:
        if len(radii) > K:
            break
        if m < radii[-1]:
            radii.append(m)
    while len(radii) <= K:
        radii.append(radii[-1] / 2)
    return radii[:K + 1]


def _resolve_pair(scheme_or_fs, needed_gap: Optional[Fraction] = None) -> ScarPair:
    if isinstance(scheme_or_fs, ScarPair):
        return scheme_or_fs
    if isinstance(scheme_or_fs, FiniteScheme):
        return ScarPair(scheme_or_fs)
    if needed_gap is not None:
        return ScarPair(truncate_max_gap(scheme_or_fs, needed_gap))
    return ScarPair(truncate(scheme_or_fs, Fraction(1, 64)))


def divergence_report(scheme_or_fs, K: int, hypothesis: str = "constant",
                      rbar: Optional[Fraction] = None,
                      hbar: Optional[Fraction] = None,
                      c_declared: Optional[float] = None) -> DivergenceCertificate:
    """Certified per-window lower bounds of the goodness integral plus a
    conditional divergence verdict.

    Numerics cannot prove an improper integral diverges; the verdict is
    CERTIFIED_UNDER_HYPOTHESIS exactly when every verified window bound is
    exact, fits the declared scaling hypothesis, and the normalized bounds
    do not trend to zero geometrically over the verified range.
    """
    hypothesis = hypothesis.lower()
    if hypothesis not in ("constant", "harmonic", "none"):
        raise SchemeError(f"unknown hypothesis {hypothesis!r}")
    pair0 = _resolve_pair(scheme_or_fs)
    if pair0.fs.scheme.singular.is_empty():
        raise SchemeError("no declared singular set")
    params0 = default_params(pair0, rbar=rbar, hbar=hbar)
    an0 = LambdaAnalysis(pair0)
    radii = window_schedule(params0.rbar, an0.merge_free.merge_radii(), K)

    needed = radii[-1] / 16
    if isinstance(scheme_or_fs, FoldingScheme) and pair0.fs.max_gap > needed:
        pair = ScarPair(truncate_max_gap(scheme_or_fs, needed))
    else:
        pair = pair0
    params = default_params(pair, rbar=rbar, hbar=hbar)
    an = LambdaAnalysis(pair)
    radii = window_schedule(params.rbar, an.merge_free.merge_radii(), K)

    windows = []
    notes = []
    for k in range(K):
        hi, lo = radii[k], radii[k + 1]
        wp = an.window_profiles(lo, hi, params.M)
        per_class = []
        vals = []
        for p in wp.classes:
            v = integral_lower_bound(p, lo, hi, allow_approximate=True)
            per_class.append((p.label, v))
            vals.append(v)
        wb = WindowBound(k=k, lo=lo, hi=hi, value=min(vals) if vals else 0.0,
                         certified=wp.certified, n_classes=len(wp.classes),
                         per_class=per_class)
        windows.append(wb)

    weight = {"constant": (lambda k: 1.0),
              "harmonic": (lambda k: 1.0 / (k + 1)),
              "none": (lambda k: 1.0)}[hypothesis]
    v_norm = [w.value / weight(w.k) for w in windows]
    c = c_declared if c_declared is not None else (min(v_norm) if v_norm else None)

    verdict = CERTIFIED
    if hypothesis == "none":
        verdict = INCONCLUSIVE
        notes.append("no extrapolation hypothesis declared")
    if any(not w.certified for w in windows):
        verdict = INCONCLUSIVE
        notes.append("some window bounds are not certified exact")
    if c is None or c <= 0 or any(w.value + 1e-15 < c * weight(w.k) for w in windows):
        verdict = INCONCLUSIVE
        notes.append("window bounds do not satisfy the hypothesis")
    if len(v_norm) >= 4:
        half = v_norm[len(v_norm) // 2 - 1:]
        decaying = all(half[i + 1] < 0.9 * half[i] for i in range(len(half) - 1))
        if decaying:
            verdict = INCONCLUSIVE
            notes.append("normalized window bounds decay geometrically; "
                         "hypothesis not supported by the verified range")
    return DivergenceCertificate(
        scheme_name=pair.fs.scheme.meta.name, hypothesis=hypothesis,
        rbar=params.rbar, M=params.M, windows=windows,
        c=c, verdict=verdict, notes=notes,
    )


def default_params(pair: ScarPair, rbar: Optional[Fraction] = None,
                   hbar: Optional[Fraction] = None) -> CriterionParams:
    from .collar import build_collar
    if rbar is None:
        rbar = injectivity_radius(pair)
    if hbar is None:
        hbar = pair.fs.scheme.meta.hbar
    if hbar is None:
        hbar = build_collar(pair.fs.scheme.multipolygon).hbar
    else:
        build_collar(pair.fs.scheme.multipolygon, hbar)  # overrides must pass
    return CriterionParams(Fraction(rbar), Fraction(hbar))


# ---------------------------------------------------------------------------
# nested annulus system


@dataclass
class AnnulusClassData:
    members: frozenset
    label: str
    eps: Fraction
    inner: Fraction
    outer: Fraction
    module_bound: float
    window_bound: float


@dataclass
class AnnulusLevel:
    k: int
    r_lo: Fraction
    r_hi: Fraction
    eps_cap: Fraction
    classes: list[AnnulusClassData]


@dataclass
class AnnulusSystem:
    levels: list[AnnulusLevel]
    cond_unnested: bool
    cond_nested_chain: bool
    cond_sum: bool
    sum_lhs: float
    sum_rhs: float

    @property
    def all_conditions(self) -> bool:
        return self.cond_unnested and self.cond_nested_chain and self.cond_sum


def mcmullen_system(scheme_or_fs, K0: int, K1: int,
                    rbar: Optional[Fraction] = None,
                    hbar: Optional[Fraction] = None) -> AnnulusSystem:
    """Nested annulus system witnessing the divergence argument.

    Level k lives in the window (r_{k+1}, r_k) between consecutive merge
    radii (r_0 = r̄).  Class shifts eps_k come from a dyadic search grid,
    capped by min(r_{k+1}/(2^{k-1} M), (r_k - r_{k+1})/3), and both shifted
    radii must be certified planar for the class.
    """
    if not (0 <= K0 <= K1):
        raise SchemeError("bad level range")
    K = K1 + 1
    pair0 = _resolve_pair(scheme_or_fs)
    params0 = default_params(pair0, rbar=rbar, hbar=hbar)
    an0 = LambdaAnalysis(pair0)
    radii = window_schedule(params0.rbar, an0.merge_free.merge_radii(), K)
    needed = radii[-1] / 16
    if isinstance(scheme_or_fs, FoldingScheme) and pair0.fs.max_gap > needed:
        pair = ScarPair(truncate_max_gap(scheme_or_fs, needed))
    else:
        pair = pair0
    params = default_params(pair, rbar=rbar, hbar=hbar)
    an = LambdaAnalysis(pair)
    radii = window_schedule(params.rbar, an.merge_free.merge_radii(), K)
    M = params.M

    merge_set = set(an.merge_free.merge_radii()) | set(an.merge_collapse.merge_radii())
    levels = []
    for k in range(K0, K1 + 1):
        r_hi, r_lo = radii[k], radii[k + 1]
        wp = an.window_profiles(r_lo, r_hi, M)
        if not wp.certified:
            raise SchemeError(f"level {k}: window not certified at this truncation")
        cap = min(r_lo / (Fraction(2) ** (k - 1) * M), (r_hi - r_lo) / 3)
        classes = []
        for p in wp.classes:
            rep = an.units[min(p.members)].rep_param
            eps_found = None
            for m in range(2, 41):
                eps = (r_hi - r_lo) / (Fraction(2) ** m)
                if eps > cap:
                    continue
                inner, outer = r_lo + eps, r_hi - eps
                if inner in merge_set or outer in merge_set:
                    continue
                ci_in = an.certified_component(rep, inner)
                ci_out = an.certified_component(rep, outer)
                if ci_in.exact and ci_out.exact:
                    eps_found = (eps, inner, outer)
                    break
            if eps_found is None:
                raise SchemeError(f"level {k}: no valid eps for class {p.label} "
                                  f"(blocking breakpoints near window edges)")
            eps, inner, outer = eps_found
            mb = integral_lower_bound(p, inner, outer)
            wbound = integral_lower_bound(p, r_lo, r_hi)
            classes.append(AnnulusClassData(
                members=p.members, label=p.label, eps=eps, inner=inner,
                outer=outer, module_bound=mb, window_bound=wbound,
            ))
        levels.append(AnnulusLevel(k=k, r_lo=r_lo, r_hi=r_hi, eps_cap=cap, classes=classes))

    # (a) per-level classes partition the units: pairwise disjoint
    cond_a = True
    for lev in levels:
        seen = set()
        for c in lev.classes:
            if seen & c.members:
                cond_a = False
            seen |= c.members
    # (b) nesting of consecutive levels: class containment and radius order
    cond_b = True
    for i in range(len(levels) - 1):
        up, dn = levels[i], levels[i + 1]
        for c in dn.classes:
            parents = [pc for pc in up.classes if c.members <= pc.members]
            if len(parents) != 1 or not (c.outer < parents[0].inner):
                cond_b = False
    # (c) chain sums against the per-window bounds
    lhs = 0.0
    rhs = 0.0
    for lev in levels:
        w_k = min(c.window_bound for c in lev.classes)
        rhs += max(w_k - 2.0 ** (1 - lev.k), 0.0) if lev.k >= 1 else max(w_k - 2.0, 0.0)
        lhs += min(c.module_bound for c in lev.classes)
    cond_c = lhs + 1e-12 >= rhs
    return AnnulusSystem(levels=levels, cond_unnested=cond_a,
                         cond_nested_chain=cond_b, cond_sum=cond_c,
                         sum_lhs=lhs, sum_rhs=rhs)
