"""Scar graphs: exact quotient metric structure of a truncated scheme.

The boundary circle, refined at every pairing endpoint, polygon vertex and
mirror image thereof, is glued by union-find into a metric graph whose pair
edges carry twice their length in boundary measure.  Uncovered gaps are
handled in one of two modes:

* ``free``    - each gap is an ordinary edge of its own length.  Removing
  identifications only enlarges a quotient metric, so free distances are
  upper bounds for the true scar metric.
* ``collapse``- gaps are contracted, one node per linked gap group (gaps
  connected through unexpanded generator pairings are contracted together).
  Adding identifications only shrinks a quotient metric, so collapse
  distances are lower bounds.

A truncation's free graph generally contains cycles through gap edges (a
gap whose endpoints are already identified closes a loop); the pair-edge
subgraph of a plain scheme is always a forest, which is verified.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .rationals import fmt
from .scheme import FiniteScheme, SchemeError, virtual_gap_links

Frac = Fraction

FREE = "free"
COLLAPSE = "collapse"


class StructureError(SchemeError):
    """Quotient does not have the shape a plain scheme guarantees."""


@dataclass(frozen=True)
class Locator:
    """Position on a scar graph: at a node, or at an offset inside an edge."""

    node: Optional[int] = None
    edge: Optional[int] = None
    offset: Fraction = Fraction(0)

    def key(self):
        return (self.node, self.edge, self.offset)


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: Fraction
    kind: str                     # "pair" | "gap"
    a_lo: Fraction                # boundary param at offset 0 on the first sheet
    mirror_const: Optional[Fraction]  # pair edges: second sheet param = const - (a_lo + offset)
    family: str = ""
    gap_index: Optional[int] = None

    @property
    def measure(self) -> Fraction:
        return 2 * self.length if self.kind == "pair" else self.length

    def params_at(self, offset: Fraction) -> tuple[Fraction, ...]:
        p = self.a_lo + offset
        if self.kind == "pair":
            return (p, self.mirror_const - p)
        return (p,)


@dataclass
class Node:
    params: tuple[Fraction, ...]
    has_poly_vertex: bool = False
    gap_groups: tuple[int, ...] = ()

    @property
    def touches_gap(self) -> bool:
        return bool(self.gap_groups) or self._gap_endpoint

    _gap_endpoint: bool = False


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        r = x
        while self.parent[r] != r:
            r = self.parent[r]
        while self.parent[x] != r:
            self.parent[x], x = r, self.parent[x]
        return r

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


class ScarGraph:
    """Immutable after construction; all queries are pure."""

    def __init__(self, fs: FiniteScheme, mode: str):
        if mode not in (FREE, COLLAPSE):
            raise ValueError(mode)
        if len(fs.scheme.multipolygon.polygons) != 1:
            raise StructureError("scar construction needs a single polygon")
        self.fs = fs
        self.mode = mode
        self.poly = fs.scheme.multipolygon.polygons[0]
        self.L = self.poly.perimeter
        self._build()

    # -- construction -----------------------------------------------------

    def _build(self):
        fs, L = self.fs, self.L
        vertex_params = set(self.poly.vertex_params)
        pts: set[Fraction] = set(vertex_params)
        pts.add(Fraction(0))
        segs = []  # (lo, hi, pairing)
        for p in fs.pairings:
            pts.update((p.a_lo, p.a_hi, p.b_lo, p.b_hi % L))
            segs.append((p.a_lo, p.a_hi, p))
            segs.append((p.b_lo, p.b_hi, p))
        segs.sort(key=lambda s: (s[0], s[1]))
        seg_lo = [s[0] for s in segs]

        def seg_containing(x: Fraction):
            i = bisect_right(seg_lo, x) - 1
            if i >= 0 and segs[i][0] < x < segs[i][1]:
                return segs[i][2]
            return None

        # mirror closure: one round suffices (interior disjointness)
        for x in list(pts):
            p = seg_containing(x)
            if p is not None:
                pts.add(p.mirror(x))
        for (lo, hi) in fs.gaps:
            pts.add(lo)
            if hi < L:
                pts.add(hi)
        bps = sorted(pts)
        if bps and bps[-1] == L:
            bps.pop()
        index = {x: i for i, x in enumerate(bps)}
        n = len(bps)

        uf = _UnionFind(n)
        for p in fs.pairings:
            lo_i, hi_i = bisect_left(bps, p.a_lo), bisect_right(bps, p.a_hi)
            for j in range(lo_i, hi_i):
                x = bps[j]
                m = p.mirror(x)
                if m == L:
                    m = Fraction(0)
                uf.union(index[x], index[m % L])

        # gap groups
        links = virtual_gap_links(fs) if fs.scheme.rules else []
        guf = _UnionFind(len(fs.gaps))
        for (a, b) in links:
            guf.union(a, b)
        group_of_gap = [guf.find(i) for i in range(len(fs.gaps))]
        groups = sorted(set(group_of_gap))
        gid_of = {g: i for i, g in enumerate(groups)}
        self.group_of_gap = [gid_of[g] for g in group_of_gap]
        self.n_groups = len(groups)
        self.group_measure = [Fraction(0)] * self.n_groups
        self.group_gaps: list[list[int]] = [[] for _ in range(self.n_groups)]
        for gi, (lo, hi) in enumerate(fs.gaps):
            g = self.group_of_gap[gi]
            self.group_measure[g] += hi - lo
            self.group_gaps[g].append(gi)
        sing = fs.scheme.singular
        self.group_carries = [
            any(sing.meets_interval(fs.gaps[gi][0], fs.gaps[gi][1]) for gi in gs)
            for gs in self.group_gaps
        ]

        gap_endpoint_idx: set[int] = set()
        for (lo, hi) in fs.gaps:
            gap_endpoint_idx.add(index[lo])
            gap_endpoint_idx.add(index[hi % L])

        if self.mode == COLLAPSE:
            for g in range(self.n_groups):
                first = None
                for gi in self.group_gaps[g]:
                    (lo, hi) = fs.gaps[gi]
                    for x in (lo, hi % L):
                        if first is None:
                            first = index[x]
                        else:
                            uf.union(first, index[x])
                    # interior breakpoints of the gap (polygon vertices in gaps)
                    for j in range(bisect_right(bps, lo), bisect_left(bps, hi)):
                        uf.union(first, j)

        # node ids
        root_to_node: dict[int, int] = {}
        self.node_of_bp: list[int] = [0] * n
        nodes: list[Node] = []
        for i in range(n):
            r = uf.find(i)
            if r not in root_to_node:
                root_to_node[r] = len(nodes)
                nodes.append(Node(params=()))
            self.node_of_bp[i] = root_to_node[r]
        members: list[list[Fraction]] = [[] for _ in nodes]
        has_v = [False] * len(nodes)
        gap_end = [False] * len(nodes)
        for i, x in enumerate(bps):
            nd = self.node_of_bp[i]
            members[nd].append(x)
            if x in vertex_params:
                has_v[nd] = True
            if i in gap_endpoint_idx:
                gap_end[nd] = True
        node_groups: list[list[int]] = [[] for _ in nodes]
        if self.mode == COLLAPSE:
            for g in range(self.n_groups):
                lo = fs.gaps[self.group_gaps[g][0]][0]
                node_groups[self.node_of_bp[index[lo]]].append(g)
        for i, nd in enumerate(nodes):
            nodes[i] = Node(
                params=tuple(sorted(members[i])),
                has_poly_vertex=has_v[i],
                gap_groups=tuple(node_groups[i]),
                _gap_endpoint=gap_end[i],
            )
        self.nodes = nodes
        self.bps = bps
        self._bp_index = index

        # edges
        edges: list[Edge] = []
        lookup: list[tuple[Fraction, Fraction, int, int, Fraction]] = []
        # lookup rows: (lo, hi, edge_id, sign, const): offset = sign*(t - const)

        def node_at(x: Fraction) -> int:
            return self.node_of_bp[index[x % L if x != L else Fraction(0)]]

        for p in fs.pairings:
            lo_i, hi_i = bisect_left(bps, p.a_lo), bisect_right(bps, p.a_hi)
            sub = bps[lo_i:hi_i]
            if not sub or sub[-1] != p.a_hi:
                sub = sub + [p.a_hi]
            for j in range(len(sub) - 1):
                x1, x2 = sub[j], sub[j + 1]
                eid = len(edges)
                edges.append(Edge(
                    u=node_at(x1), v=node_at(x2), length=x2 - x1, kind="pair",
                    a_lo=x1, mirror_const=p.a_lo + p.b_hi,
                    family=f"{fmt(p.a_lo)}:{fmt(p.b_hi)}",
                ))
                lookup.append((x1, x2, eid, 1, x1))
                m_lo, m_hi = p.mirror(x2), p.mirror(x1)
                lookup.append((m_lo, m_hi, eid, -1, p.a_lo + p.b_hi - x1))
        if self.mode == FREE:
            for gi, (lo, hi) in enumerate(fs.gaps):
                inner = bps[bisect_right(bps, lo):bisect_left(bps, hi)]
                sub = [lo] + inner + [hi]
                for j in range(len(sub) - 1):
                    x1, x2 = sub[j], sub[j + 1]
                    eid = len(edges)
                    edges.append(Edge(
                        u=node_at(x1), v=node_at(x2), length=x2 - x1, kind="gap",
                        a_lo=x1, mirror_const=None, family="gap", gap_index=gi,
                    ))
                    lookup.append((x1, x2, eid, 1, x1))
        self.edges = edges
        lookup.sort(key=lambda row: (row[0], row[1]))
        self._lookup = lookup
        self._lookup_lo = [row[0] for row in lookup]

        adj: list[list[tuple[int, int, Fraction]]] = [[] for _ in nodes]
        for eid, e in enumerate(edges):
            adj[e.u].append((e.v, eid, e.length))
            adj[e.v].append((e.u, eid, e.length))
        self.adj = adj
        self._adj_float = None

        self.total_measure = sum((e.measure for e in edges), Fraction(0))
        if self.mode == COLLAPSE:
            self.total_measure += sum(self.group_measure, Fraction(0))
        if self.total_measure != L:
            raise StructureError("measure bookkeeping broken")

        # structural verification
        puf = _UnionFind(len(nodes))
        for e in edges:
            if e.kind == "pair":
                if not puf.union(e.u, e.v):
                    raise StructureError("cycle of pair edges (scheme not plain or truncation inconsistent)")
        cuf = _UnionFind(len(nodes))
        for e in edges:
            cuf.union(e.u, e.v)
        roots = {cuf.find(i) for i in range(len(nodes))}
        if len(roots) != 1:
            raise StructureError("disconnected quotient")

    # -- queries ----------------------------------------------------------

    def locate(self, t: Fraction) -> Locator:
        t = Fraction(t) % self.L
        i = self._bp_index.get(t)
        if i is not None:
            return Locator(node=self.node_of_bp[i])
        # lookup rows tile the circle with disjoint interiors
        j = bisect_right(self._lookup_lo, t) - 1
        if j >= 0:
            lo, hi, eid, sign, const = self._lookup[j]
            if lo < t < hi:
                off = (t - const) if sign == 1 else (const - t)
                return Locator(edge=eid, offset=off)
        if self.mode == COLLAPSE:
            # parameters inside gaps collapse to the group node
            for gi, (lo, hi) in enumerate(self.fs.gaps):
                if lo < t < hi:
                    g = self.group_of_gap[gi]
                    ref = self.fs.gaps[self.group_gaps[g][0]][0]
                    return Locator(node=self.node_of_bp[self._bp_index[ref]])
        raise SchemeError(f"parameter {fmt(t)} not locatable")

    def params_of(self, loc: Locator) -> tuple[Fraction, ...]:
        if loc.node is not None:
            return self.nodes[loc.node].params
        return self.edges[loc.edge].params_at(loc.offset)

    def node_relaxations(self, loc: Locator, base: Fraction = Fraction(0)):
        """(node, cost) seeds a point source contributes to Dijkstra."""
        if loc.node is not None:
            return [(loc.node, base)]
        e = self.edges[loc.edge]
        return [(e.u, base + loc.offset), (e.v, base + e.length - loc.offset)]

    def float_adj(self):
        if self._adj_float is None:
            self._adj_float = [
                [(v, eid, float(w)) for (v, eid, w) in nbrs] for nbrs in self.adj
            ]
        return self._adj_float


# ---------------------------------------------------------------------------
# shortest paths


def dijkstra(graph: ScarGraph, sources: Sequence[tuple[Locator, Fraction]],
             cutoff: Optional[Fraction] = None) -> dict[int, Fraction]:
    """Exact multi-source node distances."""
    dist: dict[int, Fraction] = {}
    heap: list[tuple[Fraction, int]] = []
    for (loc, c) in sources:
        for (nd, cost) in graph.node_relaxations(loc, c):
            if nd not in dist or cost < dist[nd]:
                dist[nd] = cost
                heapq.heappush(heap, (cost, nd))
    while heap:
        d, u = heapq.heappop(heap)
        if d != dist.get(u):
            continue
        if cutoff is not None and d > cutoff:
            continue
        for (v, _eid, w) in graph.adj[u]:
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def dijkstra_labeled(graph: ScarGraph, sources: Sequence[tuple[Locator, Fraction, int]]):
    """Exact multi-source distances with nearest-source labels."""
    dist: dict[int, Fraction] = {}
    label: dict[int, int] = {}
    heap = []
    for (loc, c, lab) in sources:
        for (nd, cost) in graph.node_relaxations(loc, c):
            if nd not in dist or cost < dist[nd]:
                dist[nd] = cost
                label[nd] = lab
                heapq.heappush(heap, (cost, nd, lab))
    while heap:
        d, u, lab = heapq.heappop(heap)
        if d != dist.get(u) or lab != label.get(u):
            continue
        for (v, _eid, w) in graph.adj[u]:
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                label[v] = lab
                heapq.heappush(heap, (nd, v, lab))
    return dist, label


def dijkstra_float(graph: ScarGraph, source_node: int, target_node: Optional[int] = None):
    import math
    adj = graph.float_adj()
    n = len(graph.nodes)
    dist = [math.inf] * n
    dist[source_node] = 0.0
    heap = [(0.0, source_node)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if target_node is not None and u == target_node:
            return dist
        for (v, _eid, w) in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def point_distance_float(graph: ScarGraph, x: Locator, y: Locator) -> float:
    """Float shortest path with early exit; for large empirical sweeps."""
    import math
    if x.node is not None and y.node is not None and x.node == y.node:
        return 0.0
    direct = None
    if x.edge is not None and y.edge is not None and x.edge == y.edge:
        direct = abs(float(x.offset) - float(y.offset))
    adj = graph.float_adj()
    n = len(graph.nodes)
    dist = [math.inf] * n
    heap = []
    for (nd, c) in graph.node_relaxations(x):
        c = float(c)
        if c < dist[nd]:
            dist[nd] = c
            heap.append((c, nd))
    heapq.heapify(heap)
    targets = {}
    if y.node is not None:
        targets[y.node] = 0.0
    else:
        e = graph.edges[y.edge]
        targets[e.u] = float(y.offset)
        targets[e.v] = float(e.length - y.offset)
    best = direct if direct is not None else math.inf
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if d >= best:
            break
        if u in targets:
            best = min(best, d + targets[u])
        for (v, _eid, w) in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return best


def point_distance(graph: ScarGraph, x: Locator, y: Locator) -> Fraction:
    """Exact distance between two located points in one graph."""
    direct = None
    if x.edge is not None and y.edge is not None and x.edge == y.edge:
        direct = abs(x.offset - y.offset)
    if x.node is not None and y.node is not None and x.node == y.node:
        return Fraction(0)
    dist = dijkstra(graph, [(x, Fraction(0))])
    if y.node is not None:
        best = dist.get(y.node)
    else:
        e = graph.edges[y.edge]
        cands = []
        if e.u in dist:
            cands.append(dist[e.u] + y.offset)
        if e.v in dist:
            cands.append(dist[e.v] + e.length - y.offset)
        best = min(cands) if cands else None
    if best is None:
        raise StructureError("unreachable point")
    if direct is not None:
        best = min(best, direct)
    return best


# ---------------------------------------------------------------------------
# the mode pair


class ScarPair:
    """Free and collapse graphs of one truncation, queried together."""

    def __init__(self, fs: FiniteScheme):
        self.fs = fs
        self.free = ScarGraph(fs, FREE)
        self.collapse = ScarGraph(fs, COLLAPSE)
        closed = fs.scheme.closed_singular_params(into_gaps=fs.gaps)
        self._singular_closed = frozenset(closed)

    @property
    def L(self) -> Fraction:
        return self.free.L

    def matches_singular(self, x: Fraction) -> bool:
        """Declared singular set membership, rules applied to explicit params."""
        x = Fraction(x) % self.L
        if x in self._singular_closed:
            return True
        return any(c.contains(x) for c in self.fs.scheme.singular.cantor)

    def distance(self, x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
        """Two-sided bracket [lo, hi] of the scar distance of two boundary
        parameters: collapse distance below, free distance above."""
        x, y = Fraction(x), Fraction(y)
        if not (0 <= x <= self.L and 0 <= y <= self.L):
            raise SchemeError("boundary parameter out of range")
        x, y = x % self.L, y % self.L
        lo = point_distance(self.collapse, self.collapse.locate(x), self.collapse.locate(y))
        hi = point_distance(self.free, self.free.locate(x), self.free.locate(y))
        if lo > hi:
            raise StructureError("bracket inverted")
        return lo, hi


# ---------------------------------------------------------------------------
# point classification


PLANAR = "planar"
VERTEX = "vertex"
DECLARED_SINGULAR = "declared_singular"
TRUNCATION_UNKNOWN = "truncation_unknown"


@dataclass(frozen=True)
class PointClass:
    kind: str
    valence: Optional[int] = None
    detail: str = ""


def classify_point(pair: ScarPair, t: Fraction) -> PointClass:
    """Classify the image of a boundary parameter on the truncated scar.

    Fibers of nodes not adjacent to gaps are final (new identifications live
    inside gap closures), so vertex valences away from gaps are certified.
    Points within a gap's own length of that gap are never certified planar.
    """
    g = pair.free
    t = Fraction(t) % g.L
    loc = g.locate(t)
    params = g.params_of(loc)
    if any(pair.matches_singular(p) for p in params):
        return PointClass(DECLARED_SINGULAR)
    if loc.node is not None:
        node = g.nodes[loc.node]
        if node.touches_gap:
            return PointClass(TRUNCATION_UNKNOWN, detail="fiber may grow under deeper expansion")
        k = len(node.params)
        if k != 2 or node.has_poly_vertex:
            return PointClass(VERTEX, valence=k)
        return PointClass(PLANAR)
    e = g.edges[loc.edge]
    if e.kind == "gap":
        return PointClass(TRUNCATION_UNKNOWN, detail="inside an unexpanded gap")
    # within-buffer test against the largest gap
    maxgap = pair.fs.max_gap
    if maxgap > 0:
        gap_sources = []
        for eid, ed in enumerate(g.edges):
            if ed.kind == "gap":
                gap_sources.append((Locator(node=ed.u), Fraction(0)))
                gap_sources.append((Locator(node=ed.v), Fraction(0)))
        if gap_sources:
            dist = dijkstra(g, gap_sources, cutoff=maxgap)
            du = dist.get(e.u)
            dv = dist.get(e.v)
            d = min(
                du + loc.offset if du is not None else maxgap + 1,
                dv + e.length - loc.offset if dv is not None else maxgap + 1,
            )
            if d < maxgap:
                return PointClass(TRUNCATION_UNKNOWN, detail="within tail scale of a gap")
    return PointClass(PLANAR)


# ---------------------------------------------------------------------------
# singular set units


@dataclass(frozen=True)
class LambdaUnit:
    """One source of the singular set on both graphs."""

    uid: int
    rep_param: Fraction
    free_loc: Locator
    collapse_loc: Locator


def lambda_units(pair: ScarPair) -> list[LambdaUnit]:
    """Singular sources: every free-graph node whose fiber meets the
    declared singular description (rule closure included), plus the collapse
    nodes of singular-carrying gap groups (usually the same nodes)."""
    sing = pair.fs.scheme.singular
    if sing.is_empty():
        return []
    units: list[LambdaUnit] = []
    seen_free: set[int] = set()
    for ni, node in enumerate(pair.free.nodes):
        if any(pair.matches_singular(p) for p in node.params):
            rep = node.params[0]
            units.append(LambdaUnit(
                uid=len(units), rep_param=rep,
                free_loc=Locator(node=ni),
                collapse_loc=pair.collapse.locate(rep),
            ))
            seen_free.add(ni)
    covered_collapse = {u.collapse_loc.node for u in units}
    for g in range(pair.collapse.n_groups):
        if not pair.collapse.group_carries[g]:
            continue
        ref = pair.fs.gaps[pair.collapse.group_gaps[g][0]][0]
        nd = pair.collapse.locate(ref).node
        if nd not in covered_collapse:
            # carrying group with no singular endpoint class: keep it as a
            # collapse-only source so outer bounds stay complete
            units.append(LambdaUnit(
                uid=len(units), rep_param=ref,
                free_loc=pair.free.locate(ref),
                collapse_loc=Locator(node=nd),
            ))
            covered_collapse.add(nd)
    if not units:
        raise SchemeError("declared singular set does not meet the truncation")
    return units


# ---------------------------------------------------------------------------
# ball coverage and components


@dataclass
class ComponentInfo:
    r: Fraction
    mode: str
    measure: Fraction                      # cm
    frontier: list[tuple[Locator, tuple[Fraction, ...]]]   # CC points with fibers
    frontier_count: Optional[int]          # cn; None when flagged
    members: frozenset                      # unit ids inside (CLambda)
    flags: frozenset = frozenset()
    exact: bool = False

    @property
    def cm(self) -> Fraction:
        return self.measure

    @property
    def cn(self) -> Optional[int]:
        return self.frontier_count

    def frontier_params(self) -> list[tuple[Fraction, ...]]:
        return sorted(p for (_, p) in self.frontier)


@dataclass
class Coverage:
    r: Fraction
    node_dist: dict[int, Fraction]
    comp_of_item: dict
    components: dict   # root -> dict(measure, frontier, members, flags)

    def component_items(self):
        return self.components


def coverage(graph: ScarGraph, sources: Sequence[tuple[Locator, int]], r: Fraction,
             node_dist: Optional[dict[int, Fraction]] = None) -> Coverage:
    """Covered structure of the open ball of radius r about the sources.

    Components are connected pieces of the covered set; each records exact
    measure, frontier points (distance exactly r), contained source units,
    and flags for frontier hitting nodes or gap territory.  A precomputed
    distance field for the same sources may be passed in.
    """
    r = Fraction(r)
    if r <= 0:
        raise SchemeError("radius must be positive")
    if node_dist is None:
        src_pairs = [(loc, Fraction(0)) for (loc, _) in sources]
        node_dist = dijkstra(graph, src_pairs)
    src_on_edge: dict[int, list[tuple[Fraction, Fraction]]] = {}
    for (loc, _uid) in sources:
        if loc.edge is not None:
            src_on_edge.setdefault(loc.edge, []).append((loc.offset, Fraction(0)))

    # items are integers: covered nodes first, then covered edge pieces
    covered_node = {nd for (nd, d) in node_dist.items() if d < r}
    node_item = {nd: i for i, nd in enumerate(covered_node)}
    parent: list[int] = list(range(len(node_item)))
    pieces: list[tuple[int, Fraction, Fraction]] = []  # (edge, s, t)
    pieces_by_edge: dict[int, list[tuple[Fraction, Fraction, int]]] = {}

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for eid, e in enumerate(graph.edges):
        du = node_dist.get(e.u)
        dv = node_dist.get(e.v)
        srcs = src_on_edge.get(eid)
        if (du is None or du >= r) and (dv is None or dv >= r) and not srcs:
            continue
        ivs = []
        if du is not None and du < r:
            ivs.append((Fraction(0), min(r - du, e.length)))
        if dv is not None and dv < r:
            ivs.append((max(e.length - (r - dv), Fraction(0)), e.length))
        for (pos, c) in (srcs or ()):
            rad = r - c
            if rad > 0:
                ivs.append((max(pos - rad, Fraction(0)), min(pos + rad, e.length)))
        if not ivs:
            continue
        ivs.sort()
        merged = [[ivs[0][0], ivs[0][1]]]
        for (lo, hi) in ivs[1:]:
            if lo < merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1][1] = hi
            else:
                merged.append([lo, hi])
        plist = []
        for (s, t) in merged:
            if s >= t:
                continue
            item = len(parent)
            parent.append(item)
            pieces.append((eid, s, t))
            plist.append((s, t, item))
            if s == 0 and du is not None and du < r:
                union(item, node_item[e.u])
            if t == e.length and dv is not None and dv < r:
                union(item, node_item[e.v])
        if plist:
            pieces_by_edge[eid] = plist

    comps: dict = {}

    def comp_rec(root):
        rec = comps.get(root)
        if rec is None:
            rec = comps[root] = {
                "measure": Fraction(0),
                "frontier": [],
                "members": set(),
                "flags": set(),
                "nodes": set(),
            }
        return rec

    n_node_items = len(node_item)
    frontier_seen: set = set()
    for idx, (eid, s, t) in enumerate(pieces):
        item = n_node_items + idx
        e = graph.edges[eid]
        root = find(item)
        rec = comp_rec(root)
        width = t - s
        rec["measure"] += 2 * width if e.kind == "pair" else width
        if s > 0:
            key = (root, eid, s)
            if key not in frontier_seen:
                frontier_seen.add(key)
                rec["frontier"].append((Locator(edge=eid, offset=s), e.params_at(s)))
                if e.kind == "gap":
                    rec["flags"].add("gap_frontier")
        elif node_dist.get(e.u) == r:
            rec["flags"].add("node_frontier")
        if t < e.length:
            key = (root, eid, t)
            if key not in frontier_seen:
                frontier_seen.add(key)
                rec["frontier"].append((Locator(edge=eid, offset=t), e.params_at(t)))
                if e.kind == "gap":
                    rec["flags"].add("gap_frontier")
        elif node_dist.get(e.v) == r:
            rec["flags"].add("node_frontier")
    for nd, item in node_item.items():
        rec = comp_rec(find(item))
        rec["nodes"].add(nd)
        for g in graph.nodes[nd].gap_groups:
            rec["measure"] += graph.group_measure[g]

    for (loc, uid) in sources:
        if loc.node is not None:
            if loc.node in covered_node:
                comp_rec(find(node_item[loc.node]))["members"].add(uid)
        else:
            for (s, t, item) in pieces_by_edge.get(loc.edge, ()):
                if s <= loc.offset <= t:
                    comp_rec(find(item))["members"].add(uid)
                    break
    cov = Coverage(r=r, node_dist=node_dist, comp_of_item=None, components=comps)
    cov._find = find
    cov._node_item = node_item
    cov._pieces_by_edge = pieces_by_edge
    return cov


def _component_of_locator(graph, cov: Coverage, loc: Locator):
    if loc.node is not None:
        item = cov._node_item.get(loc.node)
        if item is None:
            raise SchemeError("point not inside the ball")
        return cov._find(item)
    for (s, t, item) in cov._pieces_by_edge.get(loc.edge, ()):
        if s <= loc.offset <= t:
            return cov._find(item)
    raise SchemeError("point not inside the ball")


def ball_component(graph: ScarGraph, units: Sequence[LambdaUnit], q_param: Fraction,
                   r: Fraction) -> ComponentInfo:
    """Raw single-mode component of the r-ball about the units, at q."""
    locs = [(u.free_loc if graph.mode == FREE else u.collapse_loc, u.uid) for u in units]
    q_loc = graph.locate(Fraction(q_param) % graph.L)
    in_base = any(loc.key() == q_loc.key() for (loc, _) in locs)
    if not in_base and not any(
            u.rep_param == Fraction(q_param) % graph.L for u in units):
        sing = graph.fs.scheme.singular
        ok = sing.matches(Fraction(q_param) % graph.L) or any(
            c.contains(Fraction(q_param) % graph.L) for c in sing.cantor)
        if not ok:
            # rule-closed declared parameters also qualify
            closed = graph.fs.scheme.closed_singular_params(into_gaps=graph.fs.gaps)
            ok = (Fraction(q_param) % graph.L) in closed
        if not ok:
            raise SchemeError("q is not in the base set")
    cov = coverage(graph, locs, r)
    root = _component_of_locator(graph, cov, q_loc)
    rec = cov.components[root]
    flags = frozenset(rec["flags"])
    cn = len(rec["frontier"]) if not flags else None
    return ComponentInfo(
        r=Fraction(r), mode=graph.mode, measure=rec["measure"],
        frontier=sorted(rec["frontier"], key=lambda fp: fp[1]),
        frontier_count=cn, members=frozenset(rec["members"]), flags=flags,
    )


def component_certified(pair: ScarPair, units: Sequence[LambdaUnit], q_param: Fraction,
                        r: Fraction, rbar: Optional[Fraction] = None) -> ComponentInfo:
    """Two-sided component computation; exact when both modes agree.

    Agreement of measure, frontier count, and frontier boundary parameters
    between the inner (free) and outer (collapse) bounds pins the true
    component data exactly.
    """
    if rbar is not None and not (0 < Fraction(r) < rbar):
        raise SchemeError(f"radius {fmt(Fraction(r))} outside (0, {fmt(rbar)})")
    a = ball_component(pair.free, units, q_param, r)
    b = ball_component(pair.collapse, units, q_param, r)
    if (not a.flags and not b.flags and a.measure == b.measure
            and a.frontier_count == b.frontier_count
            and a.frontier_params() == b.frontier_params()):
        return ComponentInfo(
            r=a.r, mode="certified", measure=a.measure, frontier=a.frontier,
            frontier_count=a.frontier_count,
            members=a.members | b.members, flags=frozenset(), exact=True,
        )
    flags = a.flags | b.flags | {"mode_disagreement"} if (
        a.measure != b.measure or a.frontier_count != b.frontier_count
        or a.frontier_params() != b.frontier_params()) else a.flags | b.flags
    return ComponentInfo(
        r=a.r, mode="interval", measure=b.measure, frontier=b.frontier,
        frontier_count=None if a.frontier_count != b.frontier_count else a.frontier_count,
        members=a.members | b.members, flags=frozenset(flags), exact=False,
    )


def point_units(pair: ScarPair, t: Fraction) -> list[LambdaUnit]:
    """A single-point base set for ball computations around a regular point."""
    t = Fraction(t) % pair.L
    return [LambdaUnit(uid=0, rep_param=t,
                       free_loc=pair.free.locate(t),
                       collapse_loc=pair.collapse.locate(t))]


# ---------------------------------------------------------------------------
# Euler characteristic


def euler_check(fs: FiniteScheme) -> int:
    """V - E + F of the CW structure with every gap contracted to a point.

    Plain truncations give 2 (the contracted quotient is a sphere).
    """
    from .scheme import is_plain
    res = is_plain(fs)
    if not res.plain:
        raise StructureError(f"not plain: {res.reason}")
    poly = fs.scheme.multipolygon.polygons[0]
    L = poly.perimeter
    pts: set[Fraction] = set(poly.vertex_params)
    pts.add(Fraction(0))
    for p in fs.pairings:
        pts.update((p.a_lo, p.a_hi, p.b_lo, p.b_hi % L))
    segs = []
    for p in fs.pairings:
        segs.append((p.a_lo, p.a_hi, p))
        segs.append((p.b_lo, p.b_hi, p))
    segs.sort(key=lambda s: (s[0], s[1]))
    seg_lo = [s[0] for s in segs]
    for x in list(pts):
        i = bisect_right(seg_lo, x) - 1
        if i >= 0 and segs[i][0] < x < segs[i][1]:
            pts.add(segs[i][2].mirror(x) % L)
    bps = sorted(x % L for x in pts)
    bps = sorted(set(bps))
    index = {x: i for i, x in enumerate(bps)}
    uf = _UnionFind(len(bps))
    n_edges = 0
    for p in fs.pairings:
        lo_i, hi_i = bisect_left(bps, p.a_lo), bisect_right(bps, p.a_hi)
        sub = bps[lo_i:hi_i]
        if not sub or sub[-1] != p.a_hi:
            sub = sub + [p.a_hi]
        n_edges += len(sub) - 1
        for x in sub:
            uf.union(index[x], index[p.mirror(x) % L])
    for (lo, hi) in fs.gaps:
        base = index[lo]
        for j in range(bisect_right(bps, lo), bisect_left(bps, hi)):
            uf.union(base, j)
        uf.union(base, index[hi % L])
    n_nodes = len({uf.find(i) for i in range(len(bps))})
    n_faces = len(fs.scheme.multipolygon.polygons)
    return n_nodes - n_edges + n_faces
