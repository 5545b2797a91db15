"""Independent oracles for the test suite.

Nothing here uses the scar-graph machinery: distances come from a dense
Dijkstra graph over a fine boundary grid with sampled identifications, and
series/interval values come from brute-force enumeration.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left
from fractions import Fraction

from paperfold.scheme import FoldingScheme, Pairing


def expand_generations(scheme: FoldingScheme, generations: int) -> list[Pairing]:
    """Rule applications applied breadth-first a fixed number of rounds."""
    seen = {p.key(): p for p in scheme.pairings}
    frontier = list(scheme.pairings)
    for _ in range(generations):
        nxt = []
        for p in frontier:
            for r in scheme.rules:
                c = r.apply_to_pairing(p)
                if c is not None and c.length < p.length and c.key() not in seen:
                    seen[c.key()] = c
                    nxt.append(c)
        frontier = nxt
        if not frontier:
            break
    return sorted(seen.values(), key=Pairing.key)


class DenseOracle:
    """Shortest paths on the boundary circle with zero-cost identification
    jumps at sampled points of every pairing."""

    def __init__(self, scheme: FoldingScheme, step: Fraction = Fraction(1, 2 ** 14),
                 generations: int = 10, extra_pairings=(), extra_params=()):
        L = scheme.boundary_length
        pairings = {p.key(): p for p in expand_generations(scheme, generations)}
        for p in extra_pairings:
            pairings[p.key()] = p
        pairings = list(pairings.values())
        params: set[Fraction] = set(extra_params)
        k = Fraction(0)
        while k < L:
            params.add(k)
            k += step
        for p in pairings:
            params.update((p.a_lo, p.a_hi, p.b_lo, p.b_hi % L))
        # mirrors of grid params inside each pairing segment (both sides)
        base = sorted(params)
        for p in pairings:
            for (lo, hi) in ((p.a_lo, p.a_hi), (p.b_lo, p.b_hi)):
                i = bisect_left(base, lo)
                while i < len(base) and base[i] <= hi:
                    params.add(p.mirror(base[i]) % L)
                    i += 1
        self.params = sorted(params)
        index = {x: i for i, x in enumerate(self.params)}
        n = len(self.params)

        parent = list(range(n))

        def find(x):
            root = x
            while parent[root] != root:
                root = parent[root]
            while parent[x] != root:
                parent[x], x = root, parent[x]
            return root

        for p in pairings:
            for (lo, hi) in ((p.a_lo, p.a_hi),):
                i = bisect_left(self.params, lo)
                while i < n and self.params[i] <= hi:
                    x = self.params[i]
                    m = p.mirror(x) % L
                    ra, rb = find(index[x]), find(index[m])
                    if ra != rb:
                        parent[rb] = ra
                    i += 1
        self.rep = [find(i) for i in range(n)]
        # chain adjacency between consecutive circle points, contracted
        adj: dict[int, list[tuple[int, float]]] = {}
        for i in range(n):
            j = (i + 1) % n
            w = float((self.params[j] - self.params[i]) % L)
            a, b = self.rep[i], self.rep[j]
            if a != b:
                adj.setdefault(a, []).append((b, w))
                adj.setdefault(b, []).append((a, w))
        self.adj = adj
        self.index = index
        self.L = L

    def node_of(self, t: Fraction) -> int:
        t = Fraction(t) % self.L
        i = self.index.get(t)
        if i is None:
            raise KeyError(f"{t} is not an oracle node")
        return self.rep[i]

    def distance(self, x: Fraction, y: Fraction) -> float:
        import math
        sx, sy = self.node_of(x), self.node_of(y)
        if sx == sy:
            return 0.0
        dist = {sx: 0.0}
        heap = [(0.0, sx)]
        while heap:
            d, u = heapq.heappop(heap)
            if u == sy:
                return d
            if d > dist.get(u, math.inf):
                continue
            for (v, w) in self.adj.get(u, ()):
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return math.inf

    def distances_from(self, x: Fraction) -> dict[int, float]:
        import math
        sx = self.node_of(x)
        dist = {sx: 0.0}
        heap = [(0.0, sx)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist.get(u, math.inf):
                continue
            for (v, w) in self.adj.get(u, ()):
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist


def seq_tail_bruteforce(level: int, cap: int = 80) -> Fraction:
    """Gap measure of the seq truncation that expands exactly the bottom
    pairings with j+k <= level, by direct summation."""
    total = Fraction(0)
    for n in range(level + 1, cap + 1):
        total += (n + 1) * Fraction(1, 2 ** (n + 2))
    # the brute sum is a lower bound; the cap remainder is below 2^-(cap-5)
    return total


def cantor_intervals_to_depth(depth: int):
    """Direct enumeration of the middle-thirds construction on [0, 2/3]:
    returns (E intervals by level, retained pieces at `depth`)."""
    pieces = [(Fraction(0), Fraction(2, 3))]
    es = []
    for _ in range(1, depth + 1):
        nxt = []
        level = []
        for (a, b) in pieces:
            third = (b - a) / 3
            level.append((a + third, b - third))
            nxt.append((a, a + third))
            nxt.append((b - third, b))
        es.append(level)
        pieces = nxt
    return es, pieces


def cantor_mirror(iv):
    (a, b) = iv
    return (1 - b / 2, 1 - a / 2)
