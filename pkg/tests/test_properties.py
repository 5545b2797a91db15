"""Property suites: no worked-example numbers, structure only."""

import random
from fractions import Fraction as F

from hypothesis import given, settings
import hypothesis.strategies as st

from paperfold import is_plain, truncate, validate
from paperfold.scheme import (
    FoldingScheme,
    Multipolygon,
    Pairing,
    Polygon,
)
from paperfold.scar import (
    ScarPair,
    component_certified,
    euler_check,
    lambda_units,
    point_distance,
)


def random_plain_tiling(rng: random.Random, lo: F, hi: F, depth: int) -> list[Pairing]:
    """Exactly tile [lo, hi] with an unlinked pairing collection."""
    width = hi - lo
    if depth <= 0 or width <= F(1, 64) or rng.random() < 0.35:
        mid = lo + width / 2
        return [Pairing(lo, mid, mid, hi)]
    if rng.random() < 0.5:
        # outer pairing around a recursive inside
        ell = width * F(rng.randrange(1, 4), 8)
        inner = random_plain_tiling(rng, lo + ell, hi - ell, depth - 1)
        return [Pairing(lo, lo + ell, hi - ell, hi)] + inner
    cut = lo + width * F(rng.randrange(1, 4), 4)
    return random_plain_tiling(rng, lo, cut, depth - 1) + random_plain_tiling(
        rng, cut, hi, depth - 1)


def random_plain_scheme(seed: int) -> FoldingScheme:
    rng = random.Random(seed)
    w, h = F(rng.randrange(1, 5)), F(rng.randrange(1, 5))
    poly = Polygon(((F(0), F(0)), (w, F(0)), (w, h), (F(0), h)))
    pairings = random_plain_tiling(rng, F(0), poly.perimeter, 5)
    return FoldingScheme(multipolygon=Multipolygon((poly,)), pairings=tuple(pairings))


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_plain_schemes_structure(seed):
    scheme = random_plain_scheme(seed)
    assert validate(scheme).ok
    assert is_plain(scheme).plain
    fs = truncate(scheme, F(1))
    assert euler_check(fs) == 2
    pair = ScarPair(fs)
    # the pair-edge structure of a full finite plain scheme is a tree
    assert all(e.kind == "pair" for e in pair.free.edges)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_metric_axioms_on_random_schemes(seed, pts_seed):
    scheme = random_plain_scheme(seed)
    pair = ScarPair(truncate(scheme, F(1)))
    L = scheme.boundary_length
    rng = random.Random(pts_seed)
    pts = [F(rng.randrange(0, 256), 256) * L / 1 for _ in range(3)]
    g = pair.free
    d = lambda a, b: point_distance(g, g.locate(a % L), g.locate(b % L))
    x, y, z = pts
    assert d(x, y) == d(y, x)
    assert d(x, z) <= d(x, y) + d(y, z)
    assert d(x, x) == 0
    # non-expansion under the quotient
    arc = min((x - y) % L, (y - x) % L)
    assert d(x, y) <= arc


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_classify_total_on_random_points(seed):
    scheme = random_plain_scheme(seed)
    pair = ScarPair(truncate(scheme, F(1)))
    from paperfold.scar import classify_point
    rng = random.Random(seed + 1)
    L = scheme.boundary_length
    for _ in range(6):
        t = F(rng.randrange(0, 1024), 1024) * L
        pc = classify_point(pair, t)
        assert pc.kind in ("planar", "vertex", "declared_singular", "truncation_unknown")


def test_ncc_nonincreasing_on_radius_grid(seq_pair_256):
    from paperfold.criterion import LambdaAnalysis
    an = LambdaAnalysis(seq_pair_256)
    grid = [F(1, 3) * F(k, 40) for k in range(1, 40)]
    counts = [an.merge_free.ncc(r) for r in grid]
    assert all(a >= b for (a, b) in zip(counts, counts[1:]))


def test_iota_bounded_by_M_over_2r(cantor_pair_mid):
    from paperfold.criterion import CriterionParams, goodness
    params = CriterionParams(F(1, 6), F(1, 4))
    prof = goodness(cantor_pair_mid, F(2, 3), (F(1, 54), F(1, 6)), params)
    rng = random.Random(5)
    for _ in range(24):
        s = F(1, 54) + F(rng.randrange(1, 1024), 1024) * (F(1, 6) - F(1, 54))
        assert prof.iota(s) <= float(params.M / (2 * s)) + 1e-15


def test_cm_at_least_2r_random_radii(seq_pair_256):
    pair = seq_pair_256
    units = lambda_units(pair)
    rng = random.Random(9)
    for _ in range(6):
        r = F(rng.randrange(2, 84), 256)
        ci = component_certified(pair, units, F(0), r)
        assert ci.measure >= 2 * r


def test_planar_module_sanity():
    # unnormalized planar integrand 1/(6s) integrates to (1/6)ln(s/r); the
    # M-scaled module bound stays below the exact flat module (1/2pi)ln(s/r)
    import math
    for M in (F(1, 5), F(2, 15), F(27, 200)):
        assert float(M) / 6 < 1 / (2 * math.pi)
