import random
from fractions import Fraction as F

import pytest

from paperfold import builtin_example, truncate
from paperfold.scar import (
    ScarPair,
    classify_point,
    component_certified,
    euler_check,
    lambda_units,
    point_units,
)

from oracle import DenseOracle


def test_seq_distances_exact(seq_pair_256):
    pair = seq_pair_256
    assert pair.distance(F(0), F(5, 8)) == (F(1, 8), F(1, 8))
    assert pair.distance(F(13, 16), F(3, 4)) == (F(1, 16), F(1, 16))
    assert pair.distance(F(1, 2), F(5, 8)) == (F(1, 8), F(1, 8))
    assert pair.distance(F(1, 3), F(1, 3)) == (F(0), F(0))


def test_seq_distance_brackets_dense_oracle(seq_pair_256, seq_scheme):
    pair = seq_pair_256
    rng = random.Random(7)
    pts = [F(rng.randrange(1, 2 ** 12), 2 ** 12) * 4 for _ in range(8)]
    oracle = DenseOracle(seq_scheme, step=F(1, 2 ** 10), generations=12,
                         extra_pairings=pair.fs.pairings, extra_params=pts)
    for i in range(0, len(pts) - 1, 2):
        x, y = pts[i], pts[i + 1]
        lo, hi = pair.distance(x, y)
        d = oracle.distance(x, y)
        assert float(lo) - 1e-9 <= d <= float(hi) + 1e-9


def test_classification(seq_pair_256, cantor_pair_256):
    assert classify_point(seq_pair_256, F(13, 16)).kind == "vertex"
    assert classify_point(seq_pair_256, F(13, 16)).valence == 1
    assert classify_point(seq_pair_256, F(0)).kind == "declared_singular"
    assert classify_point(seq_pair_256, F(5, 16)).kind == "declared_singular"
    assert classify_point(seq_pair_256, F(3, 2)).kind == "planar"
    zeta = classify_point(cantor_pair_256, F(5, 18))
    assert (zeta.kind, zeta.valence) == ("vertex", 3)
    assert classify_point(cantor_pair_256, F(1, 3)).valence == 1
    assert classify_point(cantor_pair_256, F(2, 3)).kind == "declared_singular"
    # the top-fold tip of the square is a valence 1 vertex
    assert classify_point(cantor_pair_256, F(5, 2)).valence == 1
    # corner class {i, 1+i} is a valence 2 vertex (polygon vertices in fiber)
    assert classify_point(cantor_pair_256, F(2)).valence == 2


def test_euler_characteristic():
    assert euler_check(truncate(builtin_example("pillow"), F(1))) == 2
    assert euler_check(truncate(builtin_example("seq"), F(1, 64))) == 2
    for eps in (F(2, 3) ** 3, F(2, 3) ** 5):
        assert euler_check(truncate(builtin_example("cantor"), eps)) == 2


def test_seq_component_values(seq_pair_256):
    pair = seq_pair_256
    units = lambda_units(pair)
    # top window: everything merged, one frontier point on the vertical edge
    for r in (F(1, 10), F(7, 64), F(1, 8)):
        ci = component_certified(pair, units, F(0), r)
        assert ci.exact and ci.measure == 1 + 2 * r and ci.frontier_count == 1
    # second window, the class away from the first accumulation point
    for r in (F(3, 64), F(1, 20), F(1, 16)):
        ci = component_certified(pair, units, F(0), r)
        assert ci.exact and ci.measure == F(1, 2) + 4 * r and ci.frontier_count == 2
    # second window at the first accumulation point: the k=1 fold is only
    # partially covered (its tip sits at distance exactly 1/16)
    for r in (F(3, 64), F(1, 20)):
        ci = component_certified(pair, units, F(5, 8), r)
        assert ci.exact and ci.measure == F(1, 8) + 4 * r and ci.frontier_count == 2


def test_chain_remark_same_component(seq_pair_256):
    pair = seq_pair_256
    units = lambda_units(pair)
    r = F(1, 20)
    a = component_certified(pair, units, F(0), r)       # q = s
    b = component_certified(pair, units, F(5, 16), r)   # q = s_1, d(s, s_1) = 1/16 < 2r
    assert a.members == b.members
    assert a.measure == b.measure and a.frontier_count == b.frontier_count
    assert a.frontier_params() == b.frontier_params()


def test_cm_lower_bound_2r(seq_pair_256, cantor_pair_256):
    for pair in (seq_pair_256, cantor_pair_256):
        units = lambda_units(pair)
        q = units[0].rep_param
        for r in (F(1, 50), F(1, 17), F(1, 9)):
            ci = component_certified(pair, units, q, r)
            assert ci.measure >= 2 * r


def test_metric_axioms_random_triples(seq_pair_256):
    pair = seq_pair_256
    rng = random.Random(3)
    pts = [F(rng.randrange(0, 4 * 64), 64) for _ in range(9)]
    for i in range(0, 9, 3):
        x, y, z = pts[i:i + 3]
        for mode in ("free", "collapse"):
            g = pair.free if mode == "free" else pair.collapse
            from paperfold.scar import point_distance
            d = lambda a, b: point_distance(g, g.locate(a), g.locate(b))
            assert d(x, y) == d(y, x)
            assert d(x, z) <= d(x, y) + d(y, z)
            assert d(x, x) == 0


def test_sandwich_and_nonexpansion(seq_scheme):
    rng = random.Random(11)
    pts = [(F(rng.randrange(0, 4 * 256), 256), F(rng.randrange(0, 4 * 256), 256))
           for _ in range(6)]
    widths = []
    for eps in (F(1, 16), F(1, 64), F(1, 256)):
        pair = ScarPair(truncate(seq_scheme, eps))
        ws = []
        for (x, y) in pts:
            lo, hi = pair.distance(x, y)
            assert lo <= hi
            # non-expansion: below the boundary arc distance
            arc = min((x - y) % 4, (y - x) % 4)
            assert hi <= arc
            assert hi - lo <= 2 * pair.fs.tail_measure
            ws.append(hi - lo)
        widths.append(ws)
    for i in range(len(widths) - 1):
        assert all(b <= a for (a, b) in zip(widths[i], widths[i + 1]))


def test_planar_and_vertex_ball_growth(seq_pair_256, cantor_pair_256):
    # planar point: m = 4s, n = 2 for small s
    pair = seq_pair_256
    units = point_units(pair, F(3, 2))
    s = F(1, 100)
    ci = component_certified(pair, units, F(3, 2), s)
    assert ci.exact and ci.measure == 4 * s and ci.frontier_count == 2
    # valence 3 vertex of the cantor scheme: m = 6s, n = 3
    pair = cantor_pair_256
    units = point_units(pair, F(5, 18))
    s = F(1, 300)
    ci = component_certified(pair, units, F(5, 18), s)
    assert ci.exact and ci.measure == 6 * s and ci.frontier_count == 3


def test_ball_component_errors(seq_pair_256):
    pair = seq_pair_256
    units = lambda_units(pair)
    from paperfold.scheme import SchemeError
    with pytest.raises(SchemeError):
        component_certified(pair, units, F(3, 2), F(1, 10))  # q not in base
    with pytest.raises(SchemeError):
        component_certified(pair, units, F(0), F(1, 10), rbar=F(1, 20))  # r >= rbar


def test_nonplain_quotient_raises():
    from paperfold.scheme import FoldingScheme, Multipolygon, Pairing, Polygon
    from paperfold.scar import ScarGraph, StructureError
    square = Polygon(((F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1))))
    torus = FoldingScheme(
        multipolygon=Multipolygon((square,)),
        pairings=(Pairing(F(0), F(1), F(2), F(3)), Pairing(F(1), F(2), F(3), F(4))),
    )
    fs = truncate(torus, F(1))
    with pytest.raises(StructureError):
        ScarGraph(fs, "free")
    with pytest.raises(StructureError):
        euler_check(fs)
