import math
from fractions import Fraction as F

import pytest

from paperfold import builtin_example
from paperfold.scheme import Multipolygon, Polygon, SchemeError
from paperfold.scar import lambda_units, point_units
from paperfold.collar import (
    _conditions_hold,
    _half_angle_cots,
    annulus_module_bound,
    build_collar,
    disk_boundary,
    grotzsch_bound,
    strip_turning,
)
from paperfold.criterion import CriterionParams, goodness

SQUARE_MP = builtin_example("seq").multipolygon
TRI_345 = Multipolygon((Polygon(((F(0), F(0)), (F(4), F(0)), (F(4), F(3)))),))


def test_square_collar_heights():
    spec = build_collar(SQUARE_MP)
    assert spec.hbar == F(9, 40)           # 9/10 of the exact supremum 1/4
    spec2 = build_collar(SQUARE_MP, F(1, 4))
    assert spec2.hbar == F(1, 4)
    assert spec2.top_length(0, F(1, 4)) == F(1, 2)


def test_conditions_bracketing():
    poly = SQUARE_MP.polygons[0]
    cots = _half_angle_cots(poly)
    spec = build_collar(SQUARE_MP)
    sup = spec.hbar / F(9, 10)
    assert _conditions_hold(poly, cots, spec.hbar)
    assert not _conditions_hold(poly, cots, 2 * sup)


def test_triangle_collar():
    spec = build_collar(TRI_345)
    assert spec.hbar > 0
    assert spec.cots == (3, 1, 2)
    with pytest.raises(SchemeError):
        build_collar(TRI_345, F(10))       # far beyond the inradius


def test_collar_point_and_retract():
    spec = build_collar(SQUARE_MP, F(1, 4))
    assert spec.point(F(1, 2), F(0)) == (F(1, 2), F(0))
    # the mid-bottom leaf is vertical by symmetry
    assert spec.point(F(1, 2), F(1, 8)) == (F(1, 2), F(1, 8))
    assert spec.retract(F(1, 2), F(1, 8), F(0)) == (F(1, 2), F(0))
    with pytest.raises(SchemeError):
        spec.retract(F(1, 2), F(1, 16), F(1, 8))
    # retraction identity: boundary parameter is preserved along the leaf
    t = F(7, 3)
    base = spec.point(t, F(0))
    assert spec.retract(t, spec.hbar, F(0)) == base


def test_disk_boundary_counts(seq_pair_256):
    pair = seq_pair_256
    spec = build_collar(SQUARE_MP, F(1, 4))
    units = lambda_units(pair)
    d1 = disk_boundary(pair, spec, units, F(0), F(1, 10), rbar=F(1, 3))
    assert d1.n == 1
    assert len(d1.horizontals) == 1 and len(d1.verticals) == 2
    d2 = disk_boundary(pair, spec, units, F(0), F(1, 20), rbar=F(1, 3))
    assert d2.n == 2
    assert len(d2.horizontals) == 2 and len(d2.verticals) == 4
    # planar point, small radius: two cross cuts
    punits = point_units(pair, F(3, 2))
    d3 = disk_boundary(pair, spec, punits, F(3, 2), F(1, 100), rbar=F(1, 3))
    assert d3.n == 2
    # strips develop into simple plane polygons: turning +2pi each
    for disk in (d1, d2, d3):
        for (iv, _) in disk.horizontals:
            turn = strip_turning(spec, iv, disk.h)
            assert abs(turn - 2 * math.pi) < 1e-6


def test_disk_boundary_rejects_breakpoint_radius(seq_pair_256):
    spec = build_collar(SQUARE_MP, F(1, 4))
    units = lambda_units(seq_pair_256)
    with pytest.raises(SchemeError):
        disk_boundary(seq_pair_256, spec, units, F(5, 8), F(1, 16), rbar=F(1, 3))


def test_grotzsch_bound_values():
    assert grotzsch_bound(1.0, 0.0, 8.0) == 0.0
    assert abs(grotzsch_bound(1.0, 0.0, 8.0 * math.exp(-2 * math.pi)) - 1.0) < 1e-12
    with pytest.raises(SchemeError):
        grotzsch_bound(1.0, 1.0, 1.0)


def test_annulus_module_bound_cantor_window(cantor_pair_mid):
    params = CriterionParams(F(1, 6), F(1, 4))
    assert params.M == F(2, 15)
    lo, hi = F(1, 54), F(1, 18)
    prof = goodness(cantor_pair_mid, F(2, 3), (lo, hi), params)
    v = annulus_module_bound(prof, lo, hi)
    assert v >= float(params.M) * math.log(39 / 25) / 7 - 1e-12
    # additivity of the module over concentric pieces
    mid = (lo + hi) / 2
    assert (annulus_module_bound(prof, lo, mid) + annulus_module_bound(prof, mid, hi)
            <= annulus_module_bound(prof, lo, hi) + 1e-12)
    # the flat-annulus ceiling: M/6 < 1/(2 pi)
    s, u = F(1, 100), F(1, 50)
    flat_lower = float(params.M) * math.log(2) / 6
    assert flat_lower <= math.log(2) / (2 * math.pi)
