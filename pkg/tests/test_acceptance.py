"""Acceptance suite: one criterion per test, one PASS line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the pass lines.
"""

import math
import random
import time
from fractions import Fraction as F

import pytest

from paperfold import builtin_example, truncate
from paperfold.scheme import truncate_max_gap
from paperfold.scar import (
    ScarPair,
    component_certified,
    euler_check,
    lambda_units,
    point_distance_float,
)
from paperfold.criterion import (
    CriterionParams,
    LambdaAnalysis,
    divergence_report,
    goodness,
    integral_lower_bound,
    mcmullen_system,
)
from paperfold.modulus import RhoEvaluator, modulus_params

from oracle import DenseOracle


def _report(cid: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {cid}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"{cid}: {detail}"


# -- criterion 1: Example component data, exact rational equality -----------

def test_c1_component_data(seq_pair_256):
    t0 = time.time()
    pair = seq_pair_256
    units = lambda_units(pair)
    ok = True
    # top window (1/16, 1/8]: cm = 1 + 2r, cn = 1, any q
    for r in (F(9, 128), F(1, 10), F(1, 8)):
        for q in (F(0), F(5, 8)):
            ci = component_certified(pair, units, q, r)
            ok &= ci.exact and ci.measure == 1 + 2 * r and ci.frontier_count == 1
    # (1/32, 1/16]: away from the first accumulation point: cm = 1/2 + 4r, cn = 2
    for r in (F(3, 64), F(1, 20), F(1, 16)):
        ci = component_certified(pair, units, F(0), r)
        ok &= ci.exact and ci.measure == F(1, 2) + 4 * r and ci.frontier_count == 2
    elapsed = time.time() - t0
    ok &= elapsed < 1.0
    _report("1 (component data rows 1 and 3, zero tolerance)", ok,
            f"runtime {elapsed:.3f}s")


def test_c1_s0_row_corrected_values(seq_pair_256):
    # the honest exact values for the q = s_0 row, zero tolerance, plus a
    # dense-oracle cross-check that the k = 1 fold is only partially covered
    pair = seq_pair_256
    units = lambda_units(pair)
    ok = True
    for r in (F(3, 64), F(1, 20)):
        ci = component_certified(pair, units, F(5, 8), r)
        ok &= ci.exact and ci.measure == F(1, 8) + 4 * r and ci.frontier_count == 2
    # at the right endpoint the stated cm holds and the fold tip collides
    ci = component_certified(pair, units, F(5, 8), F(1, 16))
    ok &= ci.measure == F(1, 4) + 2 * F(1, 16) and "node_frontier" in ci.flags
    # oracle: the tip parameter 13/16 is at scar distance exactly 1/16 from
    # the accumulation point, so it cannot be inside the open ball at r < 1/16
    oracle = DenseOracle(pair.fs.scheme, step=F(1, 2 ** 10), generations=12,
                         extra_pairings=pair.fs.pairings)
    d = oracle.distance(F(13, 16), F(5, 8))
    ok &= abs(d - 1 / 16) < 1e-9
    _report("1 (s_0 row, corrected exact values; see decisions ledger)", ok)


@pytest.mark.xfail(strict=True, reason=(
    "stated row cm = 1/4 + 2r, cn = 1 on (1/32, 1/16] at q = s_0 contradicts "
    "the scheme: the k = 1 fold tip lies at distance exactly 1/16, so the open "
    "ball covers that fold only partially (cm = 1/8 + 4r, cn = 2); see ledger"))
def test_c1_s0_row_as_stated(seq_pair_256):
    pair = seq_pair_256
    units = lambda_units(pair)
    r = F(1, 20)
    ci = component_certified(pair, units, F(5, 8), r)
    assert ci.measure == F(1, 4) + 2 * r and ci.frontier_count == 1


# -- criterion 2: seq window bounds and harmonic certificate -----------------

def test_c2_seq_window_bounds():
    seq = builtin_example("seq")
    pair = ScarPair(truncate_max_gap(seq, F(1, 2 ** 17)))
    params = CriterionParams(F(1, 3), F(9, 40))
    ok = True
    details = []
    for j in range(0, 9):
        lo, hi = F(1, 2 ** (j + 4)), F(1, 2 ** (j + 3))
        prof = goodness(pair, F(0), (lo, hi), params)
        v = integral_lower_bound(prof, lo, hi, unnormalized=True)
        req = math.log(22 / 19) / (3 * (j + 1))
        ok &= v >= req - 1e-9
        details.append(f"j={j}: {v:.6f}>={req:.6f}")
    cert = divergence_report(seq, K=9, hypothesis="harmonic")
    ok &= cert.certified and all(w.certified for w in cert.windows)
    _report("2 (seq window bounds j=0..8 + HARMONIC certificate)", ok,
            cert.verdict)


# -- criterion 3: cantor window bounds, constant certificate, 2^k classes ----

def test_c3_cantor_window_bounds():
    cert = divergence_report(builtin_example("cantor"), K=6, hypothesis="constant")
    req = math.log(39 / 25) / 7
    ok = cert.certified
    for w in cert.windows:
        ok &= w.certified
        ok &= w.value / float(cert.M) >= req - 1e-9
        ok &= w.n_classes == 2 ** w.k
    _report("3 (cantor window bounds k=0..5 + CONSTANT certificate + 2^k classes)",
            ok, cert.verdict)


# -- criterion 4: worked-example constants ------------------------------------

def test_c4_modulus_params():
    p = modulus_params(F(4), F(1, 6), F(1, 4))
    ok = p.delta == F(1, 192) and p.M == F(2, 15)
    _report("4 (delta = 1/192 and M = 2/15, exact)", ok)


# -- criterion 5: cantor Hölder exponent --------------------------------------

def test_c5_cantor_hoelder_exponent():
    cant = builtin_example("cantor")
    pair = ScarPair(truncate_max_gap(cant, F(1, 2) * F(1, 3) ** 9 / 8))
    params = modulus_params(F(4), F(1, 6), F(1, 4))
    ev = RhoEvaluator(pair, params)
    ts = [F(1, 384) * F(1, 2) ** m for m in range(0, 11)]

    def exponents(q):
        geom = ev.point_geom(q, F(0))
        vals = [ev.rho(geom, t) for t in ts]
        pairwise = []
        for i in range(len(ts)):
            for j in range(i):
                pairwise.append(
                    math.log(vals[j] / vals[i]) / math.log(float(ts[j] / ts[i])))
        versus_max = [
            math.log(vals[0] / vals[i]) / math.log(float(ts[0] / ts[i]))
            for i in range(1, len(ts))
        ]
        return min(pairwise), min(versus_max)

    all_pairs, _ = exponents(F(2, 3))
    ok = all_pairs >= 1 / 21
    _, vs_max_corner = exponents(F(0))
    ok &= vs_max_corner >= 1 / 21
    _report("5 (effective exponent >= 1/21 on the dyadic grid, "
            "all pairs at q = pi(2/3); vs-t_max at the corner class)",
            ok, f"min exponent {all_pairs:.5f}")


# -- criterion 6: dense Dijkstra oracle equivalence ---------------------------

def test_c6_metric_oracle_equivalence(seq_pair_256, cantor_pair_256):
    rng = random.Random(20240)
    t0 = time.time()
    ok = True
    worst_width = 0.0
    for pair in (seq_pair_256, cantor_pair_256):
        scheme = pair.fs.scheme
        pts = [F(rng.randrange(0, 4 * 2 ** 14), 2 ** 14) for _ in range(50)]
        oracle = DenseOracle(scheme, step=F(1, 2 ** 14), generations=10,
                             extra_pairings=pair.fs.pairings, extra_params=pts)
        tail = float(pair.fs.tail_measure)
        for i in range(0, 50, 2):
            x, y = pts[i], pts[i + 1]
            lo = point_distance_float(pair.collapse, pair.collapse.locate(x),
                                      pair.collapse.locate(y))
            hi = point_distance_float(pair.free, pair.free.locate(x),
                                      pair.free.locate(y))
            d = oracle.distance(x, y)
            ok &= lo - 1e-9 <= d <= hi + 1e-9
            width = hi - lo
            ok &= width <= 2 * tail + 1e-9
            worst_width = max(worst_width, width)
    elapsed = time.time() - t0
    ok &= elapsed < 60.0
    _report("6 (tree brackets contain the dense oracle, width <= 2*tail)",
            ok, f"runtime {elapsed:.1f}s, worst width {worst_width:.5f}")


# -- criterion 7: property suites ---------------------------------------------

def test_c7_property_suites(seq_pair_256, cantor_pair_mid):
    ok = True
    # metric axioms on random triples
    rng = random.Random(77)
    from paperfold.scar import point_distance
    g = seq_pair_256.free
    for _ in range(4):
        x, y, z = (F(rng.randrange(0, 1024), 256) for _ in range(3))
        d = lambda a, b: point_distance(g, g.locate(a), g.locate(b))
        ok &= d(x, y) == d(y, x) and d(x, z) <= d(x, y) + d(y, z) and d(x, x) == 0
    # dendrite acyclicity + Euler characteristic across the corpus
    for name, eps in (("pillow", F(1)), ("seq", F(1, 64)), ("cantor", F(2, 3) ** 5)):
        ok &= euler_check(truncate(builtin_example(name), eps)) == 2
    # cm >= 2r
    units = lambda_units(seq_pair_256)
    for r in (F(1, 50), F(1, 20), F(1, 9)):
        ok &= component_certified(seq_pair_256, units, F(0), r).measure >= 2 * r
    # iota <= M/(2r)
    params = CriterionParams(F(1, 6), F(1, 4))
    prof = goodness(cantor_pair_mid, F(2, 3), (F(1, 54), F(1, 6)), params)
    for s in (F(1, 50), F(1, 30), F(1, 10)):
        ok &= prof.iota(s) <= float(params.M / (2 * s)) + 1e-15
    # ncc nonincreasing
    an = LambdaAnalysis(seq_pair_256)
    grid = [F(k, 128) for k in range(1, 42)]
    counts = [an.merge_free.ncc(r) for r in grid]
    ok &= all(a >= b for (a, b) in zip(counts, counts[1:]))
    # rho strictly increasing with rho(0) = 0, and continuity at t = h_q
    mp = modulus_params(F(4), F(1, 3), F(9, 40))
    ev = RhoEvaluator(seq_pair_256, mp)
    geom = ev.point_geom(F(0), F(0))
    ok &= ev.rho(geom, F(0)) == 0.0
    ts = [mp.delta / 2 * F(1, 2) ** m for m in range(0, 5)]
    vals = [ev.rho(geom, t) for t in ts]
    ok &= all(a > b > 0 for (a, b) in zip(vals, vals[1:]))
    h = mp.delta / 4
    geom_h = ev.point_geom(F(3, 2), h)
    eps = h / 2 ** 16
    v0, v1 = ev.rho(geom_h, h - eps), ev.rho(geom_h, h + eps)
    ok &= abs(v0 - v1) / v1 < 1e-3
    # nested annulus flags for the Cantor scheme, caps exact
    system = mcmullen_system(builtin_example("cantor"), 1, 5, rbar=F(1, 3))
    ok &= system.all_conditions
    M = CriterionParams(F(1, 3), F(1, 4)).M
    for lev in system.levels:
        cap = min(lev.r_lo / (F(2) ** (lev.k - 1) * M), (lev.r_hi - lev.r_lo) / 3)
        ok &= lev.eps_cap == cap and all(c.eps <= cap for c in lev.classes)
    _report("7 (property suites)", ok)


# -- criterion 8: scope statement ---------------------------------------------

def test_c8_scope_statement():
    # The full-scale conclusions (existence of the extended conformal
    # structure; that the global modulus bounds an actual uniformizing map)
    # are not desk-scale reproducible: no uniformizing map is computed
    # anywhere in this package.  Acceptance for those statements rests on the
    # certificate and property suites above, as permitted substitutes.
    _report("8 (full-scale conclusions delegated to certificate/property suites)",
            True)
