"""Moduli of continuity for the normalized uniformizing map.

The local modulus at a point q of the collar region combines two certified
goodness integrals: one for the single-point ball growth at the retraction
psi(q), one for the singular-set component data at the nearest singular
point.  Lower bounds of the integrals sit inside exp() in the denominator,
so every computed value is an upper envelope of the true modulus, which is
still a valid modulus of continuity.

The scale constant R of the normalization is not computable from the data
(only its existence is known); output defaults to units of 8R, with an
explicit override.  The global modulus takes a grid maximum over the collar
and is flagged GRID-APPROXIMATE: a lower bound to the true supremum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .rationals import fmt
from .scheme import SchemeError
from .scar import ScarPair, point_units
from .criterion import (
    GoodnessProfile,
    LambdaAnalysis,
    integral_lower_bound,
)

Frac = Fraction

NORMALIZED = "normalized"
EXPLICIT = "explicit"


@dataclass(frozen=True)
class ModulusParams:
    rbar: Fraction
    hbar: Fraction
    boundary_length: Fraction
    R_mode: str = NORMALIZED
    R_value: Optional[float] = None

    def __post_init__(self):
        if self.R_mode not in (NORMALIZED, EXPLICIT):
            raise SchemeError("R_mode must be normalized or explicit")
        if self.R_mode == EXPLICIT and (self.R_value is None or self.R_value <= 0):
            raise SchemeError("explicit mode needs a positive R")

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 4) * min(
            self.rbar, self.hbar, 2 * self.rbar * self.hbar / self.boundary_length
        )

    @property
    def M(self) -> Fraction:
        return Fraction(1, 5) * min(self.rbar / self.hbar, self.hbar / self.rbar)

    @property
    def kappa_log(self) -> float:
        """ln of the interior Lipschitz constant 2*exp(48*L/delta)."""
        return math.log(2.0) + float(48 * self.boundary_length / self.delta)

    @property
    def mu_rate(self) -> Fraction:
        return self.rbar / (2 * self.delta)

    def scale(self) -> float:
        """Numerator scale: 1 in units of 8R, else the literal 8R."""
        return 1.0 if self.R_mode == NORMALIZED else 8.0 * self.R_value


def modulus_params(boundary_length: Fraction, rbar: Fraction, hbar: Fraction,
                   R: Optional[float] = None) -> ModulusParams:
    return ModulusParams(
        rbar=Fraction(rbar), hbar=Fraction(hbar),
        boundary_length=Fraction(boundary_length),
        R_mode=EXPLICIT if R is not None else NORMALIZED, R_value=R,
    )


@dataclass(frozen=True)
class PointGeom:
    """Collar coordinates of a point plus its singular-set geometry."""

    t_param: Fraction
    h_q: Fraction
    d_lo: Fraction
    d_hi: Fraction
    p_uid: Optional[int]       # nearest singular unit, when one exists

    @property
    def d_exact(self) -> Optional[Fraction]:
        return self.d_lo if self.d_lo == self.d_hi else None


def geometry_functions(geom: PointGeom, params: ModulusParams, t: Fraction,
                       d_q: Optional[Fraction] = None) -> dict:
    """The radius bookkeeping of the local modulus at one evaluation scale."""
    t = Fraction(t)
    if not (0 <= t <= params.delta / 2):
        raise SchemeError(f"t={fmt(t)} outside [0, delta/2]")
    d = Fraction(d_q) if d_q is not None else geom.d_hi
    xi = max(geom.h_q, t)
    mu_xi = params.mu_rate * (xi + geom.h_q)
    lam = min(mu_xi, d)
    eta = max(mu_xi, d)
    alpha = min(2 * d, params.rbar)
    beta = max(2 * d, params.rbar)
    return {"xi": xi, "mu_xi": mu_xi, "lam": lam, "eta": eta,
            "alpha": alpha, "beta": beta, "d_q": d}


class RhoEvaluator:
    """Shared certified data for modulus evaluations over one truncation."""

    def __init__(self, pair: ScarPair, params: ModulusParams,
                 analysis: Optional[LambdaAnalysis] = None, depth: int = 24):
        self.pair = pair
        self.params = params
        self.an = analysis if analysis is not None else LambdaAnalysis(pair)
        merges = self.an.merge_free.merge_radii()
        floor = 16 * pair.fs.max_gap
        radii = [Fraction(params.rbar)]
        nc = sorted((m for m in merges if 0 < m < params.rbar), reverse=True)
        for m in nc:
            if m < radii[-1] and m >= floor:
                radii.append(m)
            if len(radii) >= depth:
                break
        while radii[-1] > floor and len(radii) < depth:
            radii.append(radii[-1] / 2)
        self.radii = radii
        self._window_cache: dict = {}
        self._point_cache: dict = {}

    # -- singular-side integral --------------------------------------------

    def _window_profiles(self, lo: Fraction, hi: Fraction):
        key = (lo, hi)
        wp = self._window_cache.get(key)
        if wp is None:
            wp = self.an.window_profiles(lo, hi, self.params.M)
            self._window_cache[key] = wp
        return wp

    def lambda_integral(self, p_uid: int, a: Fraction, b: Fraction) -> float:
        """Certified lower bound of the singular goodness integral for the
        class of unit p over [a, b]; radii below the deepest window add 0."""
        a, b = Fraction(a), Fraction(b)
        if a >= b:
            return 0.0
        total = 0.0
        for i in range(len(self.radii) - 1):
            hi, lo = self.radii[i], self.radii[i + 1]
            u, v = max(a, lo), min(b, hi)
            if u >= v:
                continue
            wp = self._window_profiles(lo, hi)
            try:
                prof = wp.profile_for(p_uid)
            except SchemeError:
                continue
            total += integral_lower_bound(prof, u, v, allow_approximate=True)
        return total

    # -- point-side integral -----------------------------------------------

    def point_profile(self, t: Fraction, lo: Fraction, hi: Fraction) -> GoodnessProfile:
        t = Fraction(t) % self.pair.L
        cached = self._point_cache.get(t)
        if cached is not None:
            (clo, chi, prof) = cached
            if clo <= lo and hi <= chi:
                return prof
            lo, hi = min(lo, clo), max(hi, chi)
        # build with slack below so later, smaller scales reuse the profile
        blo = lo / 4
        units = point_units(self.pair, t)
        an = LambdaAnalysis(self.pair, units)
        wp = an.window_profiles(blo, hi, self.params.M)
        segs = []
        for p in wp.classes:
            if 0 in p.members:
                segs.extend(p.segments)
        segs.sort(key=lambda s: s.lo)
        prof = GoodnessProfile(window=(blo, hi), M=self.params.M,
                               segments=segs, members=frozenset([0]),
                               label=fmt(t))
        if len(self._point_cache) > 4096:
            self._point_cache.clear()
        self._point_cache[t] = (blo, hi, prof)
        return prof

    # -- point geometry ------------------------------------------------------

    def point_geom(self, t: Fraction, h: Fraction) -> PointGeom:
        t = Fraction(t) % self.pair.L
        h = Fraction(h)
        if not (0 <= h <= self.params.delta / 2):
            raise SchemeError("height outside the evaluation collar")
        if self.pair.matches_singular(t):
            d_lo = d_hi = Fraction(0)
        else:
            d_hi = self._locator_dist("free", t)
            d_lo = self._locator_dist("collapse", t)
            if d_lo > d_hi:
                d_lo = d_hi  # collapse bound can only be smaller; guard ties
        p_uid = self._nearest_uid(t)
        return PointGeom(t_param=t, h_q=h, d_lo=d_lo, d_hi=d_hi, p_uid=p_uid)

    def _locator_dist(self, mode: str, t: Fraction) -> Fraction:
        graph = self.an.graph(mode)
        loc = graph.locate(t)
        dist = self.an._fields[mode]
        if loc.node is not None:
            d = dist.get(loc.node)
            if d is None:
                raise SchemeError("singular set unreachable")
            return d
        e = graph.edges[loc.edge]
        best = None
        for (loc2, _uid) in self.an._src[mode]:
            if loc2.edge == loc.edge:
                cand = abs(loc2.offset - loc.offset)
                best = cand if best is None else min(best, cand)
        du, dv = dist.get(e.u), dist.get(e.v)
        for cand in ((du + loc.offset) if du is not None else None,
                     (dv + e.length - loc.offset) if dv is not None else None):
            if cand is not None:
                best = cand if best is None else min(best, cand)
        if best is None:
            raise SchemeError("singular set unreachable")
        return best

    def _nearest_uid(self, t: Fraction) -> Optional[int]:
        graph = self.an.graph("free")
        loc = graph.locate(t)
        if loc.node is not None:
            lab = self._labels_free().get(loc.node)
            return lab
        e = graph.edges[loc.edge]
        best, lab = None, None
        labels = self._labels_free()
        dist = self.an._fields["free"]
        for (loc2, uid) in self.an._src["free"]:
            if loc2.edge == loc.edge:
                cand = abs(loc2.offset - loc.offset)
                if best is None or cand < best:
                    best, lab = cand, uid
        for (nd, extra) in ((e.u, loc.offset), (e.v, e.length - loc.offset)):
            d = dist.get(nd)
            if d is not None and (best is None or d + extra < best):
                best, lab = d + extra, labels.get(nd)
        return lab

    def _labels_free(self):
        if not hasattr(self, "_lab_free"):
            from .scar import dijkstra_labeled
            _, lab = dijkstra_labeled(
                self.an.graph("free"),
                [(l, Fraction(0), uid) for (l, uid) in self.an._src["free"]])
            self._lab_free = lab
        return self._lab_free

    # -- the local modulus ---------------------------------------------------

    def rho(self, geom: PointGeom, t: Fraction) -> float:
        """Local modulus value at scale t, in units of 8R (or absolute when
        the params carry an explicit R).  Upper envelope over the two-sided
        distance bracket when d_q is not pinned exactly."""
        t = Fraction(t)
        if t == 0:
            return 0.0
        cands = {geom.d_lo, geom.d_hi}
        half = self.params.rbar / 2
        if geom.d_lo < half < geom.d_hi:
            cands.add(half)
        return max(self._rho_at(geom, t, d) for d in cands)

    def _rho_at(self, geom: PointGeom, t: Fraction, d_q: Fraction) -> float:
        g = geometry_functions(geom, self.params, t, d_q=d_q)
        xi = g["xi"]
        I1 = 0.0
        if g["lam"] < g["alpha"] / 2 and d_q > 0:
            lo, hi = g["lam"], g["alpha"] / 2
            if lo > 0:
                prof = self.point_profile(geom.t_param, lo, hi)
                I1 = integral_lower_bound(prof, lo, hi, allow_approximate=True)
        I2 = 0.0
        if geom.p_uid is not None and d_q + g["eta"] < g["beta"]:
            I2 = self.lambda_integral(geom.p_uid, d_q + g["eta"], g["beta"])
        return self.params.scale() * float(t) / (float(xi) * math.exp(2 * math.pi * (I1 + I2)))


def rho_point(evaluator: RhoEvaluator, t_param: Fraction, h: Fraction,
              t: Fraction) -> float:
    """Local modulus of continuity at the collar point (t_param, h),
    evaluated at scale t."""
    geom = evaluator.point_geom(t_param, h)
    return evaluator.rho(geom, t)


# ---------------------------------------------------------------------------
# global modulus


@dataclass
class ModulusProfile:
    t_values: list[Fraction]
    rho_hat: list[float]
    rho_bar_log: list[float]          # ln of rho_bar (kappa branch is huge)
    branch: list[str]                 # "grid" | "lipschitz"
    params: ModulusParams
    grid_sizes: list[tuple[int, int]]
    trace: list[float] = field(default_factory=list)
    marker: str = "GRID-APPROXIMATE"

    def rows(self):
        for i, t in enumerate(self.t_values):
            yield (t, self.rho_hat[i], self.rho_bar_log[i], self.branch[i])


def _boundary_samples(pair: ScarPair, per_segment: int) -> list[Fraction]:
    out = set()
    for p in pair.fs.pairings:
        for (lo, hi) in ((p.a_lo, p.a_hi), (p.b_lo, p.b_hi)):
            for k in range(1, per_segment + 1):
                out.add((lo + (hi - lo) * Fraction(k, per_segment + 1)) % pair.L)
    for (lo, hi) in pair.fs.gaps:
        for k in range(1, per_segment + 1):
            out.add((lo + (hi - lo) * Fraction(k, per_segment + 1)) % pair.L)
    return sorted(out)


def rho_global(pair: ScarPair, params: ModulusParams,
               t_values: Optional[Sequence[Fraction]] = None,
               rel_tol: float = 0.01, max_refine: int = 4,
               per_segment: int = 4, heights: int = 4,
               analysis: Optional[LambdaAnalysis] = None) -> ModulusProfile:
    """Grid maximum of the local moduli over the evaluation collar.

    Refines the grid until the table changes by less than rel_tol; the
    result is a lower bound of the true supremum (GRID-APPROXIMATE) and is
    combined with the interior Lipschitz branch kappa*t.
    """
    ev = RhoEvaluator(pair, params, analysis=analysis)
    delta = params.delta
    if t_values is None:
        t_values = [delta / 2 * Fraction(1, 2) ** m for m in range(1, 9)]
    t_values = sorted((Fraction(t) for t in t_values), reverse=True)
    for t in t_values:
        if not (0 < t <= delta / 2):
            raise SchemeError("table scale outside (0, delta/2]")

    trace = []
    grid_sizes = []
    prev = None
    ps, hs = per_segment, heights
    for attempt in range(max_refine + 1):
        t_samples = _boundary_samples(pair, ps)
        h_samples = [Fraction(0)] + [delta / 2 * Fraction(1, 2) ** i for i in range(hs, 0, -1)]
        rho_hat = [0.0] * len(t_values)
        eval_order = sorted(range(len(t_values)), key=lambda i: t_values[i])
        for tp in t_samples:
            for h in h_samples:
                geom = ev.point_geom(tp, h)
                for i in eval_order:
                    v = 2.0 * ev.rho(geom, t_values[i])
                    if v > rho_hat[i]:
                        rho_hat[i] = v
        grid_sizes.append((len(t_samples), len(h_samples)))
        if prev is not None:
            change = max(
                abs(a - b) / b if b > 0 else 0.0 for (a, b) in zip(prev, rho_hat)
            )
            trace.append(change)
            if change < rel_tol:
                prev = rho_hat
                break
            if attempt == max_refine:
                raise SchemeError("refinement budget exhausted before rel_tol met")
        prev = rho_hat
        ps = 2 * ps + 1  # keeps sample offsets nested across refinements
        hs += 1

    rho_bar_log = []
    branch = []
    for i, t in enumerate(t_values):
        grid_log = math.log(prev[i]) if prev[i] > 0 else -math.inf
        lip_log = params.kappa_log + math.log(float(t))
        if lip_log >= grid_log:
            rho_bar_log.append(lip_log)
            branch.append("lipschitz")
        else:
            rho_bar_log.append(grid_log)
            branch.append("grid")
    return ModulusProfile(
        t_values=list(t_values), rho_hat=list(prev), rho_bar_log=rho_bar_log,
        branch=branch, params=params, grid_sizes=grid_sizes, trace=trace,
    )
