"""PFS v1 scheme files: UTF-8, line oriented, exact rationals.

Grammar (one record per line, ``#`` starts a comment):

    meta name=<str> [rbar=<rat>] [hbar=<rat>]
    polygon <id> <x1> <y1> <x2> <y2> ...
    pair <p> <a_lo> <a_hi> <b_lo> <b_hi>
    rule <id> <src_lo> <src_hi> <dst_lo> <dst_hi> <sigma>
    singular <param>
    singular cantor <lo> <hi> <ratio>

Rationals are ``p/q`` or plain integers.  Several ``rule`` lines may share
an id: they are the pieces of one rule (a pairing is replicated when each of
its segments fits in some piece).  The serializer emits a canonical field
and line order, so serialize(parse(text)) is a fixed point.
"""

from __future__ import annotations

from fractions import Fraction

from .rationals import fmt, rat
from .scheme import (
    CantorSpec,
    FoldingScheme,
    Meta,
    Multipolygon,
    Pairing,
    Polygon,
    Rule,
    RulePiece,
    SchemeError,
    SingularSpec,
)


class PfsError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def _rat(tok: str, line: int) -> Fraction:
    try:
        return rat(tok)
    except ValueError as exc:
        raise PfsError(str(exc), line) from exc


def parse_scheme(text: str) -> FoldingScheme:
    polygons: dict[int, Polygon] = {}
    pairings: list[Pairing] = []
    rule_pieces: dict[str, list[RulePiece]] = {}
    rule_order: list[str] = []
    sing_params: list[Fraction] = []
    cantor: list[CantorSpec] = []
    meta = Meta()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kind = toks[0]
        try:
            if kind == "meta":
                fields = {}
                for tok in toks[1:]:
                    if "=" not in tok:
                        raise PfsError(f"bad meta field {tok!r}", lineno)
                    k, v = tok.split("=", 1)
                    fields[k] = v
                meta = Meta(
                    name=fields.get("name", ""),
                    rbar=_rat(fields["rbar"], lineno) if "rbar" in fields else None,
                    hbar=_rat(fields["hbar"], lineno) if "hbar" in fields else None,
                )
            elif kind == "polygon":
                if len(toks) < 8 or len(toks) % 2 != 0:
                    raise PfsError("polygon needs an id and at least 3 coordinate pairs", lineno)
                pid = int(toks[1])
                coords = [_rat(t, lineno) for t in toks[2:]]
                pts = tuple(zip(coords[0::2], coords[1::2]))
                if pid in polygons:
                    raise PfsError(f"duplicate polygon id {pid}", lineno)
                polygons[pid] = Polygon(pts)
            elif kind == "pair":
                if len(toks) != 6:
                    raise PfsError("pair needs: p a_lo a_hi b_lo b_hi", lineno)
                p = int(toks[1])
                vals = [_rat(t, lineno) for t in toks[2:]]
                pairings.append(Pairing(vals[0], vals[1], vals[2], vals[3], poly=p))
            elif kind == "rule":
                if len(toks) != 7:
                    raise PfsError("rule needs: id src_lo src_hi dst_lo dst_hi sigma", lineno)
                rid = toks[1]
                vals = [_rat(t, lineno) for t in toks[2:]]
                piece = RulePiece(vals[0], vals[1], vals[2], vals[3])
                if piece.sigma != vals[4]:
                    raise PfsError(
                        f"rule {rid}: sigma {fmt(vals[4])} does not match intervals "
                        f"(actual {fmt(piece.sigma)})", lineno)
                if rid not in rule_pieces:
                    rule_pieces[rid] = []
                    rule_order.append(rid)
                rule_pieces[rid].append(piece)
            elif kind == "singular":
                if len(toks) >= 2 and toks[1] == "cantor":
                    if len(toks) != 5:
                        raise PfsError("singular cantor needs: lo hi ratio", lineno)
                    cantor.append(CantorSpec(_rat(toks[2], lineno), _rat(toks[3], lineno), _rat(toks[4], lineno)))
                elif len(toks) == 2:
                    sing_params.append(_rat(toks[1], lineno))
                else:
                    raise PfsError("singular needs one parameter", lineno)
            else:
                raise PfsError(f"unknown record {kind!r}", lineno)
        except SchemeError as exc:
            raise PfsError(str(exc), lineno) from exc

    if not polygons:
        raise PfsError("no polygon records")
    ordered = tuple(polygons[k] for k in sorted(polygons))
    rules = tuple(Rule(rid, tuple(rule_pieces[rid])) for rid in rule_order)
    try:
        scheme = FoldingScheme(
            multipolygon=Multipolygon(ordered),
            pairings=tuple(sorted(pairings, key=Pairing.key)),
            rules=rules,
            singular=SingularSpec(tuple(sorted(set(sing_params))), tuple(cantor)),
            meta=meta,
        )
    except SchemeError as exc:
        raise PfsError(str(exc)) from exc
    for p in scheme.pairings:
        if p.poly >= len(ordered):
            raise PfsError(f"pair references missing polygon {p.poly}")
        L = ordered[p.poly].perimeter
        if p.b_hi > L:
            raise PfsError(f"pair {fmt(p.a_lo)}..{fmt(p.b_hi)} exceeds perimeter {fmt(L)}")
    return scheme


def serialize_scheme(scheme: FoldingScheme) -> str:
    out = []
    m = scheme.meta
    fields = []
    if m.name:
        fields.append(f"name={m.name}")
    if m.rbar is not None:
        fields.append(f"rbar={fmt(m.rbar)}")
    if m.hbar is not None:
        fields.append(f"hbar={fmt(m.hbar)}")
    if fields:
        out.append("meta " + " ".join(fields))
    for i, poly in enumerate(scheme.multipolygon.polygons):
        coords = " ".join(f"{fmt(x)} {fmt(y)}" for (x, y) in poly.vertices)
        out.append(f"polygon {i} {coords}")
    for p in sorted(scheme.pairings, key=Pairing.key):
        out.append(f"pair {p.poly} {fmt(p.a_lo)} {fmt(p.a_hi)} {fmt(p.b_lo)} {fmt(p.b_hi)}")
    for r in sorted(scheme.rules, key=lambda r: r.name):
        for piece in sorted(r.pieces, key=lambda pc: pc.src_lo):
            out.append(
                f"rule {r.name} {fmt(piece.src_lo)} {fmt(piece.src_hi)} "
                f"{fmt(piece.dst_lo)} {fmt(piece.dst_hi)} {fmt(piece.sigma)}"
            )
    for x in sorted(scheme.singular.params):
        out.append(f"singular {fmt(x)}")
    for c in sorted(scheme.singular.cantor, key=lambda c: (c.lo, c.hi)):
        out.append(f"singular cantor {fmt(c.lo)} {fmt(c.hi)} {fmt(c.ratio)}")
    return "\n".join(out) + "\n"
