"""Command line front end.

Every computation goes through the library; the CLI only parses flags,
chooses truncations, and formats reports.  Exit status: 0 success,
2 for a computed-but-INCONCLUSIVE certificate, 1 for errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .rationals import fmt, rat
from .scheme import SchemeError, builtin_example, is_plain, truncate, validate
from .pfs import PfsError, parse_scheme, serialize_scheme
from .scar import ScarPair, classify_point, euler_check, lambda_units
from .criterion import (
    INCONCLUSIVE,
    default_params,
    divergence_report,
    mcmullen_system,
)
from .collar import build_collar, disk_boundary
from .modulus import modulus_params, rho_global
from . import reports, render


def _load_scheme(args):
    if args.builtin:
        return builtin_example(args.builtin)
    if args.input:
        with open(args.input, "r", encoding="utf-8") as fh:
            return parse_scheme(fh.read())
    raise SchemeError("need --builtin or an input file")


def _emit(args, text: str, machine: dict):
    if args.format == "machine":
        sys.stdout.write(reports.emit_block(machine))
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    scheme = _load_scheme(args)
    rep = validate(scheme)
    plain = is_plain(scheme)
    text = reports.validation_text(rep)
    text += f"plainness: {'PLAIN' if plain.plain else 'NOT_PLAIN (' + plain.reason + ')'}\n"
    machine = reports.validation_dict(rep)
    machine["plain"] = "true" if plain.plain else "false"
    if not plain.plain:
        machine["plain.reason"] = plain.reason
    _emit(args, text, machine)
    return 0 if rep.ok else 1


def cmd_classify(args) -> int:
    scheme = _load_scheme(args)
    fs = truncate(scheme, args.eps) if scheme.rules else truncate(scheme, Fraction(1))
    pair = ScarPair(fs)
    machine = {"report": "classify", "eps": fmt(fs.tail_measure)}
    lines = [f"classification at truncation tail {fmt(fs.tail_measure)} "
             f"(chi = {euler_check(fs)})"]
    params = [rat(p) for p in args.param] if args.param else []
    if not params:
        params = sorted({u.rep_param for u in lambda_units(pair)})[:8]
    for i, t in enumerate(params):
        pc = classify_point(pair, t)
        val = pc.kind + (f"({pc.valence})" if pc.valence is not None else "")
        lines.append(f"  t={fmt(t)}: {val}" + (f" [{pc.detail}]" if pc.detail else ""))
        machine[f"point.{i}.t"] = fmt(t)
        machine[f"point.{i}.class"] = val
    if args.ball is not None:
        from .scar import component_certified
        units = lambda_units(pair)
        for i, t in enumerate(params):
            if not pair.matches_singular(t):
                continue
            info = component_certified(pair, units, t, args.ball)
            cn = info.frontier_count if info.frontier_count is not None else "unknown"
            lines.append(f"  ball q={fmt(t)} r={fmt(args.ball)}: cm={fmt(info.measure)} "
                         f"cn={cn} exact={str(info.exact).lower()}")
            for k, v in reports.component_dict(info).items():
                machine[f"ball.{i}.{k}"] = v
    _emit(args, "\n".join(lines) + "\n", machine)
    return 0


def cmd_criterion(args) -> int:
    scheme = _load_scheme(args)
    cert = divergence_report(scheme, K=args.K, hypothesis=args.hypothesis,
                             rbar=args.rbar, hbar=args.hbar)
    _emit(args, reports.divergence_text(cert), reports.divergence_dict(cert))
    return 2 if cert.verdict == INCONCLUSIVE else 0


def cmd_mcmullen(args) -> int:
    scheme = _load_scheme(args)
    system = mcmullen_system(scheme, args.K0, args.K1, rbar=args.rbar, hbar=args.hbar)
    _emit(args, reports.mcmullen_text(system), reports.mcmullen_dict(system))
    if args.out:
        spec = build_collar(scheme.multipolygon, args.hbar or scheme.meta.hbar)
        from .scheme import truncate_max_gap
        fs = truncate_max_gap(scheme, system.levels[-1].r_lo / 16)
        pair = ScarPair(fs)
        units = lambda_units(pair)
        rbar = args.rbar or default_params(pair).rbar
        disks = []
        for lev in system.levels[: min(3, len(system.levels))]:
            for c in lev.classes:
                rep = sorted(c.members)[0]
                rep_param = units[rep].rep_param if rep < len(units) else None
                if rep_param is None:
                    continue
                for r in (c.inner, c.outer):
                    disks.append(disk_boundary(pair, spec, units, rep_param, r, rbar))
        render.write_svg(render.disk_scene(spec, disks), args.out)
    return 0 if system.all_conditions else 2


def cmd_modulus(args) -> int:
    scheme = _load_scheme(args)
    fs = truncate(scheme, args.eps)
    pair = ScarPair(fs)
    cp = default_params(pair, rbar=args.rbar, hbar=args.hbar)
    params = modulus_params(scheme.boundary_length, cp.rbar, cp.hbar, R=args.R)
    if args.format == "text":
        from .rationals import dec, fmt as _fmt
        sys.stdout.write(
            f"parameters: rbar={_fmt(params.rbar)} hbar={_fmt(params.hbar)} "
            f"delta={_fmt(params.delta)} M={_fmt(params.M)} "
            f"ln(kappa)={dec(params.kappa_log)} R_mode={params.R_mode}\n")
        sys.stdout.flush()
    profile = rho_global(pair, params, rel_tol=args.rel_tol,
                         per_segment=args.per_segment)
    _emit(args, reports.modulus_text(profile), reports.modulus_dict(profile))
    return 0


def cmd_render(args) -> int:
    scheme = _load_scheme(args)
    fs = truncate(scheme, args.eps) if scheme.rules else truncate(scheme, Fraction(1))
    if args.layer == "scheme":
        scene = render.scheme_scene(fs)
    elif args.layer == "scar":
        scene = render.scar_scene(ScarPair(fs).free)
    elif args.layer == "collar":
        scene = render.collar_scene(build_collar(scheme.multipolygon, scheme.meta.hbar))
    else:
        raise SchemeError(f"unknown layer {args.layer!r}")
    out = args.out or "out.svg"
    render.write_svg(scene, out)
    sys.stdout.write(f"wrote {out}\n")
    return 0


def cmd_example(args) -> int:
    scheme = builtin_example(args.name)
    text = serialize_scheme(scheme)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="paperfold",
        description="Exact computation on polygon boundary self-gluing schemes.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", nargs="?", help="PFS v1 scheme file")
            p.add_argument("--builtin", help="built-in scheme name (seq, cantor, pillow)")
        p.add_argument("--eps", type=rat, default=Fraction(1, 256),
                       help="truncation tail bound (default 1/256)")
        p.add_argument("--rbar", type=rat, default=None)
        p.add_argument("--hbar", type=rat, default=None)
        p.add_argument("--format", choices=("text", "machine"), default="text")
        p.add_argument("--out", default=None)
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("validate", help="run all structural checks")
    common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("classify", help="classify scar points")
    common(p)
    p.add_argument("--param", action="append", help="boundary parameter (repeatable)")
    p.add_argument("--ball", type=rat, default=None,
                   help="also report singular component data at this radius")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("criterion", help="divergence certificate")
    common(p)
    p.add_argument("--K", type=int, default=6, help="number of verified windows")
    p.add_argument("--hypothesis", choices=("constant", "harmonic", "none"),
                   default="constant")
    p.set_defaults(fn=cmd_criterion)

    p = sub.add_parser("mcmullen", help="nested annulus system")
    common(p)
    p.add_argument("--K0", type=int, default=0)
    p.add_argument("--K1", type=int, default=4)
    p.set_defaults(fn=cmd_mcmullen)

    p = sub.add_parser("modulus", help="modulus of continuity table")
    common(p)
    p.add_argument("--R", type=float, default=None,
                   help="explicit scale constant (default: units of 8R)")
    p.add_argument("--rel-tol", type=float, default=0.05)
    p.add_argument("--per-segment", type=int, default=2)
    p.set_defaults(fn=cmd_modulus, eps=Fraction(1, 32))

    p = sub.add_parser("render", help="SVG figures")
    common(p)
    p.add_argument("--layer", choices=("scheme", "scar", "collar"), default="scheme")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("example", help="emit a built-in scheme as PFS text")
    p.add_argument("name", help="seq, cantor, or pillow")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_example)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (SchemeError, PfsError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
