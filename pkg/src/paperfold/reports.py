"""Machine-readable key=value report blocks and their text rendering.

Machine blocks are flat, ordered key=value lines (12 significant digit
decimals, exact rationals as p/q sidecars).  parse_block(emit_block(d)) == d.
"""

from __future__ import annotations

from .rationals import dec, fmt


def emit_block(d: dict[str, str]) -> str:
    lines = []
    for k, v in d.items():
        if "=" in k or "\n" in k or "\n" in str(v):
            raise ValueError(f"bad report key/value {k!r}")
        lines.append(f"{k}={v}")
    return "\n".join(lines) + "\n"


def parse_block(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad report line {line!r}")
        k, v = line.split("=", 1)
        out[k] = v
    return out


def divergence_dict(cert) -> dict[str, str]:
    d: dict[str, str] = {
        "report": "divergence",
        "scheme": cert.scheme_name or "-",
        "hypothesis": cert.hypothesis,
        "rbar": fmt(cert.rbar),
        "M": fmt(cert.M),
        "K": str(len(cert.windows)),
    }
    for w in cert.windows:
        d[f"window.{w.k}.a"] = fmt(w.lo)
        d[f"window.{w.k}.b"] = fmt(w.hi)
        d[f"window.{w.k}.W"] = dec(w.value)
        d[f"window.{w.k}.certified"] = "true" if w.certified else "false"
        d[f"window.{w.k}.classes"] = str(w.n_classes)
    d["c"] = dec(cert.c) if cert.c is not None else "-"
    d["verdict"] = cert.verdict
    if cert.notes:
        d["notes"] = "; ".join(cert.notes)
    return d


def divergence_text(cert) -> str:
    lines = [f"divergence certificate for {cert.scheme_name or 'scheme'}",
             f"  rbar={fmt(cert.rbar)}  M={fmt(cert.M)}  hypothesis={cert.hypothesis}"]
    for w in cert.windows:
        lines.append(
            f"  window k={w.k} [a,b]=[{fmt(w.lo)},{fmt(w.hi)}] "
            f"W_k={dec(w.value)} (lower bound) certified={str(w.certified).lower()} "
            f"classes={w.n_classes}"
        )
    lines.append(f"  c={dec(cert.c) if cert.c is not None else '-'}")
    lines.append(f"  verdict: {cert.verdict}")
    for n in cert.notes:
        lines.append(f"  note: {n}")
    return "\n".join(lines) + "\n"


def validation_dict(rep) -> dict[str, str]:
    d: dict[str, str] = {"report": "validation", "ok": "true" if rep.ok else "false"}
    for i, (check, ok, detail) in enumerate(rep.entries):
        d[f"check.{i}.name"] = check
        d[f"check.{i}.ok"] = "true" if ok else "false"
        if detail:
            d[f"check.{i}.detail"] = detail
    return d


def validation_text(rep) -> str:
    lines = []
    for (check, ok, detail) in rep.entries:
        mark = "ok " if ok else "FAIL"
        lines.append(f"  [{mark}] {check}" + (f": {detail}" if detail else ""))
    lines.append("all checks passed" if rep.ok else "validation FAILED")
    return "\n".join(lines) + "\n"


def component_dict(info) -> dict[str, str]:
    d = {
        "report": "component",
        "r": fmt(info.r),
        "mode": info.mode,
        "cm": fmt(info.measure),
        "cn": str(info.frontier_count) if info.frontier_count is not None else "unknown",
        "exact": "true" if info.exact else "false",
    }
    for i, (_loc, params) in enumerate(info.frontier):
        d[f"cc.{i}"] = ",".join(fmt(p) for p in params)
    if info.flags:
        d["flags"] = ",".join(sorted(info.flags))
    return d


def mcmullen_dict(system) -> dict[str, str]:
    d: dict[str, str] = {"report": "mcmullen"}
    for lev in system.levels:
        key = f"level.{lev.k}"
        d[f"{key}.a"] = fmt(lev.r_lo)
        d[f"{key}.b"] = fmt(lev.r_hi)
        d[f"{key}.classes"] = str(len(lev.classes))
        d[f"{key}.eps_cap"] = fmt(lev.eps_cap)
        for i, c in enumerate(lev.classes):
            d[f"{key}.class.{i}.eps"] = fmt(c.eps)
            d[f"{key}.class.{i}.inner"] = fmt(c.inner)
            d[f"{key}.class.{i}.outer"] = fmt(c.outer)
            d[f"{key}.class.{i}.module"] = dec(c.module_bound)
    d["cond.unnested"] = str(system.cond_unnested).lower()
    d["cond.nested"] = str(system.cond_nested_chain).lower()
    d["cond.sum"] = str(system.cond_sum).lower()
    return d


def mcmullen_text(system) -> str:
    lines = ["nested annulus system"]
    for lev in system.levels:
        lines.append(f"  level k={lev.k} window=[{fmt(lev.r_lo)},{fmt(lev.r_hi)}] "
                     f"classes={len(lev.classes)} eps_cap={fmt(lev.eps_cap)}")
        for c in lev.classes:
            lines.append(f"    class[{c.label}] eps={fmt(c.eps)} "
                         f"annulus=[{fmt(c.inner)},{fmt(c.outer)}] module>={dec(c.module_bound)}")
    lines.append(f"  conditions: unnested={str(system.cond_unnested).lower()} "
                 f"nested={str(system.cond_nested_chain).lower()} "
                 f"sum={str(system.cond_sum).lower()}")
    return "\n".join(lines) + "\n"


def modulus_dict(profile) -> dict[str, str]:
    p = profile.params
    d = {
        "report": "modulus",
        "marker": profile.marker,
        "rbar": fmt(p.rbar),
        "hbar": fmt(p.hbar),
        "delta": fmt(p.delta),
        "M": fmt(p.M),
        "kappa_log": dec(p.kappa_log),
        "R_mode": p.R_mode,
    }
    for i, (t, rh, rb_log, br) in enumerate(profile.rows()):
        d[f"row.{i}.t"] = fmt(t)
        d[f"row.{i}.rho_hat"] = dec(rh)
        d[f"row.{i}.rho_bar_log"] = dec(rb_log)
        d[f"row.{i}.branch"] = br
    return d


def modulus_text(profile) -> str:
    p = profile.params
    lines = [
        "modulus of continuity table "
        f"({'units of 8R' if p.R_mode == 'normalized' else 'absolute'}; {profile.marker})",
        f"  rbar={fmt(p.rbar)} hbar={fmt(p.hbar)} delta={fmt(p.delta)} "
        f"M={fmt(p.M)} ln(kappa)={dec(p.kappa_log)}",
        "  t            rho_hat(t)      ln(rho_bar(t))  branch",
    ]
    for (t, rh, rb_log, br) in profile.rows():
        lines.append(f"  {fmt(t):<12} {dec(rh):<15} {dec(rb_log):<15} {br}")
    lines.append("  rho_hat is a grid lower bound of the true envelope; "
                 "its use as a modulus is conditional on grid density")
    return "\n".join(lines) + "\n"
