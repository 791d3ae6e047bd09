"""Command-line front end: genus, class tables, counts, verification suites."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

from .core import (
    DEFAULT_MAX_ELEMENTS,
    FeasibilityError,
    PreconditionError,
    decoder,
    format_mat,
    make_ctx,
    minus_one,
    num_to_json,
)
from .groups import (
    ConjClassRef,
    class_codes,
    conj_class_size_formula,
    enumerate_group,
    partition_into_classes,
    u_power_ref,
)
from .subgroups import parse_subgroup_spec
from .genus import count_in_subgroup, genus_report
from .bounds import (
    BOUND_KINDS,
    bound_sequence,
    section7_all,
    section7_case_ids,
    verify_main_theorem_desk,
    verify_section7,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2


def _parse_class(text: str, ctx) -> ConjClassRef:
    if text == "sigma":
        return ConjClassRef(ctx, "sigma")
    if text == "tau":
        return ConjClassRef(ctx, "tau")
    if text.startswith("u^p^"):
        return u_power_ref(ctx, int(text[4:]))
    if text == "u":
        return u_power_ref(ctx, 0)
    raise ValueError("unknown class %r (use sigma, tau, u, u^p^r)" % text)


def _emit(args, payload: dict, text_lines: List[str]) -> None:
    if args.output == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _cmd_genus(args) -> int:
    ctx = make_ctx(args.p, args.n)
    h = parse_subgroup_spec(args.subgroup, args.p, args.n, seed=args.seed, cap=args.max_elements)
    rep = genus_report(h)
    payload = rep.to_json_dict()
    payload["subgroup"] = args.subgroup
    payload["order"] = num_to_json(h.order)
    lines = [
        "subgroup %s in SL2(Z/%d^%dZ): order %d, index %d" % (args.subgroup, args.p, args.n, h.order, rep.index),
        "  #H n Conj(sigma) = %d, #H n Conj(tau) = %d" % (rep.count_sigma, rep.count_tau),
        "  fix_sigma = %d, fix_tau = %d, cusp ratio = %s" % (rep.fix_sigma, rep.fix_tau, rep.cusp_ratio),
        "  delta = %s" % (rep.delta,),
    ]
    if rep.genus is None:
        lines.append("  genus: undefined (-1 not in H); delta reported above")
    else:
        lines.append("  genus = %d" % rep.genus)
    _emit(args, payload, lines)
    return EXIT_OK


def _cmd_class_table(args) -> int:
    from .core import identity, mat_pow, neg, sigma, tau, upper_u

    ctx = make_ctx(args.p, args.n)
    g = enumerate_group(ctx, args.max_elements)
    classes = partition_into_classes(g)
    named = {}
    named[identity(ctx)] = "1"
    named[minus_one(ctx)] = "-1"
    named[sigma(ctx)] = "sigma"
    named[neg(sigma(ctx), ctx)] = "-sigma"
    named[tau(ctx)] = "tau"
    named[neg(tau(ctx), ctx)] = "-tau"
    for r in range(ctx.n):
        u_r = mat_pow(upper_u(ctx), ctx.p**r, ctx)
        uname = "u" if r == 0 else "u^%d" % ctx.p**r
        named.setdefault(u_r, uname)
        named.setdefault(neg(u_r, ctx), "-" + uname)
    u2 = mat_pow(upper_u(ctx), 2, ctx)
    named.setdefault(u2, "u^2")
    named.setdefault(neg(u2, ctx), "-u^2")
    dec = decoder(ctx)
    rows = []
    for cls in classes:
        rep_code = min(cls.codes)
        label = ""
        for m, name in named.items():
            if m in cls:
                label = name
                break
        rows.append((label, format_mat(dec(rep_code)), len(cls)))
    rows.sort(key=lambda r: (-r[2], r[0], r[1]))
    payload = {
        "p": num_to_json(args.p),
        "n": num_to_json(args.n),
        "group_order": num_to_json(ctx.order),
        "classes": [{"label": a, "representative": b, "size": num_to_json(c)} for a, b, c in rows],
    }
    lines = ["SL2(Z/%d^%dZ): %d elements, %d conjugacy classes" % (args.p, args.n, ctx.order, len(rows))]
    for label, rep, size in rows:
        lines.append("  %-8s rep %-16s size %d" % (label or "-", rep, size))
    _emit(args, payload, lines)
    return EXIT_OK


def _cmd_count(args) -> int:
    ctx = make_ctx(args.p, args.n)
    h = parse_subgroup_spec(args.subgroup, args.p, args.n, seed=args.seed, cap=args.max_elements)
    ref = _parse_class(args.cls, ctx)
    cls = class_codes(ref, cap=args.max_elements)
    cnt = count_in_subgroup(h, ref)
    payload = {
        "subgroup": args.subgroup,
        "class": args.cls,
        "count": num_to_json(cnt),
        "class_size": num_to_json(len(cls)),
        "subgroup_order": num_to_json(h.order),
    }
    _emit(args, payload, ["#(H n Conj(%s)) = %d (class size %d, #H = %d)" % (args.cls, cnt, len(cls), h.order)])
    return EXIT_OK


def _cmd_bounds(args) -> int:
    v = bound_sequence(args.kind, args.p, args.n)
    payload = {"kind": args.kind, "p": num_to_json(args.p), "n": num_to_json(args.n), "value": num_to_json(v)}
    _emit(args, payload, ["%s(p=%d, n=%d) = %d" % (args.kind, args.p, args.n, v)])
    return EXIT_OK


def _run_pool(jobs: List[Callable[[], object]], threads: int) -> List[object]:
    if threads <= 1 or len(jobs) <= 1:
        return [j() for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futs = [pool.submit(j) for j in jobs]
        return [f.result() for f in futs]


def _cmd_verify(args) -> int:
    from . import suites

    t0 = time.monotonic()
    if args.suite == "section7":
        if args.case:
            reports = [verify_section7(args.case)]
        else:
            ids = section7_case_ids()
            reports = _run_pool([lambda cid=c: verify_section7(cid) for c in ids], args.threads)
            reports.sort(key=lambda r: r.case_id)
        ok = all(r.verdict in ("match", "positive_but_differs") for r in reports)
        payload = {"suite": "section7", "ok": ok, "cases": [r.to_json_dict() for r in reports]}
        lines = []
        for r in reports:
            lines.append(
                "%-10s %-22s printed %s recomputed %s%s"
                % (
                    r.case_id,
                    r.verdict,
                    r.printed_value,
                    r.recomputed_value,
                    ("  [%s]" % r.notes) if r.verdict != "match" else "",
                )
            )
        lines.append("section7: %s" % ("PASS" if ok else "FAIL"))
        _emit(args, payload, lines)
        return EXIT_OK if ok else EXIT_VERIFY_FAIL
    if args.suite == "main-theorem-desk":
        parts = [int(args.case)] if args.case else [1, 2, 3, 5, 6, 7]
        results = []
        for part in parts:
            results.extend(verify_main_theorem_desk(part, seed=args.seed))
        ok = all(r.status != "fail" for r in results)
        payload = {"suite": "main-theorem-desk", "ok": ok, "cases": [r.to_json_dict() for r in results]}
        lines = [
            "part %d %-28s %-8s checked %-5d min delta %s  %s"
            % (r.part, r.label, r.status, r.checked, r.min_delta, r.notes)
            for r in results
        ]
        lines.append("main-theorem-desk: %s" % ("PASS" if ok else "FAIL"))
        _emit(args, payload, lines)
        return EXIT_OK if ok else EXIT_VERIFY_FAIL
    runner = suites.SUITES.get(args.suite)
    if runner is None and args.suite != "all":
        print("unknown suite %r; available: %s" % (args.suite, ", ".join(suites.suite_names())), file=sys.stderr)
        return EXIT_USAGE
    names = suites.suite_names() if args.suite == "all" else [args.suite]
    results = []
    for name in names:
        if name in ("section7", "main-theorem-desk"):
            sub = argparse.Namespace(**vars(args))
            sub.suite = name
            sub.case = None
            code = _cmd_verify_quiet(sub)
            results.append((name, code == EXIT_OK, ""))
        else:
            okay, detail = suites.SUITES[name](seed=args.seed, cap=args.max_elements)
            results.append((name, okay, detail))
    ok = all(r[1] for r in results)
    payload = {
        "suite": args.suite,
        "ok": ok,
        "results": [{"name": n, "ok": o, "detail": d} for n, o, d in results],
        "seed": num_to_json(args.seed),
    }
    lines = ["%-20s %s%s" % (n, "pass" if o else "FAIL", (" (%s)" % d) if d else "") for n, o, d in results]
    lines.append("%s: %s (%.1fs)" % (args.suite, "PASS" if ok else "FAIL", time.monotonic() - t0))
    _emit(args, payload, lines)
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def _cmd_verify_quiet(args) -> int:
    import io
    from contextlib import redirect_stdout

    buf = io.StringIO()
    with redirect_stdout(buf):
        code = _cmd_verify(args)
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sl2genus",
        description="Genus and slim-subgroup bound computations for subgroups of SL2(Z/p^nZ).",
    )
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(sp, needs_pn=True):
        if needs_pn:
            sp.add_argument("--p", type=int, required=True, help="prime p")
            sp.add_argument("--n", type=int, default=1, help="level exponent n >= 1")
        sp.add_argument("--output", choices=("text", "json"), default="text")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument(
            "--max-elements",
            type=int,
            default=int(os.environ.get("SL2_MAX_ELEMENTS", DEFAULT_MAX_ELEMENTS)),
            help="materialization cap (env SL2_MAX_ELEMENTS)",
        )
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("genus", help="genus report for a subgroup")
    common(sp)
    sp.add_argument("--subgroup", required=True, help="B|C|D|E:A4|F|A1|full|gens:...|preimage:S@m")
    sp.set_defaults(func=_cmd_genus)

    sp = sub.add_parser("class-table", help="conjugacy classes of SL2(Z/p^nZ)")
    common(sp)
    sp.set_defaults(func=_cmd_class_table)

    sp = sub.add_parser("count", help="#(H n Conj(alpha))")
    common(sp)
    sp.add_argument("--subgroup", required=True)
    sp.add_argument("--class", dest="cls", required=True, help="sigma|tau|u|u^p^r")
    sp.set_defaults(func=_cmd_count)

    sp = sub.add_parser("bounds", help="closed-form bound sequences")
    common(sp)
    sp.add_argument("--kind", choices=BOUND_KINDS, required=True)
    sp.set_defaults(func=_cmd_bounds)

    sp = sub.add_parser("verify", help="verification suites")
    common(sp, needs_pn=False)
    sp.add_argument("--suite", required=True, help="suite name or 'all'")
    sp.add_argument("--case", help="single case id (section7) or part number (main-theorem-desk)")
    sp.set_defaults(func=_cmd_verify)
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (FeasibilityError, PreconditionError, ValueError, KeyError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
