"""Genus of the modular curve attached to a subgroup of SL2(Z/p^nZ).

Everything is exact rational arithmetic.  The three ingredient counts
(elliptic points of order 2 and 3, cusps) are each computed two independent
ways -- directly on the coset space and through the class-counting identity
-- and any disagreement raises ConsistencyError.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from .core import (
    ConsistencyError,
    GroupCtx,
    Mat,
    PreconditionError,
    _mul,
    decoder,
    encoder,
    identity,
    make_ctx,
    minus_one,
    num_to_json,
    sigma as sigma_mat,
    tau as tau_mat,
    upper_u,
)
from .groups import ConjClassRef, class_codes, conj_class_brute, u_power_ref
from .subgroups import Subgroup

# Above this group order the coset-space cross-check is skipped and only the
# class-counting route is used (it is an exact identity, not an estimate).
DIRECT_CHECK_CAP = 130_000


def count_in_subgroup(h: Subgroup, ref: ConjClassRef) -> int:
    """#(H n Conj(alpha)), intersecting the materialized sets."""
    if ref.ctx != h.ctx:
        raise PreconditionError("class reference bound to a different context")
    cls = class_codes(ref)
    hc = h.codes()
    small, big = (hc, cls) if len(hc) <= len(cls) else (cls, hc)
    return sum(1 for c in small if c in big)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) by Euler's criterion."""
    if p == 2 or not p % 2:
        raise ValueError("Legendre symbol needs an odd prime, got %d" % p)
    t = pow(a % p, (p - 1) // 2, p)
    if t == 0:
        return 0
    return 1 if t == 1 else -1


# -------------------- coset machinery --------------------


def coset_space(h: Subgroup) -> Tuple[List[Mat], Dict]:
    """Left cosets gH of the full group; returns (reps, code -> coset index)."""
    from .groups import enumerate_group

    ctx = h.ctx
    g_all = enumerate_group(ctx)
    dec = decoder(ctx)
    enc = encoder(ctx)
    m = ctx.modulus
    hmats = [dec(c) for c in h.codes()]
    coset_of: Dict = {}
    reps: List[Mat] = []
    for c in sorted(g_all.codes):
        if c in coset_of:
            continue
        g = dec(c)
        i = len(reps)
        reps.append(g)
        for hm in hmats:
            coset_of[enc(_mul(g, hm, m))] = i
    return reps, coset_of


def _fix_direct(h: Subgroup, a: Mat, reps: List[Mat], coset_of: Dict) -> int:
    enc = encoder(h.ctx)
    m = h.ctx.modulus
    return sum(1 for i, g in enumerate(reps) if coset_of[enc(_mul(a, g, m))] == i)


def _class_of(ctx: GroupCtx, a: Mat) -> FrozenSet:
    if a == sigma_mat(ctx):
        return class_codes(ConjClassRef(ctx, "sigma"))
    if a == tau_mat(ctx):
        return class_codes(ConjClassRef(ctx, "tau"))
    m = ctx.modulus
    for r in range(ctx.n):
        q = ctx.p**r
        if a == (1, q % m, 0, 1):  # u^(p^r)
            return class_codes(u_power_ref(ctx, r))
    return conj_class_brute(a, ctx).codes


def fix_points(h: Subgroup, a: Mat) -> int:
    """#{gH : a gH = gH}, computed on cosets and through
    #Fix_a / [G:H] = #(H n Conj(a)) / #Conj(a); the two must agree."""
    ctx = h.ctx
    cls = _class_of(ctx, a)
    inter = len(h.codes() & cls)
    index = ctx.order // h.order
    via_identity = Fraction(index * inter, len(cls))
    if via_identity.denominator != 1:
        raise ConsistencyError("fixed-point identity gave a non-integer")
    if ctx.order <= DIRECT_CHECK_CAP:
        reps, coset_of = coset_space(h)
        direct = _fix_direct(h, a, reps, coset_of)
        if direct != via_identity:
            raise ConsistencyError(
                "fixed-point count mismatch: direct %d vs identity %s" % (direct, via_identity)
            )
    return int(via_identity)


def cusp_orbit_ratio(h: Subgroup, _precomputed: Optional[Tuple[List[Mat], Dict]] = None) -> Fraction:
    """#(<u>\\G/H) / [G:H], via the u^(p^s) class counts; cross-checked by a
    direct orbit count of <u> acting on G/H when the group is small enough."""
    ctx = h.ctx
    p, n = ctx.p, ctx.n
    hcodes = h.codes()
    ratio = Fraction(1, p**n)
    for s in range(n):
        cls = class_codes(u_power_ref(ctx, s))
        ratio += Fraction(p - 1, p ** (s + 1)) * Fraction(len(hcodes & cls), len(cls))
    if ctx.order <= DIRECT_CHECK_CAP:
        reps, coset_of = _precomputed or coset_space(h)
        enc = encoder(ctx)
        m = ctx.modulus
        u = upper_u(ctx)
        step = [coset_of[enc(_mul(u, g, m))] for g in reps]
        seen = [False] * len(reps)
        orbits = 0
        for i in range(len(reps)):
            if not seen[i]:
                orbits += 1
                j = i
                while not seen[j]:
                    seen[j] = True
                    j = step[j]
        direct = Fraction(orbits, len(reps))
        if direct != ratio:
            raise ConsistencyError("cusp ratio mismatch: direct %s vs formula %s" % (direct, ratio))
    return ratio


def delta(h: Subgroup) -> Fraction:
    """1 - 3 r_sigma - 4 r_tau - 6 (cusp ratio), all exact."""
    ctx = h.ctx
    hcodes = h.codes()
    cls_s = class_codes(ConjClassRef(ctx, "sigma"))
    cls_t = class_codes(ConjClassRef(ctx, "tau"))
    return (
        1
        - 3 * Fraction(len(hcodes & cls_s), len(cls_s))
        - 4 * Fraction(len(hcodes & cls_t), len(cls_t))
        - 6 * cusp_orbit_ratio(h)
    )


def genus(h: Subgroup) -> int:
    """g = 1 + [G:H] delta / 12; valid only when -1 in H."""
    if minus_one(h.ctx) not in h:
        raise PreconditionError(
            "genus formula needs -1 in H; use genus_with_minus_one for <H, -1>"
        )
    index = h.ctx.order // h.order
    g = 1 + Fraction(index, 12) * delta(h)
    if g.denominator != 1 or g < 0:
        raise ConsistencyError("genus %s is not a non-negative integer" % g)
    return int(g)


def genus_with_minus_one(h: Subgroup) -> int:
    from .subgroups import adjoin_minus_one

    return genus(adjoin_minus_one(h))


@dataclass(frozen=True)
class GenusReport:
    index: int
    count_sigma: int
    count_tau: int
    cusp_ratio: Fraction
    delta: Fraction
    genus: Optional[int]
    fix_sigma: int
    fix_tau: int

    def to_json_dict(self) -> dict:
        d = {
            "index": num_to_json(self.index),
            "count_sigma": num_to_json(self.count_sigma),
            "count_tau": num_to_json(self.count_tau),
            "cusp_ratio": num_to_json(self.cusp_ratio),
            "delta": num_to_json(self.delta),
            "fix_sigma": num_to_json(self.fix_sigma),
            "fix_tau": num_to_json(self.fix_tau),
        }
        if self.genus is not None:
            d["genus"] = num_to_json(self.genus)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "GenusReport":
        from .core import json_from_fraction

        return cls(
            index=int(d["index"]),
            count_sigma=int(d["count_sigma"]),
            count_tau=int(d["count_tau"]),
            cusp_ratio=json_from_fraction(d["cusp_ratio"]),
            delta=json_from_fraction(d["delta"]),
            genus=int(d["genus"]) if "genus" in d else None,
            fix_sigma=int(d["fix_sigma"]),
            fix_tau=int(d["fix_tau"]),
        )


def genus_report(h: Subgroup) -> GenusReport:
    ctx = h.ctx
    hcodes = h.codes()
    cls_s = class_codes(ConjClassRef(ctx, "sigma"))
    cls_t = class_codes(ConjClassRef(ctx, "tau"))
    cs, ct = len(hcodes & cls_s), len(hcodes & cls_t)
    cusp = cusp_orbit_ratio(h)
    index = ctx.order // h.order
    d = 1 - 3 * Fraction(cs, len(cls_s)) - 4 * Fraction(ct, len(cls_t)) - 6 * cusp
    fs = fix_points(h, sigma_mat(ctx))
    ft = fix_points(h, tau_mat(ctx))
    g: Optional[int] = None
    if minus_one(ctx) in h:
        gval = 1 + Fraction(index, 12) * d
        if gval.denominator != 1 or gval < 0:
            raise ConsistencyError("genus %s is not a non-negative integer" % gval)
        g = int(gval)
    return GenusReport(index, cs, ct, cusp, d, g, fs, ft)


# -------------------- closed-form genera at level p --------------------


def closed_form_genus(kind: str, p: int) -> Fraction:
    """The displayed closed forms for g_B, g_C, g_D (prime level p >= 5)."""
    if p < 5:
        raise PreconditionError("closed-form genera stated for p >= 5, got %d" % p)
    l1 = legendre(-1, p)
    l3 = legendre(-3, p)
    if kind == "B":
        return Fraction(p - 6 - 3 * l1 - 4 * l3, 12)
    if kind == "C":
        return Fraction(p * p - 8 * p + 11 - 4 * l3, 24)
    if kind == "D":
        return Fraction(p * p - 10 * p + 23 + 6 * l1 + 4 * l3, 24)
    raise ValueError("closed forms exist for kinds B, C, D; got %r" % kind)
