"""Enumeration of SL2(Z/p^nZ), conjugacy classes and centralizers.

Element sets store packed codes (see core.encoder).  Orbits are computed by
frontier expansion conjugating with the two generators u, t(u) only, which
keeps memory at O(#class) instead of O(#group).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from .core import (
    DEFAULT_MAX_ELEMENTS,
    ConsistencyError,
    ContextMismatchError,
    FeasibilityError,
    GroupCtx,
    Mat,
    PreconditionError,
    _inv,
    _mul,
    decoder,
    encoder,
    identity,
    is_prime,
    mat_pow,
    neg,
    lower_u,
    sigma,
    sl2_order,
    tau,
    upper_u,
)


def group_order(p: int, n: int) -> int:
    """(p+1)(p-1)p^(3n-2); rejects composite p."""
    if not is_prime(p):
        raise ValueError("p must be prime, got %d" % p)
    if n < 1:
        raise ValueError("n must be >= 1, got %d" % n)
    return sl2_order(p, n)


@dataclass(frozen=True)
class ElementSet:
    """A set of group elements bound to a context, stored as packed codes."""

    ctx: GroupCtx
    codes: FrozenSet

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, x: Mat) -> bool:
        return encoder(self.ctx)(x) in self.codes

    def mats(self) -> Iterator[Mat]:
        dec = decoder(self.ctx)
        for c in self.codes:
            yield dec(c)

    def same_ctx(self, other: "ElementSet") -> None:
        if self.ctx != other.ctx:
            raise ContextMismatchError(
                "element sets live in different contexts (%r vs %r)" % (self.ctx, other.ctx)
            )


def _closure_codes(
    gens: Iterable[Mat], ctx: GroupCtx, cap: int, include_inverses: bool = True
) -> FrozenSet:
    m = ctx.modulus
    enc = encoder(ctx)
    step: List[Mat] = []
    for g in gens:
        step.append(g)
        if include_inverses:
            step.append(_inv(g, m))
    one = identity(ctx)
    seen = {enc(one)}
    frontier = [one]
    while frontier:
        nxt: List[Mat] = []
        for x in frontier:
            for g in step:
                z = _mul(x, g, m)
                c = enc(z)
                if c not in seen:
                    seen.add(c)
                    if len(seen) > cap:
                        raise FeasibilityError(
                            "closure exceeded cap of %d elements; raise --max-elements "
                            "or SL2_MAX_ELEMENTS" % cap
                        )
                    nxt.append(z)
        frontier = nxt
    return frozenset(seen)


def enumerate_group(ctx: GroupCtx, cap: int = DEFAULT_MAX_ELEMENTS) -> ElementSet:
    """Materialize SL2(Z/p^nZ) as the closure of <u, t(u)>."""
    if ctx.order > cap:
        raise FeasibilityError(
            "SL2(Z/%d^%dZ) has %d elements, above the cap of %d; raise --max-elements "
            "or SL2_MAX_ELEMENTS" % (ctx.p, ctx.n, ctx.order, cap)
        )
    codes = _closure_codes((upper_u(ctx), lower_u(ctx)), ctx, cap)
    if len(codes) != ctx.order:
        raise ConsistencyError("closure of <u, t(u)> missed elements")  # pragma: no cover
    return ElementSet(ctx, codes)


def gl2_enumerate(ctx: GroupCtx, cap: int = DEFAULT_MAX_ELEMENTS) -> ElementSet:
    from .core import gl2_order

    if gl2_order(ctx.p, ctx.n) > cap:
        raise FeasibilityError("GL2 enumeration above cap of %d" % cap)
    codes = _closure_codes(gl2_generators(ctx), ctx, cap)
    return ElementSet(ctx, codes)


def gl2_generators(ctx: GroupCtx) -> List[Mat]:
    """u, t(u) plus diagonal matrices generating the determinant image."""
    m = ctx.modulus
    gens = [upper_u(ctx), lower_u(ctx)]
    if ctx.p == 2:
        if ctx.n >= 2:
            gens.append(((-1) % m, 0, 0, 1))
        if ctx.n >= 3:
            gens.append((5 % m, 0, 0, 1))
    else:
        g = _primitive_root_mod_pn(ctx.p, ctx.n)
        gens.append((g, 0, 0, 1))
    return gens


def _primitive_root_mod_pn(p: int, n: int) -> int:
    m = p**n
    target = (p - 1) * p ** (n - 1)
    from .core import factorize

    qs = list(factorize(target))
    for g in range(2, m):
        if g % p == 0:
            continue
        if all(pow(g, target // q, m) != 1 for q in qs):
            return g
    raise RuntimeError("no primitive root mod %d^%d" % (p, n))  # pragma: no cover


# -------------------- conjugacy class references --------------------

_KINDS = ("sigma", "tau", "u_power", "neg_sigma", "neg_tau", "neg_u", "u_square", "custom")


@dataclass(frozen=True)
class ConjClassRef:
    """A named conjugacy class bound to a context.

    ``u_power`` with exponent r refers to Conj(u^(p^r)); the class is
    nontrivial only while r + 1 <= n.
    """

    ctx: GroupCtx
    kind: str
    r: int = 0
    rep: Optional[Mat] = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError("unknown class kind %r" % (self.kind,))
        if self.kind == "u_power":
            if self.r < 0 or self.r + 1 > self.ctx.n:
                raise PreconditionError(
                    "u_power(%d) is trivial modulo %d^%d" % (self.r, self.ctx.p, self.ctx.n)
                )
        if self.kind == "custom":
            if self.rep is None:
                raise ValueError("custom class needs a representative")
            from .core import is_sl2

            if not is_sl2(self.rep, self.ctx):
                raise PreconditionError("custom representative %r is not in SL2" % (self.rep,))

    def representative(self) -> Mat:
        ctx = self.ctx
        if self.kind == "sigma":
            return sigma(ctx)
        if self.kind == "tau":
            return tau(ctx)
        if self.kind == "u_power":
            return mat_pow(upper_u(ctx), ctx.p**self.r, ctx)
        if self.kind == "neg_sigma":
            return neg(sigma(ctx), ctx)
        if self.kind == "neg_tau":
            return neg(tau(ctx), ctx)
        if self.kind == "neg_u":
            return neg(upper_u(ctx), ctx)
        if self.kind == "u_square":
            return mat_pow(upper_u(ctx), 2, ctx)
        assert self.rep is not None
        return self.rep


def sigma_ref(ctx: GroupCtx) -> ConjClassRef:
    return ConjClassRef(ctx, "sigma")


def tau_ref(ctx: GroupCtx) -> ConjClassRef:
    return ConjClassRef(ctx, "tau")


def u_power_ref(ctx: GroupCtx, r: int = 0) -> ConjClassRef:
    return ConjClassRef(ctx, "u_power", r=r)


# -------------------- closed-form class and centralizer sizes --------------------


def conj_class_size_formula(ref: ConjClassRef) -> int:
    """Closed-form #Conj for the sigma/tau/u^(p^r) families."""
    p, n = ref.ctx.p, ref.ctx.n
    if ref.kind == "sigma":
        if p == 2:
            return 3 if n == 1 else 3 * 2 ** (2 * n - 3)
        if p % 4 == 3:
            return (p - 1) * p ** (2 * n - 1)
        return (p + 1) * p ** (2 * n - 1)
    if ref.kind == "tau":
        if p == 3:
            return 4 * 3 ** (2 * n - 2)
        if p % 3 == 2:
            return (p - 1) * p ** (2 * n - 1)
        return (p + 1) * p ** (2 * n - 1)
    if ref.kind == "u_power":
        k = n - ref.r  # u^(p^r) sits in SL2(Z/p^(r+k)Z) with k >= 1
        if p >= 3:
            return (p * p - 1) // 2 * p ** (2 * k - 2)
        if k == 1:
            return 3
        if k == 2:
            return 6
        return 3 * 2 ** (2 * k - 4)
    raise PreconditionError("no closed-form class size for kind %r; use conj_class_brute" % ref.kind)


def centralizer_order_formula(ref: ConjClassRef) -> int:
    """Closed-form #Z(alpha) for sigma, tau and u (r = 0)."""
    p, n = ref.ctx.p, ref.ctx.n
    if ref.kind == "sigma":
        if p == 2:
            return 2 if n == 1 else 2 ** (n + 1)
        if p % 4 == 3:
            return (p + 1) * p ** (n - 1)
        return (p - 1) * p ** (n - 1)
    if ref.kind == "tau":
        if p == 3:
            return 2 * 3**n
        if p % 3 == 2:
            return (p + 1) * p ** (n - 1)
        return (p - 1) * p ** (n - 1)
    if ref.kind == "u_power" and ref.r == 0:
        if p >= 3:
            return 2 * p**n
        if n == 1:
            return 2
        if n == 2:
            return 8
        return 2 ** (n + 2)
    raise PreconditionError("no closed-form centralizer for kind %r; use brute force" % ref.kind)


# -------------------- brute-force orbits --------------------


def conj_class_brute(
    rep: Mat,
    ctx: GroupCtx,
    cap: int = DEFAULT_MAX_ELEMENTS,
    ambient: str = "SL2",
) -> ElementSet:
    """Full conjugation orbit {g^-1 rep g} by frontier expansion over generators."""
    m = ctx.modulus
    dt = (rep[0] * rep[3] - rep[1] * rep[2]) % m
    if ambient == "SL2" and dt != 1 % m:
        raise PreconditionError("representative %r is not in SL2 (det=%d)" % (rep, dt))
    gens = gl2_generators(ctx) if ambient == "GL2" else [upper_u(ctx), lower_u(ctx)]
    pairs = []
    for g in gens:
        gi = _inv(g, m)
        pairs.append((g, gi))
        pairs.append((gi, g))
    enc = encoder(ctx)
    seen = {enc(rep)}
    frontier = [rep]
    while frontier:
        nxt: List[Mat] = []
        for x in frontier:
            for g, gi in pairs:
                z = _mul(gi, _mul(x, g, m), m)
                c = enc(z)
                if c not in seen:
                    seen.add(c)
                    if len(seen) > cap:
                        raise FeasibilityError(
                            "conjugacy orbit exceeded cap of %d elements" % cap
                        )
                    nxt.append(z)
        frontier = nxt
    return ElementSet(ctx, frozenset(seen))


_CLASS_CACHE: Dict[Tuple[int, int, str, int], FrozenSet] = {}


def class_codes(ref: ConjClassRef, cap: int = DEFAULT_MAX_ELEMENTS) -> FrozenSet:
    """Cached orbit codes for a class reference (brute force, any kind)."""
    ctx = ref.ctx
    if ref.kind == "custom":
        return conj_class_brute(ref.representative(), ctx, cap).codes
    key = (ctx.p, ctx.n, ref.kind, ref.r)
    got = _CLASS_CACHE.get(key)
    if got is None:
        got = conj_class_brute(ref.representative(), ctx, cap).codes
        _CLASS_CACHE[key] = got
    return got


def centralizer_brute(rep: Mat, group: ElementSet) -> ElementSet:
    m = group.ctx.modulus
    dec = decoder(group.ctx)
    out = set()
    for c in group.codes:
        g = dec(c)
        if _mul(g, rep, m) == _mul(rep, g, m):
            out.add(c)
    return ElementSet(group.ctx, frozenset(out))


def partition_into_classes(group: ElementSet) -> List[ElementSet]:
    """All conjugacy classes of a materialized group (small contexts only)."""
    ctx = group.ctx
    dec = decoder(ctx)
    remaining = set(group.codes)
    out: List[ElementSet] = []
    while remaining:
        rep = dec(min(remaining))
        cls = conj_class_brute(rep, ctx, cap=len(group.codes))
        remaining -= cls.codes
        out.append(cls)
    return out
