"""Subgroups of SL2(Z/p^nZ) by generators, with materialized closure.

Covers the standard level-one subgroups (Borel, split/nonsplit Cartan
normalizers, exceptional, the order-3 subgroup at p=2 and the maximal
mod-2-surjective subgroup of SL2(Z/4Z)), reduction preimages, the kernel
filtration H_s, slimness, exhaustive lattice enumeration at desk scale and
seeded random sampling.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .core import (
    DEFAULT_MAX_ELEMENTS,
    ConsistencyError,
    ContextMismatchError,
    FeasibilityError,
    GroupCtx,
    Mat,
    NotInvertibleError,
    PreconditionError,
    ReductionError,
    _inv,
    _mul,
    decoder,
    encoder,
    identity,
    lower_u,
    make_ctx,
    mat,
    minus_one,
    parse_mat,
    reduce_mat,
    sigma,
    upper_u,
)
from .groups import ElementSet, _closure_codes, enumerate_group

# -------------------- the subgroup value --------------------


@dataclass(eq=False)
class Subgroup:
    """A subgroup given by generators; the element set is materialized lazily
    and never mutated afterwards."""

    ctx: GroupCtx
    gens: Tuple[Mat, ...]
    ambient: str = "SL2"
    cap: int = DEFAULT_MAX_ELEMENTS
    _codes: Optional[FrozenSet] = field(default=None, repr=False)
    _reduced: Dict[int, FrozenSet] = field(default_factory=dict, repr=False)

    @classmethod
    def from_codes(
        cls, ctx: GroupCtx, codes: FrozenSet, ambient: str = "SL2", gens: Tuple[Mat, ...] = ()
    ) -> "Subgroup":
        s = cls(ctx, gens, ambient)
        s._codes = frozenset(codes)
        return s

    def codes(self) -> FrozenSet:
        if self._codes is None:
            self._codes = _closure_codes(self.gens, self.ctx, self.cap)
        return self._codes

    @property
    def order(self) -> int:
        return len(self.codes())

    def __contains__(self, x: Mat) -> bool:
        return encoder(self.ctx)(x) in self.codes()

    def mats(self) -> Iterator[Mat]:
        dec = decoder(self.ctx)
        for c in self.codes():
            yield dec(c)

    def elements(self) -> ElementSet:
        return ElementSet(self.ctx, self.codes())

    def reduced_codes(self, level: int) -> FrozenSet:
        """Codes of the image H mod p^level (level <= n)."""
        if level == self.ctx.n:
            return self.codes()
        if level > self.ctx.n or level < 1:
            raise ReductionError("cannot reduce level %d subgroup to level %d" % (self.ctx.n, level))
        got = self._reduced.get(level)
        if got is None:
            sub = make_ctx(self.ctx.p, level)
            dec = decoder(self.ctx)
            enc = encoder(sub)
            m = sub.modulus
            got = frozenset(enc(reduce_mat(dec(c), m)) for c in self.codes())
            self._reduced[level] = got
        return got

    def reduce_to(self, level: int) -> "Subgroup":
        return Subgroup.from_codes(make_ctx(self.ctx.p, level), self.reduced_codes(level), self.ambient)

    def conjugate(self, g: Mat) -> "Subgroup":
        m = self.ctx.modulus
        gi = _inv(g, m)
        enc = encoder(self.ctx)
        dec = decoder(self.ctx)
        codes = frozenset(enc(_mul(gi, _mul(dec(c), g, m), m)) for c in self.codes())
        return Subgroup.from_codes(self.ctx, codes, self.ambient)


def closure(
    gens: Sequence[Mat],
    ctx: GroupCtx,
    ambient: str = "SL2",
    cap: int = DEFAULT_MAX_ELEMENTS,
) -> Subgroup:
    """Smallest subgroup containing the generators (breadth-first closure)."""
    m = ctx.modulus
    for g in gens:
        dt = (g[0] * g[3] - g[1] * g[2]) % m
        if ambient == "SL2":
            if dt != 1 % m:
                raise PreconditionError("generator %r has det %d != 1" % (g, dt))
        else:
            from math import gcd

            if gcd(dt, m) != 1:
                raise NotInvertibleError("generator %r has non-unit det %d" % (g, dt))
    s = Subgroup(ctx, tuple(gens), ambient, cap)
    s.codes()
    return s


def full_group(ctx: GroupCtx, cap: int = DEFAULT_MAX_ELEMENTS) -> Subgroup:
    es = enumerate_group(ctx, cap)
    return Subgroup.from_codes(ctx, es.codes, "SL2", gens=(upper_u(ctx), lower_u(ctx)))


def adjoin_minus_one(h: Subgroup) -> Subgroup:
    """<H, -1>; since -1 is a central involution this is H u (-1)H."""
    ctx = h.ctx
    m = ctx.modulus
    enc = encoder(ctx)
    dec = decoder(ctx)
    neg1 = minus_one(ctx)
    codes = set(h.codes())
    for c in h.codes():
        x = dec(c)
        codes.add(enc(_mul(neg1, x, m)))
    return Subgroup.from_codes(ctx, frozenset(codes), h.ambient, gens=h.gens + (neg1,))


# -------------------- reduction preimage and filtration --------------------


def _sl2_lift_one(x: Mat, dst_modulus: int) -> Mat:
    """Lift x to an SL2 element mod dst_modulus congruent to x (column rescale)."""
    a, b, c, d = x
    dt = (a * d - b * c) % dst_modulus
    di = pow(dt, -1, dst_modulus)
    return (a * di % dst_modulus, b, c * di % dst_modulus, d)


def _kernel_step(ctx_next: GroupCtx) -> List[Mat]:
    """Kernel of SL2(Z/p^(m+1)Z) -> SL2(Z/p^mZ): {1 + p^m W | tr W = 0 mod p}."""
    p = ctx_next.p
    q = ctx_next.modulus // p  # p^m
    m = ctx_next.modulus
    out = []
    for a in range(p):
        for b in range(p):
            for c in range(p):
                d = (-a) % p
                out.append(((1 + q * a) % m, q * b % m, q * c % m, (1 + q * d) % m))
    return out


def preimage(h: Subgroup, dst: GroupCtx, cap: int = DEFAULT_MAX_ELEMENTS) -> Subgroup:
    """Full inverse image of H under the mod p^m reduction; order #H * p^(3(n-m))."""
    if h.ambient != "SL2":
        raise PreconditionError("preimage is implemented for SL2 subgroups only")
    if dst.p != h.ctx.p:
        raise ReductionError("preimage between different primes")
    if dst.n < h.ctx.n:
        raise ReductionError("destination level %d below source level %d" % (dst.n, h.ctx.n))
    start_order = h.order
    codes = h.codes()
    ctx = h.ctx
    while ctx.n < dst.n:
        nxt = make_ctx(ctx.p, ctx.n + 1)
        if len(codes) * ctx.p**3 > cap:
            raise FeasibilityError(
                "preimage would hold %d elements, above the cap of %d"
                % (len(codes) * ctx.p**3, cap)
            )
        kern = _kernel_step(nxt)
        dec = decoder(ctx)
        enc = encoder(nxt)
        m = nxt.modulus
        out = set()
        for c in codes:
            lift = _sl2_lift_one(dec(c), m)
            for k in kern:
                out.add(enc(_mul(lift, k, m)))
        codes = frozenset(out)
        ctx = nxt
    got = Subgroup.from_codes(dst, codes, "SL2")
    if got.order != start_order * dst.p ** (3 * (dst.n - h.ctx.n)):
        raise ConsistencyError("preimage order mismatch")  # pragma: no cover
    return got


def filtration_level(h: Subgroup, s: int) -> Subgroup:
    """H_s = H n (1 + p^s M2), the kernel of reduction mod p^s restricted to H."""
    n = h.ctx.n
    if not 1 <= s <= n:
        raise ValueError("filtration level s=%d outside 1..%d" % (s, n))
    q = h.ctx.p**s
    dec = decoder(h.ctx)
    one = identity(h.ctx)
    keep = frozenset(
        c for c in h.codes() if reduce_mat(dec(c), q) == reduce_mat(one, q)
    )
    return Subgroup.from_codes(h.ctx, keep, h.ambient)


def last_kernel_codes(ctx: GroupCtx) -> FrozenSet:
    """(1 + p^(n-1) M2)^{det=1}, the p^3-element kernel of the last reduction."""
    if ctx.n < 2:
        raise PreconditionError("last kernel needs level n >= 2")
    enc = encoder(ctx)
    return frozenset(enc(k) for k in _kernel_step(ctx))


def is_slim(h: Subgroup) -> bool:
    """H does not contain (1 + p^(n-1) M2)^{det=1}; at n=1, H is proper."""
    if h.ambient != "SL2":
        raise PreconditionError("slimness is defined for SL2 subgroups")
    if h.ctx.n == 1:
        return h.order != h.ctx.order
    return not last_kernel_codes(h.ctx) <= h.codes()


# -------------------- standard subgroups --------------------


def smallest_nonresidue(p: int) -> int:
    if p == 2:
        raise PreconditionError("no quadratic non-residue mod 2")
    for k in range(2, p):
        if pow(k, (p - 1) // 2, p) == p - 1:
            return k
    raise RuntimeError("no non-residue mod %d" % p)  # pragma: no cover


def borel(p: int) -> Subgroup:
    """Upper triangular matrices of SL2(Z/pZ); order p(p-1)."""
    ctx = make_ctx(p, 1)
    gens = [upper_u(ctx)]
    if p > 2:
        g = _primitive_root(p)
        gens.append(mat(g, 0, 0, pow(g, -1, p), ctx))
    got = closure(gens, ctx)
    if got.order != p * (p - 1):
        raise ConsistencyError("Borel order %d != p(p-1)" % got.order)  # pragma: no cover
    return got


def split_cartan_normalizer(p: int) -> Subgroup:
    """Monomial matrices of SL2(Z/pZ); order 2(p-1)."""
    ctx = make_ctx(p, 1)
    gens = [sigma(ctx)]
    if p > 2:
        g = _primitive_root(p)
        gens.append(mat(g, 0, 0, pow(g, -1, p), ctx))
    got = closure(gens, ctx)
    if got.order != 2 * (p - 1):
        raise ConsistencyError("C order %d != 2(p-1)" % got.order)  # pragma: no cover
    return got


def nonsplit_cartan_normalizer(p: int, lam: Optional[int] = None) -> Subgroup:
    """Norm-one torus {(x y; ly x)} and its flip; order 2(p+1).

    lam defaults to the smallest positive quadratic non-residue mod p.
    """
    if p < 3:
        raise PreconditionError("nonsplit Cartan normalizer needs p >= 3")
    ctx = make_ctx(p, 1)
    if lam is None:
        lam = smallest_nonresidue(p)
    elif pow(lam, (p - 1) // 2, p) != p - 1:
        raise PreconditionError("%d is not a quadratic non-residue mod %d" % (lam, p))
    torus_gen = None
    best_order = 0
    from .core import element_order

    for x in range(p):
        for y in range(p):
            if (x * x - lam * y * y) % p == 1 % p:
                cand = mat(x, y, lam * y, x, ctx)
                o = element_order(cand, ctx)
                if o > best_order:
                    best_order = o
                    torus_gen = cand
        if best_order == p + 1:
            break
    if torus_gen is None or best_order != p + 1:
        raise ConsistencyError("norm-one torus generator not found")  # pragma: no cover
    flip = None
    for x in range(p):
        for y in range(p):
            if (-x * x + lam * y * y) % p == 1 % p:
                flip = mat(x, y, -lam * y, -x, ctx)
                break
        if flip is not None:
            break
    assert flip is not None
    got = closure([torus_gen, flip], ctx)
    if got.order != 2 * (p + 1):
        raise ConsistencyError("D order %d != 2(p+1)" % got.order)  # pragma: no cover
    return got


def _primitive_root(p: int) -> int:
    from .core import factorize

    qs = list(factorize(p - 1))
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise RuntimeError("no primitive root mod %d" % p)  # pragma: no cover


def order_three_subgroup() -> Subgroup:
    """F = the subgroup of order 3 of SL2(Z/2Z)."""
    ctx = make_ctx(2, 1)
    return closure([mat(1, 1, 1, 0, ctx)], ctx)


def a1_subgroup() -> Subgroup:
    """The maximal mod-2-surjective proper subgroup <sigma, (1 1; 2 -1)> of SL2(Z/4Z)."""
    ctx = make_ctx(2, 2)
    got = closure([sigma(ctx), mat(1, 1, 2, -1, ctx)], ctx)
    if got.order != 12:
        raise ConsistencyError("A1 order %d != 12" % got.order)  # pragma: no cover
    return got


# --- exceptional subgroups ---

# (group order, multiset of element orders) certifies A4 / S4 / A5 uniquely
# among groups of that order.
_EXC_PROFILE = {
    "A4": (12, {1: 1, 2: 3, 3: 8}),
    "S4": (24, {1: 1, 2: 9, 3: 8, 4: 6}),
    "A5": (60, {1: 1, 2: 15, 3: 20, 5: 24}),
}


def _pgl_canon(x: Mat, p: int) -> Mat:
    for e in x:
        v = e % p
        if v:
            inv = pow(v, -1, p)
            return (x[0] * inv % p, x[1] * inv % p, x[2] * inv % p, x[3] * inv % p)
    raise ValueError("zero matrix")  # pragma: no cover


def _pgl_order(x: Mat, p: int) -> int:
    one = _pgl_canon((1, 0, 0, 1), p)
    y = _pgl_canon(x, p)
    o = 1
    z = y
    while z != one:
        z = _pgl_canon(_mul(z, y, p), p)
        o += 1
    return o


def _pgl_closure(gens: List[Mat], p: int, cap: int = 200) -> Optional[FrozenSet]:
    one = (1, 0, 0, 1)
    seen = {one}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                z = _pgl_canon(_mul(x, g, p), p)
                if z not in seen:
                    if len(seen) >= cap:
                        return None
                    seen.add(z)
                    nxt.append(z)
        frontier = nxt
    return frozenset(seen)


def exceptional_availability(p: int, iso: str) -> bool:
    if p < 5:
        return False
    if iso in ("A4", "S4"):
        return True
    if iso == "A5":
        # PGL2 has an A5 iff p = 0, +-1 mod 5, but at p = 5 its preimage has
        # order divisible by p, so no exceptional subgroup arises from it.
        return p % 5 in (1, 4) and p != 5
    raise ValueError("unknown exceptional type %r" % iso)


def exceptional_subgroup(p: int, iso: str = "S4", seed: int = 0, max_tries: int = 40000) -> Subgroup:
    """E = (preimage of an A4/S4/A5 in PGL2(F_p)) n SL2(F_p).

    The PGL2 subgroup is found by seeded random generator search and
    certified by its order statistics.
    """
    if not exceptional_availability(p, iso):
        if iso == "A5" and p == 5:
            raise PreconditionError("A5 preimage at p=5 has order divisible by 5")
        raise PreconditionError(
            "exceptional type %s unavailable at p=%d (A5 needs p = +-1 mod 5)" % (iso, p)
        )
    want_order, want_stats = _EXC_PROFILE[iso]
    seek = {"A4": 3, "S4": 4, "A5": 5}[iso]
    rng = random.Random((seed, p, iso).__repr__())
    invol: List[Mat] = []
    other: List[Mat] = []
    for _ in range(max_tries):
        if invol and other:
            a = rng.choice(invol)
            b = rng.choice(other)
            pg = _pgl_closure([a, b], p, cap=2 * want_order)
            if pg is not None and len(pg) == want_order:
                stats = Counter(_pgl_order(x, p) for x in pg)
                if dict(stats) == want_stats:
                    return _pullback_to_sl2(pg, p)
        x = (rng.randrange(p), rng.randrange(p), rng.randrange(p), rng.randrange(p))
        if (x[0] * x[3] - x[1] * x[2]) % p == 0:
            continue
        o = _pgl_order(x, p)
        if o == 2:
            invol.append(_pgl_canon(x, p))
        elif o == seek:
            other.append(_pgl_canon(x, p))
    raise RuntimeError("exceptional %s search failed at p=%d (seed %d)" % (iso, p, seed))


def _pullback_to_sl2(pgl_codes: FrozenSet, p: int) -> Subgroup:
    ctx = make_ctx(p, 1)
    dec = decoder(ctx)
    keep = frozenset(
        c for c in enumerate_group(ctx).codes if _pgl_canon(dec(c), p) in pgl_codes
    )
    got = Subgroup.from_codes(ctx, keep)
    if got.order not in (24, 48, 120):
        raise ConsistencyError("exceptional pullback has order %d" % got.order)  # pragma: no cover
    return got


_KIND_ALIASES = {
    "B": "Borel",
    "Borel": "Borel",
    "C": "SplitCartanNorm",
    "SplitCartanNorm": "SplitCartanNorm",
    "D": "NonsplitCartanNorm",
    "NonsplitCartanNorm": "NonsplitCartanNorm",
    "F": "F",
    "A1": "A1",
    "full": "FullSL2",
    "FullSL2": "FullSL2",
}


def standard_subgroup(kind: str, p: int, seed: int = 0) -> Subgroup:
    """The named subgroups at their natural level (B/C/D/E/F at p, A1 at p^2)."""
    if kind.startswith("E:") or kind.startswith("Exceptional:"):
        iso = kind.split(":", 1)[1]
        if p < 5:
            raise PreconditionError("exceptional subgroups need p >= 5")
        return exceptional_subgroup(p, iso, seed=seed)
    tag = _KIND_ALIASES.get(kind)
    if tag is None:
        raise ValueError("unknown subgroup kind %r" % kind)
    if tag == "Borel":
        return borel(p)
    if tag == "SplitCartanNorm":
        return split_cartan_normalizer(p)
    if tag == "NonsplitCartanNorm":
        if p < 3:
            raise PreconditionError("nonsplit Cartan normalizer needs p >= 3")
        return nonsplit_cartan_normalizer(p)
    if tag == "F":
        if p != 2:
            raise PreconditionError("F is a subgroup of SL2(Z/2Z)")
        return order_three_subgroup()
    if tag == "A1":
        if p != 2:
            raise PreconditionError("A1 is a subgroup of SL2(Z/4Z)")
        return a1_subgroup()
    return full_group(make_ctx(p, 1))


# -------------------- subgroup spec strings --------------------


def parse_subgroup_spec(
    spec: str, p: int, n: int, seed: int = 0, cap: int = DEFAULT_MAX_ELEMENTS
) -> Subgroup:
    """CLI subgroup mini-language.

    "B", "C", "D", "E:A4|S4|A5", "F", "A1", "full",
    "gens:a,b;c,d|a,b;c,d|...", "preimage:<spec>@<m>".
    """
    spec = spec.strip()
    ctx = make_ctx(p, n)
    if spec.startswith("preimage:"):
        inner, at = spec[len("preimage:") :].rsplit("@", 1)
        src_level = int(at)
        if src_level > n:
            raise ValueError("preimage source level %d exceeds n=%d" % (src_level, n))
        h = parse_subgroup_spec(inner, p, src_level, seed=seed, cap=cap)
        return preimage(h, ctx, cap=cap)
    if spec.startswith("gens:"):
        gens = [parse_mat(g, ctx) for g in spec[len("gens:") :].split("|")]
        return closure(gens, ctx, cap=cap)
    if spec == "full":
        return full_group(ctx, cap=cap)
    natural = 2 if spec == "A1" else 1
    if n != natural:
        raise ValueError(
            "subgroup %r lives at level %d; use preimage:%s@%d for level %d"
            % (spec, natural, spec, natural, n)
        )
    return standard_subgroup(spec, p, seed=seed)


# -------------------- exhaustive lattice enumeration --------------------

EXHAUSTIVE_CAP = 10_000


def all_subgroups(
    universe: ElementSet,
    conjugacy_gens: Optional[Sequence[Mat]] = None,
) -> List[FrozenSet]:
    """Every subgroup of the (closed) universe, as code frozensets.

    Cyclic-extension search: each subgroup is grown from a class
    representative by one prime-power cyclic subgroup at a time; when
    conjugacy_gens generate the universe, only class representatives are
    extended and orbits are expanded afterwards.
    """
    ctx = universe.ctx
    if len(universe) > EXHAUSTIVE_CAP:
        raise FeasibilityError(
            "exhaustive subgroup enumeration capped at %d elements" % EXHAUSTIVE_CAP
        )
    dec = decoder(ctx)
    codes = sorted(universe.codes)
    index = {c: i for i, c in enumerate(codes)}
    k = len(codes)
    m = ctx.modulus
    mats = [dec(c) for c in codes]
    use_table = k * k <= 9_000_000
    if use_table:
        enc = encoder(ctx)
        table = [[index[enc(_mul(x, y, m))] for y in mats] for x in mats]

        def mul(i: int, j: int) -> int:
            return table[i][j]

    else:  # pragma: no cover - only for unusually large universes
        enc = encoder(ctx)

        def mul(i: int, j: int) -> int:
            return index[enc(_mul(mats[i], mats[j], m))]

    e = index[encoder(ctx)(identity(ctx))]

    # prime-power cyclic subgroups, as (frozenset, generator index)
    cyc: Dict[FrozenSet, int] = {}
    for i in range(k):
        orbit = [e]
        j = i
        while j != e:
            orbit.append(j)
            j = mul(j, i)
        o = len(orbit)
        qs = {q for q in range(2, o + 1) if o % q == 0 and all(q % r for r in range(2, q))}
        if len(qs) == 1 and o > 1:  # prime power order
            key = frozenset(orbit)
            cyc.setdefault(key, i)
    pool = sorted(cyc.items(), key=lambda kv: (len(kv[0]), kv[1]))

    conj_perm: List[List[int]] = []
    if conjugacy_gens:
        enc = encoder(ctx)
        for g in conjugacy_gens:
            for h in (g, _inv(g, m)):
                hi = _inv(h, m)
                conj_perm.append([index[enc(_mul(hi, _mul(x, h, m), m))] for x in mats])

    def close(gens: Tuple[int, ...]) -> FrozenSet:
        seen = {e}
        frontier = [e]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    z = mul(x, g)
                    if z not in seen:
                        seen.add(z)
                        nxt.append(z)
            frontier = nxt
        return frozenset(seen)

    trivial = frozenset([e])
    seen_all: Dict[FrozenSet, None] = {trivial: None}
    reps: List[Tuple[FrozenSet, Tuple[int, ...]]] = [(trivial, ())]
    out: List[FrozenSet] = [trivial]
    wl = 0
    while wl < len(reps):
        h, hgens = reps[wl]
        wl += 1
        for cset, cgen in pool:
            if cset <= h:
                continue
            kgens = hgens + (cgen,)
            knew = close(kgens)
            if knew in seen_all:
                continue
            # record the full conjugacy orbit, queue one representative
            orbit = [knew]
            seen_all[knew] = None
            if conj_perm:
                bi = 0
                while bi < len(orbit):
                    s = orbit[bi]
                    bi += 1
                    for perm in conj_perm:
                        t = frozenset(perm[x] for x in s)
                        if t not in seen_all:
                            seen_all[t] = None
                            orbit.append(t)
            out.extend(orbit)
            reps.append((knew, kgens))
    rev = {i: c for c, i in index.items()}
    return [frozenset(rev[i] for i in s) for s in seen_all]


def subgroups_of_group(h: Subgroup) -> List[Subgroup]:
    subs = all_subgroups(h.elements())
    return [Subgroup.from_codes(h.ctx, s, h.ambient) for s in subs]


# -------------------- random sampling --------------------


def sample_subgroups(
    ctx: GroupCtx,
    count: int,
    rng: random.Random,
    universe: Optional[ElementSet] = None,
    max_tries: int = 0,
    cap: int = DEFAULT_MAX_ELEMENTS,
) -> List[Subgroup]:
    """Random generator pairs/triples, deduplicated by the element-set hash."""
    if universe is None:
        universe = enumerate_group(ctx, cap)
    pool = sorted(universe.codes)
    dec = decoder(ctx)
    out: List[Subgroup] = []
    seen: set = set()
    tries = max_tries or 40 * count
    for _ in range(tries):
        if len(out) >= count:
            break
        k = rng.choice((1, 2, 2, 3))
        gens = tuple(dec(pool[rng.randrange(len(pool))]) for _ in range(k))
        h = Subgroup(ctx, gens, cap=cap)
        key = h.codes()
        if key not in seen:
            seen.add(key)
            out.append(h)
    return out


def _random_kernel_element(ctx: GroupCtx, s: int, rng: random.Random) -> Mat:
    """A random element of (1 + p^s M2)^{det=1}."""
    m = ctx.modulus
    q = ctx.p**s
    span = m // q
    x = (
        (1 + q * rng.randrange(span)) % m,
        q * rng.randrange(span) % m,
        q * rng.randrange(span) % m,
        (1 + q * rng.randrange(span)) % m,
    )
    return _sl2_lift_one(x, m)


def _lift_to(x: Mat, ctx: GroupCtx) -> Mat:
    return _sl2_lift_one(reduce_mat(x, ctx.modulus), ctx.modulus)


def sample_slim_subgroups(
    ctx: GroupCtx,
    count: int,
    rng: random.Random,
    mod_p_target: Optional[Subgroup] = None,
    max_tries: int = 0,
    cap: int = DEFAULT_MAX_ELEMENTS,
    require_minus_one: bool = False,
) -> List[Subgroup]:
    """Seeded rejection sampling of slim subgroups, optionally with the mod-p
    image inside a given level-one subgroup.

    A slim subgroup has #H_1 <= p^(2(n-1)) (one extra factor p at p=2), so
    closures beyond #target * that bound are aborted as certainly non-slim.
    """
    p, n = ctx.p, ctx.n
    if mod_p_target is not None:
        level1_pool = sorted(mod_p_target.mats())
        top = len(level1_pool)
    else:
        level1_pool = sorted(enumerate_group(make_ctx(p, 1)).mats())
        top = len(level1_pool)
    slim_cap = top * p ** (2 * (n - 1)) * (p if p == 2 else 1) + 1
    slim_cap = min(slim_cap, cap)
    out: List[Subgroup] = []
    seen: set = set()
    tries = max_tries or 120 * count
    for trial in range(tries):
        if len(out) >= count:
            break
        gens: List[Mat] = []
        shape = rng.choice((1, 1, 2, 2, 2, 3))
        for _ in range(shape):
            x = _lift_to(level1_pool[rng.randrange(top)], ctx)
            if n > 1 and rng.random() < 0.5:
                x = _mul(x, _random_kernel_element(ctx, rng.randrange(1, n), rng), ctx.modulus)
            gens.append(x)
        if n > 1 and rng.random() < 0.5:
            # kernel elements from upper layers keep the closure slim more often
            s = rng.randrange((n + 1) // 2, n)
            gens.append(_random_kernel_element(ctx, s, rng))
        if require_minus_one:
            gens.append(minus_one(ctx))
        try:
            h = closure(gens, ctx, cap=slim_cap)
        except FeasibilityError:
            continue
        if not is_slim(h):
            continue
        if mod_p_target is not None and not h.reduced_codes(1) <= mod_p_target.codes():
            continue
        key = h.codes()
        if key not in seen:
            seen.add(key)
            out.append(h)
    return out


# -------------------- finite shadows of the surjectivity criteria --------------------


def section2_property_check(lemma_id: str, trials: int = 40, seed: int = 0) -> bool:
    """Finite checks of the surjectivity criteria.

    L2_1: subgroups of SL2(Z/p^nZ) (n >= 3) surjecting mod p^2 are everything;
    for p >= 5 already surjecting mod p suffices.  A1 in SL2(Z/4Z) is the
    recorded p=2 counterexample the criterion excludes.

    L2_5: subgroups of GL2(Z/p^2Z) with full determinant image have
    det(H n (1 + p M2)) = 1 + pZ/p^2Z (p >= 3).
    """
    rng = random.Random(seed)
    if lemma_id == "L2_1":
        for p, n in ((3, 3), (5, 2)):
            ctx = make_ctx(p, n)
            crit = 2 if p < 5 else 1
            crit_codes = enumerate_group(make_ctx(p, crit)).codes
            full_order = ctx.order
            hit = 0
            for h in _l21_samples(ctx, crit, trials, rng):
                if h.reduced_codes(crit) == crit_codes:
                    hit += 1
                    if h.order != full_order:
                        return False
            if hit == 0:  # the biased sampler must exercise the hypothesis
                raise ConsistencyError("L2_1 sampler produced no surjective subgroup")
        # p=2 exception: A1 surjects mod 2 yet is proper
        a1 = a1_subgroup()
        sl2_mod2 = enumerate_group(make_ctx(2, 1)).codes
        if a1.reduced_codes(1) != sl2_mod2 or a1.order == 48:
            return False
        return True
    if lemma_id == "L2_5":
        for p in (3, 5):
            if not _l25_check(p, max(6, trials // 4), rng):
                return False
        return True
    raise ValueError("unknown check id %r (expected L2_1 or L2_5)" % lemma_id)


def _l21_samples(ctx: GroupCtx, crit: int, trials: int, rng: random.Random) -> Iterator[Subgroup]:
    # Half biased (gens lift a generating set of the mod-p^crit image, so the
    # hypothesis holds), half unbiased.
    crit_ctx = make_ctx(ctx.p, crit)
    for i in range(trials):
        if i % 2 == 0:
            gens = [
                _mul(_lift_to(upper_u(crit_ctx), ctx), _random_kernel_element(ctx, crit, rng), ctx.modulus),
                _mul(_lift_to(lower_u(crit_ctx), ctx), _random_kernel_element(ctx, crit, rng), ctx.modulus),
            ]
            yield closure(gens, ctx)
        else:
            got = sample_subgroups(ctx, 1, rng)
            if got:
                yield got[0]


def _l25_check(p: int, trials: int, rng: random.Random) -> bool:
    ctx = make_ctx(p, 2)
    m = ctx.modulus
    g = _primitive_root_mod_p2(p)
    units = {(1 + p * t) % m for t in range(p)}
    one = identity(ctx)
    sl2_pool = sorted(enumerate_group(make_ctx(p, 1)).codes)
    dec1 = decoder(make_ctx(p, 1))
    for _ in range(trials):
        gens: List[Mat] = [mat(g, 0, 0, 1, ctx)]
        for _ in range(rng.choice((0, 1, 1))):
            gens.append(_lift_to(dec1(sl2_pool[rng.randrange(len(sl2_pool))]), ctx))
        h = closure(gens, ctx, ambient="GL2")
        dets = {(x[0] * x[3] - x[1] * x[2]) % m for x in h.mats()}
        if len(dets) != (p - 1) * p:  # determinant image not full: hypothesis fails
            continue
        small = {
            (x[0] * x[3] - x[1] * x[2]) % m
            for x in h.mats()
            if reduce_mat(x, p) == reduce_mat(one, p)
        }
        if not units <= small:
            return False
    return True


def _primitive_root_mod_p2(p: int) -> int:
    m = p * p
    target = p * (p - 1)
    from .core import factorize

    qs = list(factorize(target))
    for g in range(2, m):
        if g % p and all(pow(g, target // q, m) != 1 for q in qs):
            return g
    raise RuntimeError("no primitive root mod %d" % m)  # pragma: no cover
