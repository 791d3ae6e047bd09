import json
import random
from fractions import Fraction

import pytest

from sl2genus.core import (
    PreconditionError,
    decoder,
    make_ctx,
    minus_one,
    sigma,
    tau,
)
from sl2genus.genus import (
    GenusReport,
    closed_form_genus,
    cusp_orbit_ratio,
    delta,
    fix_points,
    genus,
    genus_report,
    genus_with_minus_one,
    legendre,
)
from sl2genus.groups import enumerate_group
from sl2genus.subgroups import (
    Subgroup,
    adjoin_minus_one,
    borel,
    closure,
    full_group,
    nonsplit_cartan_normalizer,
    sample_subgroups,
    split_cartan_normalizer,
    standard_subgroup,
)


def test_legendre_examples():
    assert legendre(-1, 13) == 1
    assert legendre(-1, 23) == -1
    # oracle: (-3)^5 mod 11 = -1 by Euler's criterion
    assert pow(-3 % 11, 5, 11) == 10
    assert legendre(-3, 11) == -1
    assert legendre(0, 7) == 0
    with pytest.raises(ValueError):
        legendre(3, 2)


def test_closed_form_examples():
    assert closed_form_genus("B", 23) == 2  # (23-6+3+4)/12
    assert closed_form_genus("C", 11) == 2  # (121-88+11+4)/24
    assert closed_form_genus("D", 13) == 3  # (62+6+4)/24
    with pytest.raises(PreconditionError):
        closed_form_genus("B", 3)
    with pytest.raises(ValueError):
        closed_form_genus("X", 7)


def test_genus_thresholds_over_primes():
    primes = [p for p in range(5, 41) if all(p % d for d in range(2, p))]
    for p in primes:
        assert (closed_form_genus("B", p) >= 2) == (p >= 23)
        assert (closed_form_genus("C", p) >= 2) == (p >= 11)
        assert (closed_form_genus("D", p) >= 2) == (p >= 13)


def test_genus_matches_closed_forms():
    for p in (5, 7, 11, 13, 17, 19, 23):
        assert genus(borel(p)) == closed_form_genus("B", p)
        assert genus(split_cartan_normalizer(p)) == closed_form_genus("C", p)
        assert genus(nonsplit_cartan_normalizer(p)) == closed_form_genus("D", p)


def test_quoted_x0_genera():
    for p, want in ((11, 1), (13, 0), (17, 1), (19, 1)):
        assert genus(borel(p)) == want


def test_delta_examples():
    c5 = make_ctx(5, 1)
    assert delta(full_group(c5)) == -12
    assert delta(borel(11)) == 0  # g_B(11) = 1 forces delta = 0
    assert cusp_orbit_ratio(full_group(c5)) == 1
    assert cusp_orbit_ratio(borel(19)) == Fraction(1, 10)  # 2/(p+1)


def test_count_in_subgroup_examples():
    from sl2genus.genus import count_in_subgroup
    from sl2genus.groups import ConjClassRef, u_power_ref
    from sl2genus.subgroups import a1_subgroup

    a1 = a1_subgroup()
    assert count_in_subgroup(a1, ConjClassRef(a1.ctx, "sigma")) == 3
    c13 = make_ctx(13, 1)
    assert count_in_subgroup(borel(13), u_power_ref(c13, 0)) == 6  # (p-1)/2
    c7 = make_ctx(7, 1)
    assert count_in_subgroup(nonsplit_cartan_normalizer(7), ConjClassRef(c7, "tau")) == 0
    with pytest.raises(PreconditionError):
        count_in_subgroup(borel(13), ConjClassRef(c7, "tau"))


def test_fix_points_examples():
    c7 = make_ctx(7, 1)
    assert fix_points(full_group(c7), sigma(c7)) == 1
    assert fix_points(borel(7), sigma(c7)) == 0  # B n Conj(sigma) empty, 7 = -1 mod 4
    assert fix_points(full_group(c7), tau(c7)) == 1


def test_genus_requires_minus_one():
    c5 = make_ctx(5, 1)
    from sl2genus.core import upper_u

    h = closure([upper_u(c5)], c5)
    with pytest.raises(PreconditionError):
        genus(h)
    assert genus_with_minus_one(h) == genus(adjoin_minus_one(h))


def test_genus_of_full_group_is_zero():
    for p, n in ((5, 1), (7, 1), (3, 2)):
        assert genus(full_group(make_ctx(p, n))) == 0


def test_dual_route_consistency_on_random_subgroups():
    # fix_points and cusp_orbit_ratio raise ConsistencyError internally on any
    # mismatch between the coset route and the class-counting route
    for p, n, count in ((2, 3, 12), (3, 2, 12), (5, 2, 8)):
        ctx = make_ctx(p, n)
        rng = random.Random((p, n, "dual").__repr__())
        for h in sample_subgroups(ctx, count, rng):
            rep = genus_report(h)
            assert rep.index == ctx.order // h.order
            if rep.genus is not None:
                assert rep.genus >= 0


def test_two_genus_expressions_agree():
    # coset-count expression vs 1 + index*delta/12, for random H containing -1
    for p, n, count in ((3, 2, 10), (2, 3, 10), (5, 1, 10)):
        ctx = make_ctx(p, n)
        rng = random.Random((p, n, "two-expr").__repr__())
        for h0 in sample_subgroups(ctx, count, rng):
            h = adjoin_minus_one(h0)
            rep = genus_report(h)
            cusps = rep.cusp_ratio * rep.index
            assert cusps.denominator == 1
            direct = (
                1
                + Fraction(rep.index, 12)
                - Fraction(rep.fix_sigma, 4)
                - Fraction(rep.fix_tau, 3)
                - Fraction(int(cusps), 2)
            )
            assert direct == rep.genus


def test_delta_is_conjugation_invariant():
    ctx = make_ctx(3, 2)
    g = enumerate_group(ctx)
    dec = decoder(ctx)
    pool = sorted(g.codes)
    rng = random.Random(17)
    h = adjoin_minus_one(sample_subgroups(ctx, 3, rng)[-1])
    base = delta(h)
    for _ in range(20):
        conj = h.conjugate(dec(pool[rng.randrange(len(pool))]))
        assert delta(conj) == base


def test_genus_report_json_round_trip():
    rep = genus_report(borel(13))
    payload = json.loads(json.dumps(rep.to_json_dict()))
    back = GenusReport.from_json_dict(payload)
    assert back == rep
    assert payload["genus"] == "0"
    assert payload["index"] == "14"
