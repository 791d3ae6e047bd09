import random
from fractions import Fraction

import pytest

from sl2genus.bounds import (
    BOUND_KINDS,
    bound_sequence,
    check_slim_bound,
    fiber_count_bound_check,
    fiber_image_bound_check,
    n_prime,
    n_upper_bound,
    section7_case_ids,
    slim_bound_report,
    verify_main_theorem_desk,
    verify_section7,
)
from sl2genus.core import PreconditionError, make_ctx, upper_u
from sl2genus.groups import ConjClassRef, u_power_ref
from sl2genus.subgroups import (
    Subgroup,
    borel,
    closure,
    preimage,
    sample_slim_subgroups,
)


def test_bound_sequence_examples():
    assert bound_sequence("a_sigma_p", 5, 3) == 1250  # 2*5^4, l = 1
    assert bound_sequence("a_tau_3", 3, 2) == 9
    assert bound_sequence("a_u_p", 5, 2) == 50  # (1/2)*4*(2*5^2 - 5^2)
    # frozen values recomputed by hand from the case-split definitions
    assert bound_sequence("a_sigma_p", 19, 2) == 2 * 19**2
    assert bound_sequence("a_sigma_p", 5, 4) == 58 * 125
    assert bound_sequence("a_tau_p", 7, 3) == 2 * 7**4
    assert bound_sequence("a_tau_3", 3, 6) == 13 * 3**6
    assert bound_sequence("a_u_p", 3, 6) == 17 * 3**6
    assert bound_sequence("a_u_2", 2, 11) == 11 * 2**12
    assert bound_sequence("a_u_2", 2, 10) == 14 * 2**10
    assert bound_sequence("a_sigma_2", 2, 3) == 8
    assert bound_sequence("a_sigma_2", 2, 4) == 32
    assert bound_sequence("a_sigma_2", 2, 10) == 72 * 2**8
    assert bound_sequence("a_sigma_2", 2, 11) == 11 * 2**12
    assert bound_sequence("a_tau_2", 2, 10) == 5 * 2**12
    assert bound_sequence("b_u_2", 2, 4) == 16
    assert bound_sequence("b_u_2", 2, 5) == 64
    assert bound_sequence("b_u_2", 2, 9) == 7 * 2**10


def test_bound_sequence_domains():
    with pytest.raises(PreconditionError):
        bound_sequence("a_tau_p", 3, 2)
    with pytest.raises(PreconditionError):
        bound_sequence("a_u_2", 2, 5)
    with pytest.raises(PreconditionError):
        bound_sequence("a_sigma_2", 2, 2)
    with pytest.raises(PreconditionError):
        bound_sequence("a_tau_2", 2, 4)
    with pytest.raises(PreconditionError):
        bound_sequence("b_u_2", 2, 3)
    with pytest.raises(PreconditionError):
        bound_sequence("a_sigma_p", 2, 4)
    with pytest.raises(ValueError):
        bound_sequence("a_nonsense", 3, 3)


def test_bound_sequences_are_nonnegative_integers():
    domains = {
        "a_sigma_p": [(p, n) for p in (3, 5, 7, 11) for n in range(2, 13)],
        "a_tau_p": [(p, n) for p in (5, 7, 11) for n in range(2, 13)],
        "a_tau_3": [(3, n) for n in range(2, 13)],
        "a_u_p": [(p, n) for p in (3, 5, 7) for n in range(2, 13)],
        "a_u_2": [(2, n) for n in range(6, 13)],
        "a_sigma_2": [(2, n) for n in range(3, 13)],
        "a_tau_2": [(2, n) for n in range(5, 13)],
        "b_u_2": [(2, n) for n in range(4, 13)],
    }
    assert set(domains) == set(BOUND_KINDS)
    for kind, grid in domains.items():
        for p, n in grid:
            v = bound_sequence(kind, p, n)
            assert isinstance(v, int) and v >= 0


def test_lemma71_positivity_threshold():
    for p in [q for q in range(5, 51) if all(q % d for d in range(2, q))]:
        assert (Fraction(p * p - 7 * p - 164, (p - 1) * p) > 0) == (p >= 17)


def test_exponent_tables():
    assert n_upper_bound(23) == 0 and n_upper_bound(29) == 0
    assert n_upper_bound(19) == n_upper_bound(11) == 1
    assert n_upper_bound(7) == 2 and n_upper_bound(5) == 3
    assert n_upper_bound(3) == 5 and n_upper_bound(2) == 11
    assert n_prime(2) == 10 and n_prime(3) == 5 and n_prime(23) == 0


def test_check_slim_bound_trivial_and_cyclic():
    ctx = make_ctx(3, 2)
    trivial = closure([], ctx)
    for ref in (ConjClassRef(ctx, "sigma"), ConjClassRef(ctx, "tau"), u_power_ref(ctx, 0)):
        assert check_slim_bound(trivial, ref)
    u_cyc = closure([upper_u(ctx)], ctx)
    assert check_slim_bound(u_cyc, u_power_ref(ctx, 0))


def test_slim_bound_rejects_non_slim_and_level_one():
    ctx = make_ctx(3, 2)
    from sl2genus.subgroups import full_group

    with pytest.raises(PreconditionError):
        slim_bound_report(full_group(ctx), ConjClassRef(ctx, "sigma"))
    c5 = make_ctx(5, 1)
    with pytest.raises(PreconditionError):
        slim_bound_report(borel(5), ConjClassRef(c5, "sigma"))


def test_slim_bounds_on_preimage_layers():
    # the largest slim subgroups: B-preimage intersected with the slim cap
    ctx = make_ctx(5, 2)
    rng = random.Random(23)
    subs = sample_slim_subgroups(ctx, 15, rng, mod_p_target=borel(5))
    assert subs
    for h in subs:
        for ref in (ConjClassRef(ctx, "sigma"), ConjClassRef(ctx, "tau"), u_power_ref(ctx, 0)):
            rep = slim_bound_report(h, ref)
            assert rep.ok, rep.checks


def test_bounds_are_not_vacuous():
    # negative control: the full group's class counts break the slim bound,
    # so the inequalities genuinely depend on slimness
    ctx = make_ctx(3, 2)
    from sl2genus.groups import class_codes, conj_class_size_formula

    full_count = conj_class_size_formula(ConjClassRef(ctx, "sigma"))  # 54
    level1 = conj_class_size_formula(ConjClassRef(make_ctx(3, 1), "sigma"))  # 6
    rhs = bound_sequence("a_sigma_p", 3, 2) + 3 * (level1 - 2)
    assert full_count > rhs  # 54 > 30


def test_fiber_lemma_shadows():
    ctx = make_ctx(3, 3)
    rng = random.Random(31)
    subs = sample_slim_subgroups(ctx, 10, rng)
    assert subs
    for h in subs:
        for ref in (ConjClassRef(ctx, "sigma"), ConjClassRef(ctx, "tau"), u_power_ref(ctx, 0)):
            assert fiber_image_bound_check(h, ref, 1, 1)
            assert fiber_count_bound_check(h, ref, 1, 0)
            assert fiber_count_bound_check(h, ref, 1, 1)


def test_section7_case_ids_cover_spec_set():
    ids = set(section7_case_ids())
    for want in (
        "L7.1",
        "P7.2",
        "P7.3",
        "P7.4:B",
        "P7.4:E",
        "P7.5:B",
        "P7.5:C",
        "P7.5:D",
        "P7.5:E",
        "P7.8",
        "P7.9:B",
        "P7.9:D",
        "P7.9:E",
        "P7.10:B",
        "P7.10:C",
        "P7.10:D",
        "P7.10:SL",
        "P7.11",
        "P7.12:F",
        "P7.12:SL",
    ):
        assert want in ids


def test_section7_verdicts():
    for cid in section7_case_ids():
        rep = verify_section7(cid)
        if cid == "P7.8":
            assert rep.verdict == "positive_but_differs"
            assert rep.recomputed_value == rep.printed_value > 0
            assert "p^3" in rep.notes and "p^(n-1)" in rep.notes
        else:
            assert rep.verdict == "match", (cid, rep.notes)
            assert rep.recomputed_value == rep.printed_value > 0


def test_section7_key_fractions():
    assert verify_section7("P7.2").printed_value == Fraction(1805 - 74 - 1083, 5 * 19**2)
    assert verify_section7("P7.3").printed_value == Fraction(867 - 33 - 578, 3 * 17**2)
    rep = verify_section7("P7.4:B")
    branch = dict(rep.inequality_chain)
    assert branch["Vu branch: printed"] == Fraction(1183 - 75 - 100 - 546, 7 * 13**2)
    assert branch["no-Vu branch: printed"] == Fraction(1183 - 75 - 100 - 582, 7 * 13**2)
    assert verify_section7("P7.12:SL").printed_value == Fraction(512 - 73 - 80 - 248, 2**9)
    assert verify_section7("L7.1:19").printed_value == Fraction(19 * 19 - 7 * 19 - 164, 18 * 19)


def test_section7_unknown_case():
    with pytest.raises(KeyError):
        verify_section7("P9.9")
    with pytest.raises(KeyError):
        verify_section7("L7.1:13")


def test_case_report_json():
    import json

    rep = verify_section7("P7.2")
    payload = json.loads(json.dumps(rep.to_json_dict(), sort_keys=True))
    assert payload["printed"] == {"num": "648", "den": "1805"}
    assert payload["verdict"] == "match"


def test_desk_part_arguments():
    with pytest.raises(ValueError):
        verify_main_theorem_desk(0)
    with pytest.raises(ValueError):
        verify_main_theorem_desk(8)


def test_desk_smoke_parts_6_7():
    for part in (6, 7):
        for r in verify_main_theorem_desk(part, samples=4):
            assert r.status == "pass", (r.label, r.notes)
