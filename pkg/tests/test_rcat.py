import pytest

import corpus as K
from etale.adjunction import monoid_rcat
from etale.rcat import (
    BudgetExceeded,
    RCat,
    RFunctor,
    StructureError,
    analyze_rfun,
    classify,
    enumerate_functors,
    find_isomorphism,
    identity_functor,
    is_inverse,
    is_join_restriction,
    jr_completion,
    jr_counit,
    piso_subcategory,
    sheq,
    subcategory,
    validate_rcat,
)


def by_name(c):
    return {str(f): f for f in c.mors}


def test_partial_endos_of_two_points():
    C = K.cat2()
    assert len(C.mors) == 9
    assert validate_rcat(C).ok
    assert classify(C).as_dict() == {"inverse": False, "etale": True, "join_restriction": True}


def test_partial_isos():
    I = K.i2()
    assert len(I.mors) == 7 and is_inverse(I)
    assert not is_join_restriction(I)
    assert classify(I).as_dict()["inverse"]


def test_restriction_order():
    C = K.cat2()
    m = by_name(C)
    assert C.leq(m["{0↦1}"], m["{0↦1,1↦0}"])
    assert not C.leq(m["{0↦1,1↦0}"], m["{0↦1}"])
    assert C.compatible(m["{0↦1}"], m["{1↦0}"])
    assert not C.compatible(m["{0↦0,1↦1}"], m["{0↦1,1↦0}"])
    assert C.join([m["{0↦1}"], m["{1↦0}"]]) == m["{0↦1,1↦0}"]


def test_sheq_is_agreement_domain():
    C = K.cat2()
    m = by_name(C)
    assert sheq(C, m["{0↦1,1↦0}"], m["{0↦0,1↦1}"]) == m["{}"]
    assert sheq(C, m["{0↦0,1↦0}"], m["{0↦0,1↦1}"]) == m["{0↦0}"]


def test_dangling_and_missing_entries():
    with pytest.raises(StructureError):
        RCat(["a"], [("f", "a", "b")], {"a": "f"}, {}, {})
    with pytest.raises(StructureError):
        RCat(["a"], [("1", "a", "a")], {"a": "1"}, {}, {"1": "1"})
    with pytest.raises(StructureError):
        RCat(["a"], [("1", "a", "a"), ("1", "a", "a")], {"a": "1"}, {}, {})


def test_join_completion_of_z2():
    J, emb = jr_completion(K.z2_rcat(), "j")
    assert len(J.mors) == 3
    assert validate_rcat(J).ok and is_join_restriction(J)
    assert analyze_rfun(emb).restriction_preserving
    with pytest.raises(StructureError):
        jr_completion(K.z2_rcat(), "jr")
    with pytest.raises(StructureError):
        jr_completion(K.cat2(), "j")


def test_jr_counit():
    J, _ = jr_completion(K.z2_rcat(), "j")
    eps, flags = jr_counit(J)
    assert flags == {"faithful": True, "full": True}
    assert analyze_rfun(eps).restriction_preserving
    # partial isos of two points are not closed under joins
    with pytest.raises(StructureError):
        jr_counit(K.cat2())


def test_identity_functor_flags():
    r = analyze_rfun(identity_functor(K.cat2()))
    assert r.functorial and r.restriction_preserving and r.hyperconnected and r.join_preserving and r.localic


def test_non_functor_detected():
    C = K.cat2()
    m = by_name(C)
    mor = {f: f for f in C.mors}
    mor[m["{0↦1,1↦0}"]] = m["{0↦0,1↦1}"]
    mor[m["{0↦0,1↦0}"]] = m["{0↦1,1↦1}"]
    r = analyze_rfun(RFunctor(C, C, {K.X2: K.X2}, mor))
    assert not r.functorial and r.report.violations


def test_iso_search_and_budget():
    I = K.i2()
    assert find_isomorphism(I, I) is not None
    assert find_isomorphism(I, K.cat2()) is None
    with pytest.raises(BudgetExceeded):
        find_isomorphism(K.cat2(), K.cat2(), budget=1)


def test_z2_automorphisms_of_partial_isos():
    I = K.i2()
    found = enumerate_functors(I, I, {K.X2: K.X2})
    autos = [F for F in found if len(set(F.mor.values())) == len(I.mors)]
    # conjugation by the swap and the identity
    assert len(autos) == 2


def test_subcategory_must_be_closed():
    C = K.cat2()
    m = by_name(C)
    with pytest.raises(StructureError):
        subcategory(C, [m["{0↦0,1↦1}"], m["{0↦1,1↦0}"], m["{0↦1}"]])
    assert len(piso_subcategory(C).mors) == 7


def test_monoid_table():
    M = monoid_rcat(*K.Z3)
    assert validate_rcat(M).ok and is_inverse(M)
