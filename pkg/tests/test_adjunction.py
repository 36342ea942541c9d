import pytest

import corpus as K
from etale.adjunction import (
    MapOverBase,
    Square,
    adjunction_unit,
    diagonal_filler,
    externalize,
    externalize_map,
    factorize,
    fneq,
    internalize,
    internalize_map,
    reflector_explicit,
    triangle_phi,
    triangle_psi,
)
from etale.partite import validate_cofunctor, validate_pcat
from etale.rcat import RFunctor, StructureError, analyze_rfun, identity_functor, validate_rcat

SET = K.SET
FUNCTORS = K.functor_corpus()
PCATS = K.pcat_corpus()


def test_internalize_i2_has_four_germs():
    psi = internalize(FUNCTORS[0][1])
    x = psi.pcat
    assert len(x.arr[K.X2, K.X2]) == 4
    r = validate_pcat(x)
    assert r.ok and r.source_etale


def test_externalize_swap_has_nine_sections():
    E = externalize(K.swap_category())
    assert len(E.source.mors) == 9
    assert validate_rcat(E.source).ok
    assert analyze_rfun(E).hyperconnected


def test_fneq_for_swap():
    _, F, _ = FUNCTORS[2]
    assert fneq(F, "e", "s") == SET.join([], K.X2, K.X2)
    assert fneq(F, "s", "s") == SET.identity(K.X2)


@pytest.mark.parametrize("name,F,_", FUNCTORS, ids=[n for n, _, _ in FUNCTORS])
def test_triangle_psi(name, F, _):
    assert triangle_psi(F)


@pytest.mark.parametrize("name,x,_", PCATS, ids=[n for n, _, _ in PCATS])
def test_triangle_phi(name, x, _):
    assert triangle_phi(x)


def test_unit_is_map_over_base():
    for _, F, _ in FUNCTORS:
        u = adjunction_unit(F)
        assert u.map.check()


def test_internalize_map_of_inclusion():
    # I2 ⊂ PE2 over the base
    P = FUNCTORS[0][1]
    Q = FUNCTORS[1][1]
    F = RFunctor(P.source, Q.source, {K.X2: K.X2}, {f: f for f in P.source.mors})
    m = MapOverBase(F, P, Q, {K.X2: SET.identity(K.X2)})
    assert m.check()
    c = internalize_map(m)
    assert validate_cofunctor(c).ok
    back = externalize_map(c)
    assert back.check()


def test_reflector_of_swap():
    r = reflector_explicit(FUNCTORS[2][1])
    assert len(r.over.source.mors) == 9


def test_factorize_rejects_non_join():
    _, F, _ = FUNCTORS[2]
    C = K.cat2()
    G = RFunctor(F.source, C, dict(F.obj), dict(F.mor))
    with pytest.raises(StructureError):
        factorize(G)


def test_filler_rejects_noncommuting_square():
    name, F = K.join_functor_corpus()[0]
    fz = factorize(F)
    C = F.target
    const = RFunctor(fz.middle, C, dict(fz.H.obj), {g: C.identity(K.X2) for g in fz.middle.mors})
    with pytest.raises(StructureError):
        diagonal_filler(Square(fz.L, fz.H, fz.L, const), verify_flags=False)


def test_factorization_of_hyperconnected_is_iso_on_left():
    # F itself hyperconnected: the left factor is an isomorphism
    _, F = K.join_functor_corpus()[1]
    fz = factorize(F)
    assert len(fz.middle.mors) == len(F.source.mors)
    assert analyze_rfun(identity_functor(fz.middle)).localic
