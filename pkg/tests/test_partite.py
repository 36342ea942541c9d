import pytest

import corpus as K
from etale.partite import (
    PartiteCategory,
    compose_cofunctors,
    cofunctors_equal,
    empty_pcat,
    identity_cofunctor,
    identity_functor,
    monoid_category,
    one_point,
    partite_isomorphism,
    try_inverses,
    validate_cofunctor,
    validate_functor,
    validate_pcat,
)

SET = K.SET


@pytest.mark.parametrize("name,x,etale", K.pcat_corpus(), ids=[n for n, _, _ in K.pcat_corpus()])
def test_corpus_is_valid(name, x, etale):
    r = validate_pcat(x)
    assert r.ok, r.report.violations[:2]
    assert r.source_etale == etale


def test_corrupted_multiplication_detected():
    Z = monoid_category(SET, *K.Z3)
    mu = Z.mu["•", "•", "•"]
    graph = dict(mu.map)
    key = sorted(graph, key=repr)[1]
    later, earlier = key
    graph[key] = ((later[0] + earlier[0] + 1) % 3, "*")
    bad = PartiteCategory(SET, Z.I, Z.obj, Z.arr, Z.sigma, Z.tau, Z.eta, {("•", "•", "•"): SET.mor(mu.src, mu.tgt, graph)})
    r = validate_pcat(bad)
    assert not r.ok
    assert all(v.witness for v in r.report.violations)


def test_corrupted_source_detected():
    A = K.swap_category()
    sig = A.sigma["•", "•"]
    g = dict(sig.map)
    g[("s", 0)] = 1
    bad = PartiteCategory(SET, A.I, A.obj, A.arr, {("•", "•"): SET.mor(sig.src, sig.tgt, g)}, A.tau, A.eta, A.mu)
    assert not validate_pcat(bad).ok


def test_inverses():
    A = K.swap_category()
    g = try_inverses(A)
    assert g is not None and g.is_groupoid
    assert validate_pcat(g).ok
    assert try_inverses(monoid_category(SET, *K.IDEM)) is None


def test_degenerate_categories():
    assert validate_pcat(empty_pcat(SET)).ok
    pt = one_point(SET)
    assert len(SET.carrier(pt)) == 1


def test_cofunctor_identity_laws():
    A = K.swap_category()
    F = identity_cofunctor(A)
    c = validate_cofunctor(F)
    assert c.ok and c.bij_components and c.bij_objects and c.bij_arrows
    assert cofunctors_equal(compose_cofunctors(F, F), F)


def test_identity_functor_is_covering():
    for _, x, _ in K.pcat_corpus():
        assert validate_functor(identity_functor(x)).covering


def test_isomorphism_search():
    A = K.swap_category()
    assert partite_isomorphism(A, A) is not None
    assert partite_isomorphism(A, monoid_category(SET, *K.Z2)) is None
    Z = monoid_category(SET, *K.Z3)
    # relabelled copy of Z/3
    W = monoid_category(SET, ("a", "b", "c"), "a",
                        {(x, y): "abc"[("abc".index(x) + "abc".index(y)) % 3] for x in "abc" for y in "abc"})
    assert partite_isomorphism(Z, W) is not None


def test_pair_category_is_not_a_groupoid_in_posets():
    x = K.pair_category()
    assert not validate_pcat(x).source_etale
    # the codiscrete version on an antichain is a groupoid
    assert try_inverses(K.codiscrete_pair()) is not None
