import random

import pytest

import corpus as K
from etale.bases import (
    Bun,
    FinLocP,
    FinPosP,
    FinSetP,
    Lattice,
    LocalAtlas,
    Poset,
    atlas_of_lh,
    check_pullback,
    compose_lh,
    counit,
    delta,
    gamma,
    glue,
    is_local_homeomorphism,
    is_sheaf,
    iso_over,
    lh_decomposition,
    lh_glue,
    pullback_lh,
    random_atlas,
    set_of_size,
    sheafification_matches_glueing,
    sheafify,
    singleton_families,
    two_point_nonsheaf,
    validate_atlas,
    validate_base,
    validate_presheaf,
)
from etale.rcat import StructureError

SET, POS = FinSetP(), FinPosP()
V = Poset.make([0, 1, 2], [(0, 1), (0, 2)])
CHAIN = Poset.chain(2)


def totals(b, A, X):
    return [p for p in b.hom(A, X) if b.is_total(p)]


def test_poset_closure_and_errors():
    P = Poset.make([0, 1, 2], [(0, 1), (1, 2)])
    assert P.le(0, 2)
    with pytest.raises(StructureError):
        Poset.make([0, 1], [(0, 1), (1, 0)])
    with pytest.raises(StructureError):
        Poset.make([0], [(0, 5)])


def test_partial_maps_need_downclosed_domains():
    with pytest.raises(StructureError):
        POS.mor(CHAIN, CHAIN, {1: 1})
    assert POS.mor(CHAIN, CHAIN, {0: 0}).domain == frozenset({0})
    with pytest.raises(StructureError):
        POS.mor(CHAIN, CHAIN, {0: 1, 1: 0})


def test_hom_sizes():
    # partial functions 2 → 3: (3+1)^2
    assert len(SET.hom(set_of_size(2), set_of_size(3))) == 16
    # partial monotone maps on the chain: ∅, {0↦0}, {0↦1}, three total
    assert len(POS.hom(CHAIN, CHAIN)) == 6


def test_nondistributive_lattice_rejected():
    with pytest.raises(StructureError):
        FinLocP().admit(Lattice.m3())


def test_locale_points_round_trip():
    L = FinLocP()
    A, B = Lattice.of_downsets(V), Lattice.of_downsets(CHAIN)
    for x in (A, B):
        L.admit(x)
    for f in L.hom(A, B):
        g = L.to_points(f)
        assert L.from_points(A, B, g) == f


@pytest.mark.parametrize("b", [SET, POS], ids=["finset", "finpos"])
def test_lh_fast_route_matches_decomposition(b):
    objs = [b.make_object(Poset.discrete(range(n))) for n in range(3)]
    if b is POS:
        objs += [CHAIN, V]
    n = 0
    for A in objs:
        for X in objs:
            for p in totals(b, A, X):
                assert b.lh_by_points(p) == (lh_decomposition(b, p) is not None)
                n += 1
    assert n > 10


def test_lh_fast_route_matches_in_locales():
    L = FinLocP()
    objs = [Lattice.of_downsets(P) for P in (Poset.discrete([]), Poset.discrete([0]), Poset.discrete([0, 1]), CHAIN, V)]
    for x in objs:
        L.admit(x)
    for A in objs:
        for X in objs:
            for p in totals(L, A, X):
                assert L.lh_by_points(p) == (lh_decomposition(L, p) is not None)


def test_chain_collapse_is_not_etale():
    pt = Poset.discrete([0])
    p = POS.mor(CHAIN, pt, {0: 0, 1: 0})
    assert not is_local_homeomorphism(POS, p)
    q = POS.mor(Poset.discrete([0, 1]), pt, {0: 0, 1: 0})
    assert is_local_homeomorphism(POS, q)


@pytest.mark.parametrize("name", ["finset", "finpos", "finloc", "bundle"])
def test_validate_base_samples(name):
    if name == "finset":
        b, sample = SET, [set_of_size(n) for n in range(3)]
    elif name == "finpos":
        b, sample = POS, [Poset.discrete([]), Poset.discrete([0]), CHAIN]
    elif name == "finloc":
        b = FinLocP()
        sample = [Lattice.of_downsets(P) for P in (Poset.discrete([0]), CHAIN)]
    else:
        b = Bun(SET)
        sample = [b.bundle(SET.mor(set_of_size(2), set_of_size(1), {0: 0, 1: 0})),
                  b.bundle(SET.identity(set_of_size(1)))]
    assert validate_base(b, sample, atlases=2, seed=3).ok


def test_atlas_validation():
    X = K.X2
    one, e0, e1 = SET.identity(X), SET.idem(X, frozenset({0})), SET.idem(X, frozenset({1}))
    assert validate_atlas(SET, LocalAtlas(X, (0, 1), {(0, 0): one, (1, 1): one, (0, 1): e0, (1, 0): e0})).ok
    asym = LocalAtlas(X, (0, 1), {(0, 0): one, (1, 1): one, (0, 1): e0, (1, 0): e1})
    assert not validate_atlas(SET, asym).ok
    with pytest.raises(StructureError):
        glue(SET, asym)
    bad = LocalAtlas(X, (0, 1, 2), {(i, j): (one if i == j else (e0 if {i, j} != {0, 2} else SET.idem(X, frozenset())))
                                    for i in range(3) for j in range(3)})
    assert any(v.law == "atlas cocycle" for v in validate_atlas(SET, bad).violations)


def test_glue_two_point_atlas():
    X = K.X2
    one, e0 = SET.identity(X), SET.idem(X, frozenset({0}))
    g = glue(SET, LocalAtlas(X, ("a", "b"), {("a", "a"): one, ("b", "b"): one, ("a", "b"): e0, ("b", "a"): e0}))
    assert len(SET.dom(g.p)) == 3
    # the two sheets agree over 0 only
    sa, sb = g.sections["a"], g.sections["b"]
    assert sa(0) == sb(0) and sa(1) != sb(1)


def test_pullback_and_composite():
    rng = random.Random(1)
    X = set_of_size(2)
    at = random_atlas(SET, X, 2, rng)
    g = glue(SET, at)
    f = SET.mor(set_of_size(3), X, {0: 0, 1: 1, 2: 1})
    sq = pullback_lh(SET, g, f)
    assert check_pullback(SET, sq, [set_of_size(n) for n in range(3)]).ok
    q = lh_glue(SET, SET.identity(g.apex))
    basis, atlas, pq = compose_lh(SET, g, q)
    gg = glue(SET, atlas)
    assert iso_over(SET, gg.p, pq)


def test_singleton_families_biject_with_sections():
    g = glue(SET, random_atlas(SET, set_of_size(3), 2, random.Random(5)))
    sf = singleton_families(SET, g.p, [g.sections[i] for i in g.index])
    fams = sf.families()
    secs = SET.sections(g.p)
    assert len(fams) == len(secs)
    assert {sf.from_family(t) for t in fams} == set(secs)
    assert all(sf.from_family(sf.to_family(s)) == s for s in secs)


def test_sheaf_round_trips():
    for n in range(3):
        X = set_of_size(n)
        for A in (set_of_size(k) for k in range(3)):
            for p in totals(SET, A, X):
                G = gamma(SET, p)
                assert validate_presheaf(G).ok and is_sheaf(G)
                assert delta(SET, G).bijective
                assert counit(SET, p).iso


def test_nonsheaf_and_sheafification():
    A = two_point_nonsheaf(SET)
    assert validate_presheaf(A).ok and not is_sheaf(A)
    d = delta(SET, A)
    assert d.injective and not d.surjective and len(d.missing) == 1
    sh = sheafify(SET, A)
    assert len(sh.sheaf.carrier) == 4 and is_sheaf(sh.sheaf)
    assert sheafification_matches_glueing(SET, A)


def test_atlas_round_trip_random():
    rng = random.Random(11)
    for _ in range(20):
        X = set_of_size(rng.randint(0, 3))
        at = random_atlas(SET, X, rng.randint(1, 3), rng)
        g = glue(SET, at)
        assert atlas_of_lh(SET, g.p, g.summands) == at


def test_bundle_opens_come_from_the_base():
    B = Bun(SET)
    xi = B.bundle(SET.mor(set_of_size(2), set_of_size(2), {0: 0, 1: 0}))
    # restriction idempotents are opens of the base pulled back to the top
    assert len(B.idempotents(xi)) == len(SET.idempotents(set_of_size(2)))
    totals_ = [f for f in B.hom(xi, xi) if B.is_total(f)]
    assert B.identity(xi) in totals_
