"""Property tests: laws that must hold on every generated instance."""

import itertools
import random

from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from etale.adjunction import adjunction_counit, adjunction_unit, monoid_rcat, over_base
from etale.bases import (
    FinPosP,
    FinSetP,
    Poset,
    atlas_of_lh,
    delta,
    gamma,
    glue,
    is_sheaf,
    lh_decomposition,
    random_atlas,
    set_of_size,
    sheafification_matches_glueing,
    sheafify,
    subpresheaf,
)
from etale.partite import action_category
from etale.rcat import is_hyperconnected, is_join_restriction

SET, POS = FinSetP(), FinPosP()
FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

sizes = st.integers(min_value=0, max_value=3)


@st.composite
def partial_maps(draw, a, b):
    A, B = set_of_size(a), set_of_size(b)
    g = {}
    for x in sorted(A):
        y = draw(st.one_of(st.none(), st.integers(0, b - 1))) if b else None
        if y is not None:
            g[x] = y
    return SET.mor(A, B, g)


@st.composite
def composable_triples(draw):
    a, b, c, d = (draw(sizes) for _ in range(4))
    return draw(partial_maps(a, b)), draw(partial_maps(b, c)), draw(partial_maps(c, d))


@FAST
@given(composable_triples())
def test_restriction_laws_on_partial_maps(t):
    f, g, h = t
    r = SET.restrict
    c = SET.compose
    assert c(f, r(f)) == f
    assert c(h, c(g, f)) == c(c(h, g), f)
    assert c(r(g), f) == c(f, r(c(g, f)))
    e = r(f)
    k = SET.mor(SET.dom(f), SET.dom(f), {x: x for x in e.domain})
    assert c(r(k), r(f)) == c(r(f), r(k))
    assert r(c(k, r(f))) == c(r(k), r(f))


def germ_count(at):
    pts = {(i, x) for i in at.index for x in at.phi[i, i].domain}
    parent = {p: p for p in pts}

    def find(p):
        while parent[p] != p:
            p = parent[p]
        return p

    for (i, x), (j, y) in itertools.product(pts, repeat=2):
        if x == y and x in at.phi[i, j].domain:
            parent[find((i, x))] = find((j, y))
    return len({find(p) for p in pts})


@FAST
@given(st.integers(0, 3), st.integers(1, 3), st.integers(0, 10**6))
def test_glue_matches_germ_oracle(n, k, seed):
    at = random_atlas(SET, set_of_size(n), k, random.Random(seed))
    g = glue(SET, at)
    assert len(SET.dom(g.p)) == germ_count(at)
    assert atlas_of_lh(SET, g.p, g.summands) == at


@st.composite
def posets(draw, max_n=3):
    n = draw(st.integers(0, max_n))
    pairs = [(a, b) for a in range(n) for b in range(n) if a < b]
    rel = [p for p in pairs if draw(st.booleans())]
    return Poset.make(range(n), rel)


@FAST
@given(posets(), posets(2))
def test_etale_iff_discrete_fibration(A, X):
    for p in POS.hom(A, X):
        if POS.is_total(p):
            assert POS.lh_by_points(p) == (lh_decomposition(POS, p) is not None)


@FAST
@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 10**6))
def test_sheafification_is_a_sheaf(n, m, seed):
    rng = random.Random(seed)
    X, A = set_of_size(n), set_of_size(m)
    ps = [p for p in SET.hom(A, X) if SET.is_total(p)]
    if not ps:
        return
    G = gamma(SET, rng.choice(ps))
    gens = rng.sample(list(G.carrier), min(len(G.carrier), rng.randint(1, 3)))
    S = subpresheaf(G, gens)
    assert delta(SET, S).bijective == is_sheaf(S)
    assert is_sheaf(sheafify(SET, S).sheaf)
    assert sheafification_matches_glueing(SET, S)


def closure(gens, n):
    ident = tuple(range(n))
    els = {ident} | set(gens)
    while True:
        new = {tuple(g[f[x]] for x in range(n)) for g in els for f in els} - els
        if not new:
            return sorted(els)
        els |= new


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.lists(st.integers(0, 26), max_size=2))
def test_action_fixpoints(n, codes):
    gens = [tuple((c // n**x) % n for x in range(n)) for c in codes]
    els = closure(gens, n)
    # the counit on larger actions is costly; small ones exercise both branches
    assume(len(els) * n <= 6)
    ident = tuple(range(n))
    mul = {(g, f): tuple(g[f[x]] for x in range(n)) for g in els for f in els}
    M = monoid_rcat(els, ident, mul)
    X = set_of_size(n)
    P = over_base(M, SET, {"•": X}, {m: SET.mor(X, X, dict(enumerate(m))) for m in els})
    u = adjunction_unit(P)
    assert u.iso_direct == (is_join_restriction(M) and is_hyperconnected(P))
    act = {(m, x): m[x] for m in els for x in range(n)}
    x = action_category(SET, els, ident, mul, X, act)
    c = adjunction_counit(x)
    assert c.iso_direct and c.iso_criterion
