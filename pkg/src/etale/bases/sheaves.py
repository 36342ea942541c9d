"""Presheaves on an object, sections Γ, glueing Δ, and sheafification."""

from __future__ import annotations

from dataclasses import dataclass

from ..rcat import Report, StructureError
from .core import GlueResult, LocalAtlas, glue, induced_map_to, sheq_in


@dataclass
class Presheaf:
    """A set with a right action of O(X) and an extent map into O(X)."""

    base: object
    X: object
    carrier: tuple
    act: dict  # (a, e) -> a·e
    extent: dict  # a -> e

    def __post_init__(self):
        self.carrier = tuple(self.carrier)

    def dot(self, a, e):
        return self.act[a, e]

    def leq(self, a, b):
        return a == self.act[b, self.extent[a]]

    def compatible(self, a, b):
        return self.act[a, self.extent[b]] == self.act[b, self.extent[a]]

    def eq(self, a, b):
        """⋁{e ≤ ext(a)ext(b) : a·e = b·e}."""
        B, X = self.base, self.X
        bound = B.compose(self.extent[a], self.extent[b])
        es = [e for e in B.idempotents(X) if B.leq(e, bound) and self.act[a, e] == self.act[b, e]]
        return B.join(es, X, X)

    def lub(self, fam):
        ups = [c for c in self.carrier if all(self.leq(a, c) for a in fam)]
        least = [u for u in ups if all(self.leq(u, v) for v in ups)]
        return least[0] if least else None


def validate_presheaf(A: Presheaf) -> Report:
    rep = Report()
    B, X = A.base, A.X
    O = B.idempotents(X)
    one = B.identity(X)
    cs = set(A.carrier)
    for a in A.carrier:
        if A.extent.get(a) not in O:
            rep.add("extent is a restriction idempotent", (a,))
            return rep
        for e in O:
            if A.act.get((a, e)) not in cs:
                rep.add("action is total on carrier × O(X)", (a, e))
                return rep
    for a in A.carrier:
        if A.act[a, one] != a:
            rep.add("unital action", (a,))
        if A.act[a, A.extent[a]] != a:
            rep.add("a·ext(a) = a", (a,))
        for e in O:
            if A.extent[A.act[a, e]] != B.compose(A.extent[a], e):
                rep.add("ext(a·e) = ext(a)e", (a, e))
            for d in O:
                if A.act[A.act[a, e], d] != A.act[a, B.compose(e, d)]:
                    rep.add("associative action", (a, e, d))
    return rep


def compatible_families(A: Presheaf):
    els = list(A.carrier)
    n = len(els)
    comp = [[A.compatible(els[i], els[j]) for j in range(n)] for i in range(n)]
    out = [()]

    def grow(cur, start):
        for k in range(start, n):
            if all(comp[k][j] for j in cur):
                nxt = cur + (k,)
                out.append(tuple(els[j] for j in nxt))
                grow(nxt, k + 1)

    grow((), 0)
    return out


def sheaf_witness(A: Presheaf):
    """A compatible family without a join, or None if A is a sheaf."""
    for fam in compatible_families(A):
        if A.lub(fam) is None:
            return fam
    return None


def is_sheaf(A: Presheaf) -> bool:
    return sheaf_witness(A) is None


# ------------------------------------------------------------------ Γ and Δ


def gamma(base, p) -> Presheaf:
    """Partial sections of a total map, acted on by precomposition."""
    if not base.is_total(p):
        raise StructureError("sections are taken of a total map")
    X = base.cod(p)
    secs = base.sections(p)
    O = base.idempotents(X)
    act = {(s, e): base.compose(s, e) for s in secs for e in O}
    ext = {s: base.restrict(s) for s in secs}
    return Presheaf(base, X, secs, act, ext)


@dataclass
class DeltaResult:
    glued: GlueResult
    unit: dict  # a -> s_a
    injective: bool
    surjective: bool
    missing: tuple = ()

    @property
    def bijective(self):
        return self.injective and self.surjective


def delta(base, A: Presheaf) -> DeltaResult:
    """Glue the atlas φ_ab = ⟦a=b⟧ and report on the unit a ↦ s_a."""
    idx = tuple(A.carrier)
    phi = {(a, b): A.eq(a, b) for a in idx for b in idx}
    g = glue(base, LocalAtlas(A.X, idx, phi))
    unit = {a: g.sections[a] for a in idx}
    img = set(unit.values())
    secs = base.sections(g.p)
    missing = tuple(s for s in secs if s not in img)
    return DeltaResult(g, unit, len(img) == len(idx), not missing, missing)


def check_unit_is_presheaf_map(base, A: Presheaf, d: DeltaResult) -> bool:
    for a in A.carrier:
        s = d.unit[a]
        if base.restrict(s) != A.extent[a]:
            return False
        for e in base.idempotents(A.X):
            if base.compose(s, e) != d.unit[A.act[a, e]]:
                return False
    return True


@dataclass
class CounitResult:
    glued: GlueResult
    map: object  # ΔΓp → dom p
    iso: bool


def counit(base, p) -> CounitResult:
    """The comparison ΔΓp → A over X, and whether it is invertible."""
    G = gamma(base, p)
    d = delta(base, G)
    g = d.glued
    A = base.dom(p)
    if g.index:
        h = induced_map_to(base, g, {s: s for s in g.index}, A)
    else:
        h = base.join([], g.apex, A)
    hi = base.partial_inverse(h)
    iso = base.is_total(h) and hi is not None and base.is_total(hi)
    return CounitResult(g, h, iso)


# ------------------------------------------------------------ sheafification


@dataclass
class Sheafification:
    sheaf: Presheaf
    unit: dict


def sheafify(base, A: Presheaf) -> Sheafification:
    """Families (θ_a) with θ_bθ_a ≤ ⟦a=b⟧ and θ_b⟦a=b⟧ ≤ θ_a."""
    B, X = base, A.X
    O = B.idempotents(X)
    els = list(A.carrier)
    n = len(els)
    E = [[A.eq(els[i], els[j]) for j in range(n)] for i in range(n)]
    fams = []

    def ok_pair(ti, tj, e_ij):
        return (B.leq(B.compose(tj, ti), e_ij)
                and B.leq(B.compose(tj, e_ij), ti)
                and B.leq(B.compose(ti, e_ij), tj))

    def rec(k, cur):
        if k == n:
            fams.append(tuple(cur))
            return
        for t in O:
            if not B.leq(t, E[k][k]):
                continue
            if all(ok_pair(cur[j], t, E[j][k]) for j in range(k)):
                rec(k + 1, cur + [t])

    rec(0, [])
    act = {(th, e): tuple(B.compose(t, e) for t in th) for th in fams for e in O}
    ext = {th: B.join(list(th), X, X) for th in fams}
    S = Presheaf(B, X, tuple(fams), act, ext)
    unit = {b: tuple(A.eq(a, b) for a in els) for b in els}
    return Sheafification(S, unit)


def presheaf_iso(A: Presheaf, Bp: Presheaf, phi: dict) -> bool:
    """Whether the given function is an isomorphism of presheaves."""
    if set(phi) != set(A.carrier) or set(phi.values()) != set(Bp.carrier) or len(set(phi.values())) != len(phi):
        return False
    for a in A.carrier:
        if Bp.extent[phi[a]] != A.extent[a]:
            return False
        for e in A.base.idempotents(A.X):
            if phi[A.act[a, e]] != Bp.act[phi[a], e]:
                return False
    return True


def sheafification_matches_glueing(base, A: Presheaf) -> bool:
    """ΓΔA and the family description agree via s ↦ (⟦s = s_a⟧)_a."""
    sh = sheafify(base, A)
    d = delta(base, A)
    G = gamma(base, d.glued.p)
    phi = {s: tuple(sheq_in(base, s, d.unit[a]) for a in A.carrier) for s in G.carrier}
    return presheaf_iso(G, sh.sheaf, phi)


# -------------------------------------------------------------- generators


def subpresheaf(A: Presheaf, gens) -> Presheaf:
    """Closure of a set of elements under the action."""
    O = A.base.idempotents(A.X)
    S = set(gens)
    frontier = list(S)
    while frontier:
        a = frontier.pop()
        for e in O:
            b = A.act[a, e]
            if b not in S:
                S.add(b)
                frontier.append(b)
    car = tuple(x for x in A.carrier if x in S)
    return Presheaf(A.base, A.X, car,
                    {(a, e): A.act[a, e] for a in car for e in O},
                    {a: A.extent[a] for a in car})


def doubled_globals(A: Presheaf) -> Presheaf:
    """Two copies of every element of full extent, sharing all proper restrictions."""
    B, X = A.base, A.X
    O = B.idempotents(X)
    one = B.identity(X)
    glob = [a for a in A.carrier if A.extent[a] == one]
    car = list(A.carrier) + [("copy", a) for a in glob]
    act, ext = {}, {}
    for a in A.carrier:
        ext[a] = A.extent[a]
        for e in O:
            act[a, e] = A.act[a, e]
    for a in glob:
        c = ("copy", a)
        ext[c] = one
        for e in O:
            act[c, e] = c if e == one else A.act[a, e]
    return Presheaf(B, X, tuple(car), act, ext)


def two_point_nonsheaf(base):
    """Over X = {0,1}: ⊥ and one element over each point, with no glued element."""
    X = frozenset({0, 1})
    O = base.idempotents(X)
    dom = lambda e: e.domain
    ext = {"⊥": base.idem(X, frozenset()), "a": base.idem(X, frozenset({0})), "b": base.idem(X, frozenset({1}))}
    act = {}
    for k, u in ext.items():
        for e in O:
            d = dom(u) & dom(e)
            act[k, e] = {frozenset(): "⊥", frozenset({0}): "a", frozenset({1}): "b"}[d]
    return Presheaf(base, X, ("⊥", "a", "b"), act, ext)
