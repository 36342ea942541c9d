"""Haefliger categories, products of local homeomorphisms, full monoids,
the fundamental functor and its localic partite category, coverages and
relative join completions, and inductive groupoids of inverse categories."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ._canon import csorted
from .adjunction import (
    Internalization,
    Sec,
    _basis_join,
    externalize,
    externalize_groupoid,
    internalize,
    monoid_rcat,
    reflector_explicit,
    tau_star,
)
from .bases.core import is_local_homeomorphism
from .bases.finloc import FinLocP, Lattice
from .bases.points import FinPosP, FinSetP, Poset
from .partite import PartiteCategory, action_category, partite_isomorphism, try_inverses, validate_pcat
from .rcat import (
    RCat,
    RFunctor,
    StructureError,
    analyze_rfun,
    enumerate_functors,
    is_inverse,
    piso_subcategory,
)

# ------------------------------------------------------------------ Haefliger


def haefliger(base, sample, mode="category") -> PartiteCategory:
    """Ψ of the identity (or of the partial-iso inclusion) on the sample."""
    sample = list(sample)
    if not sample:
        return PartiteCategory(base, (), {}, {}, {}, {}, {}, {}, name="H(∅)")
    C = base.as_rcat(sample, name="C")
    if mode == "groupoid":
        C = piso_subcategory(C)
    elif mode != "category":
        raise StructureError(f"unknown mode {mode!r}")
    P = RFunctor(C, base, {a: a for a in C.objects}, {f: f for f in C.mors}, name="1")
    x = internalize(P).pcat
    if mode == "groupoid":
        g = try_inverses(x)
        if g is None:
            raise StructureError("Haefliger groupoid has no inverses")
        return g
    return x


@dataclass
class ProductResult:
    obj: object
    proj_a: object
    proj_b: object
    spans_checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def certified(self):
        return not self.failures


def lh_product(base, A, B, sample=()) -> ProductResult:
    """σ, τ out of the Haefliger groupoid arrows, with a brute-force UMP certificate.

    For every W in the sample and every span of local homeomorphisms
    A ← W → B there must be exactly one local homeomorphism W → P over it.
    """
    objs = [A] if A == B else [A, B]
    g = haefliger(base, objs, mode="groupoid")
    P, sig, tau = g.arr[A, B], g.sigma[A, B], g.tau[A, B]
    res = ProductResult(P, sig, tau)
    for W in sample:
        lh = lambda X: [u for u in base.hom(W, X) if base.is_total(u) and is_local_homeomorphism(base, u)]
        us, vs = lh(A), lh(B)
        over = {}
        for h in lh(P):
            over.setdefault((base.compose(sig, h), base.compose(tau, h)), []).append(h)
        for u in us:
            for v in vs:
                res.spans_checked += 1
                n = len(over.get((u, v), ()))
                if n != 1:
                    res.failures.append((W, u, v, n))
    return res


# ----------------------------------------------------------------- full monoids


@dataclass
class MonoidAction:
    elements: tuple
    unit: object
    mul: dict  # (m, n) -> m·n
    X: tuple
    act: dict  # (m, x) -> m·x

    def check(self):
        M, e = self.elements, self.unit
        for m in M:
            if self.mul[e, m] != m or self.mul[m, e] != m:
                raise StructureError("monoid unit law fails")
            for n in M:
                for k in M:
                    if self.mul[self.mul[m, n], k] != self.mul[m, self.mul[n, k]]:
                        raise StructureError("monoid is not associative")
        for x in self.X:
            if self.act[e, x] != x:
                raise StructureError("unit acts non-trivially")
            for m in M:
                for n in M:
                    if self.act[self.mul[m, n], x] != self.act[m, self.act[n, x]]:
                        raise StructureError("action is not associative")
        return self

    def is_group(self):
        return all(any(self.mul[m, n] == self.unit and self.mul[n, m] == self.unit for n in self.elements)
                   for m in self.elements)

    def functor(self, base):
        """The one-object total functor ΣM → FinSetP at X."""
        S = monoid_rcat(self.elements, self.unit, self.mul)
        X = frozenset(self.X)
        mor = {m: base.mor(X, X, {x: self.act[m, x] for x in self.X}) for m in self.elements}
        return RFunctor(S, base, {"•": X}, mor, name="action")


def swap_action():
    M = ("e", "s")
    mul = {("e", "e"): "e", ("e", "s"): "s", ("s", "e"): "s", ("s", "s"): "e"}
    act = {("e", 0): 0, ("e", 1): 1, ("s", 0): 1, ("s", 1): 0}
    return MonoidAction(M, "e", mul, (0, 1), act)


def diagonal_swap_action():
    a = swap_action()
    sw = {0: 1, 1: 0, 2: 3, 3: 2}
    act = {(m, x): (sw[x] if m == "s" else x) for m in a.elements for x in range(4)}
    return MonoidAction(a.elements, "e", a.mul, (0, 1, 2, 3), act)


@dataclass
class FullMonoid:
    action_category: PartiteCategory  # M × X ⇉ X built directly
    internalized: Internalization  # Ψ of the action functor
    external: RFunctor  # Φ of the direct action category
    total: RCat  # U = X part
    full_group: RCat | None
    iso_to_internalized: bool


def section_function(s: Sec):
    """A total section x ↦ (m, x) of M × X → X as the function x ↦ m."""
    return {x: m for x, (m, _) in s.s.graph}


def full_monoid(a: MonoidAction, base=None, want_group=None) -> FullMonoid:
    base = base or FinSetP()
    a.check()
    X = frozenset(a.X)
    direct = action_category(base, a.elements, a.unit, a.mul, X, a.act)
    psi = internalize(a.functor(base))
    iso = partite_isomorphism(direct, psi.pcat) is not None
    ext = externalize(direct, name="Φ(M×X)")
    C = ext.source
    from .rcat import subcategory
    total = subcategory(C, [f for f in C.mors if C.is_total(f)], name="total")
    group = None
    if want_group or (want_group is None and a.is_group()):
        if not a.is_group():
            raise StructureError("full group requested for a monoid that is not a group")
        g = try_inverses(direct)
        eg = externalize_groupoid(g).source
        units = []
        for f in eg.mors:
            fi = eg.partial_inverse(f)
            if eg.is_total(f) and fi is not None and eg.is_total(fi):
                units.append(f)
        group = subcategory(eg, units, name="full group")
    return FullMonoid(direct, psi, ext, total, group, iso)


def check_section_formula(fm: FullMonoid, a: MonoidAction) -> bool:
    """Total sections compose by u(x) = t(s(x)·x) s(x)."""
    C = fm.total
    for s in C.mors:
        for t in C.mors:
            fs, ft = section_function(s), section_function(t)
            fu = section_function(C.compose(t, s))
            for x in a.X:
                if fu[x] != a.mul[ft[a.act[fs[x], x]], fs[x]]:
                    return False
    return True


def full_group_direct(a: MonoidAction) -> int:
    """Count s: X → M with x ↦ s(x)·x bijective."""
    n = 0
    for vals in itertools.product(a.elements, repeat=len(a.X)):
        img = {a.act[m, x] for m, x in zip(vals, a.X)}
        if len(img) == len(a.X):
            n += 1
    return n


# ----------------------------------------------------------- fundamental functor


def idempotent_lattice(A: RCat, i) -> Lattice:
    O = A.idempotents(i)
    return Lattice.make(O, [(d, e) for d in O for e in O if A.leq(d, e)])


def fundamental_functor(A: RCat, loc: FinLocP | None = None) -> RFunctor:
    """O(i) the idempotent lattice; O(f)*(e) = restr(e f)."""
    loc = loc or FinLocP()
    lat = {i: idempotent_lattice(A, i) for i in A.objects}
    for L in lat.values():
        loc.admit(L)
    mor = {}
    for f in A.mors:
        i, j = A.dom(f), A.cod(f)
        mor[f] = loc.mor(lat[i], lat[j], {e: A.restrict(A.compose(e, f)) for e in A.idempotents(j)})
    F = RFunctor(A, loc, lat, mor, name="O")
    rep = analyze_rfun(F)
    if not rep.hyperconnected:
        raise StructureError("fundamental functor is not hyperconnected")
    return F


def localic_partite(A: RCat, loc: FinLocP | None = None) -> tuple[PartiteCategory, dict]:
    """The source-étale partite category in FinLocP built from families θ_f e = θ_{fe}.

    Returns the category and the sections s_f.
    """
    loc = loc or FinLocP()
    I = list(A.objects)
    X = {i: idempotent_lattice(A, i) for i in I}
    arr, sig, tau, secs = {}, {}, {}, {}
    for i in I:
        O = A.idempotents(i)
        for j in I:
            hs = list(A.hom(i, j))
            pos = {f: n for n, f in enumerate(hs)}
            fams = []
            for th in itertools.product(O, repeat=len(hs)):
                if all(A.compose(th[pos[f]], e) == th[pos[A.compose(f, e)]] for f in hs for e in O):
                    fams.append(th)
            le = lambda a, b: all(A.leq(x, y) for x, y in zip(a, b))
            L = Lattice.make(fams, [(a, b) for a in fams for b in fams if le(a, b)])
            loc.admit(L)
            arr[i, j] = L
            sig[i, j] = loc.mor(L, X[i], {d: tuple(A.restrict(A.compose(f, d)) for f in hs) for d in O})
            tau[i, j] = loc.mor(L, X[j], {d: tuple(A.restrict(A.compose(d, f)) for f in hs)
                                             for d in A.idempotents(j)})
            for f in hs:
                secs[f] = loc.mor(X[i], L, {th: th[pos[f]] for th in fams})
    eta = {i: secs[A.identity(i)] for i in I}
    x = PartiteCategory(loc, I, X, arr, sig, tau, eta, name="localic")
    for i, j, k in itertools.product(I, repeat=3):
        basis, vals = {}, {}
        for f in A.hom(i, j):
            for g in A.hom(j, k):
                basis[g, f] = loc.compose(tau_star(x, i, j, k, secs[g]), secs[f])
                vals[g, f] = secs[A.compose(g, f)]
        x.mu[i, j, k] = _basis_join(loc, basis, vals, x.P(i, j, k).obj, arr[i, k])
    return x, secs


def check_localic_formulas(A: RCat, x: PartiteCategory, secs: dict) -> bool:
    """μ*(θ) pulled back along τ*(s_g)∘s_f is θ_{gf}, and s_f*(θ) = θ_f."""
    loc = x.base
    for i, j, k in itertools.product(A.objects, repeat=3):
        Lik = x.arr[i, k]
        hik = list(A.hom(i, k))
        for f in A.hom(i, j):
            for g in A.hom(j, k):
                t = loc.compose(tau_star(x, i, j, k, secs[g]), secs[f])
                m = loc.compose(x.mu[i, j, k], t)
                for th in Lik.elements:
                    if m.star[th] != th[hik.index(A.compose(g, f))]:
                        return False
    return True


# ------------------------------------------------------------------- coverages


@dataclass
class Coverage:
    A: RCat
    covers: dict  # f -> set of frozensets (sieves on f)

    def C(self, f):
        return self.covers.get(f, set())


def _principal(A, f):
    return frozenset(g for g in A.hom(A.dom(f), A.cod(f)) if A.leq(g, f))


def _down(A, S, f):
    return frozenset(g for g in _principal(A, f) if any(A.leq(g, x) for x in S))


def validate_coverage(cov: Coverage):
    """Sieve shape, both axioms, and the derived closure gX ∈ C(gf).

    Images Xf and gX are compared after down-closure inside ↓(gf).
    """
    from .rcat import Report
    A = cov.A
    rep = Report()
    for f, sieves in cov.covers.items():
        for X in sieves:
            if not X <= _principal(A, f) or _down(A, X, f) != X:
                rep.add("cover is a sieve on f", (f, tuple(csorted(X))))
    if not rep.ok:
        return rep
    for g in A.mors:
        for X in cov.C(g):
            for f in [h for h in A.mors if A.cod(h) == A.dom(g)]:
                gf = A.compose(g, f)
                Xf = _down(A, {A.compose(x, f) for x in X}, gf)
                if Xf not in cov.C(gf):
                    rep.add("axiom (i): Xf ∈ C(gf)", (g, f, tuple(csorted(X))))
    for f in A.mors:
        rf = A.restrict(f)
        for X in cov.C(f):
            Xb = _down(A, {A.restrict(x) for x in X}, rf)
            if Xb not in cov.C(rf):
                rep.add("axiom (ii): X̄ ∈ C(f̄)", (f, tuple(csorted(X))))
        for Y in cov.C(rf):
            lifts = [X for X in _sieves(A, f) if _down(A, {A.restrict(x) for x in X}, rf) == Y]
            if not any(X in cov.C(f) for X in lifts):
                rep.add("axiom (ii): X̄ ∈ C(f̄) ⇒ X ∈ C(f)", (f, tuple(csorted(Y))))
    if rep.ok:
        for f in A.mors:
            for X in cov.C(f):
                for g in [h for h in A.mors if A.dom(h) == A.cod(f)]:
                    gf = A.compose(g, f)
                    if _down(A, {A.compose(g, x) for x in X}, gf) not in cov.C(gf):
                        rep.add("derived: gX ∈ C(gf)", (f, g))
    return rep


def _sieves(A, f):
    P = list(_principal(A, f))
    out = []
    for r in range(len(P) + 1):
        for S in itertools.combinations(P, r):
            S = frozenset(S)
            if _down(A, S, f) == S:
                out.append(S)
    return out


def empty_coverage(A: RCat) -> Coverage:
    return Coverage(A, {})


def saturate(A: RCat, generators: dict) -> Coverage:
    """Smallest coverage containing the given covers (both axioms, down-closed images)."""
    cov = {f: set(v) for f, v in generators.items()}
    changed = True
    while changed:
        changed = False

        def add(h, S):
            nonlocal changed
            if S not in cov.setdefault(h, set()):
                cov[h].add(S)
                changed = True

        for g, sieves in list(cov.items()):
            for X in list(sieves):
                for f in [h for h in A.mors if A.cod(h) == A.dom(g)]:
                    gf = A.compose(g, f)
                    add(gf, _down(A, {A.compose(x, f) for x in X}, gf))
                rg = A.restrict(g)
                add(rg, _down(A, {A.restrict(x) for x in X}, rg))
        for f in A.mors:
            rf = A.restrict(f)
            for Y in list(cov.get(rf, ())):
                for X in _sieves(A, f):
                    if _down(A, {A.restrict(x) for x in X}, rf) == Y:
                        add(f, X)
    return Coverage(A, {f: v for f, v in cov.items() if v})


@dataclass
class CIdl:
    lattice: Lattice
    eta: dict  # idempotent -> closed ideal
    cover_to_join: bool


def c_idl(cov: Coverage, i=None) -> CIdl:
    """C-closed ideals of O(i): down-sets D with (X ⊆ D, X ∈ C(x)) ⇒ x ∈ D."""
    A = cov.A
    i = A.objects[0] if i is None else i
    O = list(A.idempotents(i))
    down = lambda S: frozenset(d for d in O if any(A.leq(d, s) for s in S))

    def closed(D):
        return all(x in D for x in O for X in cov.C(x) if X <= D)

    def closure(S):
        D = down(S)
        while True:
            add = {x for x in O for X in cov.C(x) if X <= D and x not in D}
            if not add:
                return D
            D = down(D | add)

    ideals = []
    for r in range(len(O) + 1):
        for S in itertools.combinations(O, r):
            S = frozenset(S)
            if down(S) == S and closed(S):
                ideals.append(S)
    L = Lattice.make(ideals, [(a, b) for a in ideals for b in ideals if a <= b])
    eta = {e: closure({e}) for e in O}
    ok = True
    for x in O:
        for X in cov.C(x):
            if L.join_all([eta[y] for y in X]) != eta[x]:
                ok = False
    return CIdl(L, eta, ok)


def meet_semilattice_rcat(elements, le, name="ΣM") -> RCat:
    """ΣM: one object, composition the meet, restriction the identity."""
    els = list(elements)
    meet = {}
    for a in els:
        for b in els:
            lows = [c for c in els if le(c, a) and le(c, b)]
            top = [c for c in lows if all(le(d, c) for d in lows)]
            if len(top) != 1:
                raise StructureError("not a meet-semilattice")
            meet[a, b] = top[0]
    tops = [a for a in els if all(le(b, a) for b in els)]
    if len(tops) != 1:
        raise StructureError("meet-semilattice needs a top element to serve as identity")
    return monoid_rcat(els, tops[0], meet, restr={m: m for m in els}, name=name)


def two_chain_rcat():
    return meet_semilattice_rcat(["⊥", "⊤"], lambda a, b: a == b or a == "⊥", name="Σ2")


@dataclass
class RelativeCompletion:
    OC: RFunctor
    completion: RCat
    unit: RFunctor
    projection: RFunctor
    cover_to_join: bool


def covered_fundamental_functor(cov: Coverage, loc: FinLocP | None = None) -> RFunctor:
    """O_C: i ↦ C-Idl(O(i)), f ↦ the unique map with O_C(f)*(η e) = η(restr(e f))."""
    A = cov.A
    loc = loc or FinLocP()
    idl = {i: c_idl(cov, i) for i in A.objects}
    for r in idl.values():
        loc.admit(r.lattice)
    mor = {}
    for f in A.mors:
        i, j = A.dom(f), A.cod(f)
        Li, Lj = idl[i].lattice, idl[j].lattice
        star = {}
        for D in Lj.elements:
            star[D] = Li.join_all([idl[i].eta[A.restrict(A.compose(e, f))] for e in D])
        for e in A.idempotents(j):
            if star[idl[j].eta[e]] != idl[i].eta[A.restrict(A.compose(e, f))]:
                raise StructureError("no inverse image fills the square")
        mor[f] = loc.mor(Li, Lj, star)
    return RFunctor(A, loc, {i: idl[i].lattice for i in A.objects}, mor, name="O_C")


def is_cover_to_join(cov: Coverage, F: RFunctor) -> bool:
    A, B = cov.A, F.target
    for f in A.mors:
        for X in cov.C(f):
            j = B.join([F.mor[x] for x in X], F.obj[A.dom(f)], F.obj[A.cod(f)])
            if j != F.mor[f]:
                return False
    return True


def relative_join_completion(cov: Coverage) -> RelativeCompletion:
    rep = validate_coverage(cov)
    if not rep.ok:
        raise StructureError(f"invalid coverage: {rep.violations[0]}")
    OC = covered_fundamental_functor(cov)
    r = reflector_explicit(OC, name="j_C")
    return RelativeCompletion(OC, r.over.source, r.unit, r.over, is_cover_to_join(cov, r.unit))


def completion_factorizations(rc: RelativeCompletion, F: RFunctor, budget=2_000_000):
    """All join restriction functors F' with F'∘η = F."""
    A, M, B = F.source, rc.completion, F.target
    forced = {}
    for f in A.mors:
        g = rc.unit.mor[f]
        if g in forced and forced[g] != F.mor[f]:
            return []
        forced[g] = F.mor[f]
    obj = {i: F.obj[i] for i in A.objects}

    def cands(g):
        if g in forced:
            return {forced[g]}
        return set(B.hom(obj[M.dom(g)], obj[M.cod(g)]))

    out = enumerate_functors(M, B, obj, candidates=cands, budget=budget)
    return [G for G in out if analyze_rfun(G).join_preserving]


# ------------------------------------------------------------------------- ESN


@dataclass
class InductiveGroupoidReport:
    groupoid: PartiteCategory
    sources_discrete_fibrations: bool
    object_posets_meet_semilattices: bool

    @property
    def inductive(self):
        return self.sources_discrete_fibrations and self.object_posets_meet_semilattices


def _is_meet_semilattice(P: Poset) -> bool:
    pts = P.points
    for a in pts:
        for b in pts:
            lows = [c for c in pts if P.le(c, a) and P.le(c, b)]
            if not any(all(P.le(d, c) for d in lows) for c in lows):
                return False
    return True


def esn_groupoid(I: RCat, base: FinPosP | None = None) -> InductiveGroupoidReport:
    """G(I): idempotent posets, arrow posets I(i,j), σ f = f*f, τ f = ff*."""
    if not is_inverse(I):
        raise StructureError("ESN construction needs an inverse category")
    base = base or FinPosP()
    objs = list(I.objects)
    obj, arr, sig, tau, eta, iota = {}, {}, {}, {}, {}, {}
    for i in objs:
        O = I.idempotents(i)
        obj[i] = Poset.make(O, [(d, e) for d in O for e in O if I.leq(d, e)])
    for i in objs:
        for j in objs:
            hs = I.hom(i, j)
            arr[i, j] = Poset.make(hs, [(f, g) for f in hs for g in hs if I.leq(f, g)])
    for i in objs:
        for j in objs:
            hs = I.hom(i, j)
            sig[i, j] = base.mor(arr[i, j], obj[i], {f: I.restrict(f) for f in hs})
            tau[i, j] = base.mor(arr[i, j], obj[j], {f: I.compose(f, I.partial_inverse(f)) for f in hs})
            iota[i, j] = base.mor(arr[i, j], arr[j, i], {f: I.partial_inverse(f) for f in hs})
        eta[i] = base.mor(obj[i], arr[i, i], {e: e for e in I.idempotents(i)})
    g = PartiteCategory(base, objs, obj, arr, sig, tau, eta, iota=iota, name="G(I)")
    for i, j, k in itertools.product(objs, repeat=3):
        P = g.P(i, j, k)
        g.mu[i, j, k] = base.mor(P.obj, arr[i, k], {(y, z): I.compose(y, z) for (y, z) in base.carrier(P.obj)})
    rep = validate_pcat(g, check_etale=False)
    if not rep.ok:
        raise StructureError(f"G(I) is not a partite groupoid: {rep.report.violations[0]}")
    dfib = all(base.is_discrete_fibration(sig[i, j]) for i in objs for j in objs)
    meets = all(_is_meet_semilattice(obj[i]) for i in objs)
    return InductiveGroupoidReport(g, dfib, meets)
