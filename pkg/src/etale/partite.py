"""Partite internal categories and groupoids in a base, cofunctors and
internal functors.

Fiber-product convention, used throughout: ``P[i, j, k]`` is
``A_jk ×_{A_j} A_ij`` with ``pi1`` onto the later factor ``A_jk`` and
``pi2`` onto ``A_ij``; a point (g, f) composes to g∘f.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ._canon import csorted, show
from .bases.core import is_local_homeomorphism
from .bases.points import PMap, PointBase
from .rcat import Report, StructureError


def diff_witness(f, g):
    """A point where two point maps disagree, else the pair itself."""
    if isinstance(f, PMap) and isinstance(g, PMap):
        for x in csorted(f.domain | g.domain):
            if f.map.get(x) != g.map.get(x):
                return (x,)
    return (f, g)


class PartiteCategory:
    def __init__(self, base, components, obj, arr, sigma, tau, eta, mu=None, iota=None, name=""):
        self.base = base
        self.I = tuple(components)
        self.obj = dict(obj)
        self.arr = dict(arr)
        self.sigma = dict(sigma)
        self.tau = dict(tau)
        self.eta = dict(eta)
        self.mu = dict(mu or {})
        self.iota = dict(iota) if iota is not None else None
        self.name = name
        self._pb = {}
        self._tb = {}
        for i in self.I:
            if i not in self.obj:
                raise StructureError(f"component {show(i)} has no object of objects")
        for i in self.I:
            for j in self.I:
                if (i, j) not in self.arr or (i, j) not in self.sigma or (i, j) not in self.tau:
                    raise StructureError(f"arrow data missing for ({show(i)},{show(j)})")

    @property
    def is_groupoid(self):
        return self.iota is not None

    def P(self, i, j, k):
        """A_jk ×_{A_j} A_ij."""
        key = (i, j, k)
        if key not in self._pb:
            self._pb[key] = self.base.fiber_product(self.sigma[j, k], self.tau[i, j])
        return self._pb[key]

    def T(self, i, j, k, l):
        """A_kl ×_{A_k} P_ijk, the object of composable triples."""
        key = (i, j, k, l)
        if key not in self._tb:
            P = self.P(i, j, k)
            self._tb[key] = self.base.fiber_product(self.sigma[k, l], self.base.compose(self.tau[j, k], P.pi1))
        return self._tb[key]

    def pair(self, i, j, k, later, earlier):
        return self.base.pair(self.P(i, j, k), later, earlier)

    def with_iota(self, iota):
        x = PartiteCategory(self.base, self.I, self.obj, self.arr, self.sigma, self.tau, self.eta, self.mu, iota, self.name)
        x._pb, x._tb = self._pb, self._tb
        return x

    def without_iota(self):
        return self.with_iota(None) if self.iota is not None else self

    def data_equal(self, other) -> bool:
        if self.I != other.I:
            return False
        return (self.obj == other.obj and self.arr == other.arr and self.sigma == other.sigma
                and self.tau == other.tau and self.eta == other.eta and self.mu == other.mu)

    def __repr__(self):
        return f"PartiteCategory({self.name or '?'}: {len(self.I)} components)"


@dataclass
class PcatReport:
    report: Report
    source_etale: bool
    structure_maps_etale: bool | None = None

    @property
    def ok(self):
        return self.report.ok


def _typed(b, f, src, tgt):
    return b.dom(f) == src and b.cod(f) == tgt


def validate_pcat(x: PartiteCategory, check_etale=True) -> PcatReport:
    b = x.base
    rep = Report()
    I = x.I
    for i in I:
        e = x.eta.get(i)
        if e is None or not _typed(b, e, x.obj[i], x.arr[i, i]) or not b.is_total(e):
            rep.add("η typing/totality", (i,))
    for (i, j), s in x.sigma.items():
        if not _typed(b, s, x.arr[i, j], x.obj[i]) or not b.is_total(s):
            rep.add("σ typing/totality", (i, j))
        t = x.tau[i, j]
        if not _typed(b, t, x.arr[i, j], x.obj[j]) or not b.is_total(t):
            rep.add("τ typing/totality", (i, j))
    if not rep.ok:
        return PcatReport(rep, False)
    for i, j, k in itertools.product(I, repeat=3):
        m = x.mu.get((i, j, k))
        if m is None or not _typed(b, m, x.P(i, j, k).obj, x.arr[i, k]) or not b.is_total(m):
            rep.add("μ typing/totality", (i, j, k))
    if not rep.ok:
        return PcatReport(rep, False)

    for i in I:
        one = b.identity(x.obj[i])
        for name, lhs in (("σ∘η = 1", b.compose(x.sigma[i, i], x.eta[i])), ("τ∘η = 1", b.compose(x.tau[i, i], x.eta[i]))):
            if lhs != one:
                rep.add(name, (i,) + diff_witness(lhs, one))
    for i, j, k in itertools.product(I, repeat=3):
        P = x.P(i, j, k)
        m = x.mu[i, j, k]
        l, r = b.compose(x.sigma[i, k], m), b.compose(x.sigma[i, j], P.pi2)
        if l != r:
            rep.add("σ∘μ = σ∘π₂", (i, j, k) + diff_witness(l, r))
        l, r = b.compose(x.tau[i, k], m), b.compose(x.tau[j, k], P.pi1)
        if l != r:
            rep.add("τ∘μ = τ∘π₁", (i, j, k) + diff_witness(l, r))
    if not rep.ok:
        return PcatReport(rep, False)
    for i, j in itertools.product(I, repeat=2):
        A = x.arr[i, j]
        one = b.identity(A)
        u = b.compose(x.mu[i, i, j], x.pair(i, i, j, one, b.compose(x.eta[i], x.sigma[i, j])))
        if u != one:
            rep.add("right unit μ(f, 1) = f", (i, j) + diff_witness(u, one))
        u = b.compose(x.mu[i, j, j], x.pair(i, j, j, b.compose(x.eta[j], x.tau[i, j]), one))
        if u != one:
            rep.add("left unit μ(1, f) = f", (i, j) + diff_witness(u, one))
    pointwise = not isinstance(b, PointBase) and hasattr(b, "to_points")
    if pointwise:
        # composable triples are enumerated on points; the locale of triples grows exponentially
        _pointwise_associativity(x, rep)
    for i, j, k, l in itertools.product(I, repeat=4) if not pointwise else ():
        T = x.T(i, j, k, l)
        P = x.P(i, j, k)
        r1, r2 = T.pi1, T.pi2
        a1 = x.pair(i, k, l, r1, b.compose(x.mu[i, j, k], r2))
        lhs = b.compose(x.mu[i, k, l], a1)
        inner = x.pair(j, k, l, r1, b.compose(P.pi1, r2))
        a2 = x.pair(i, j, l, b.compose(x.mu[j, k, l], inner), b.compose(P.pi2, r2))
        rhs = b.compose(x.mu[i, j, l], a2)
        if lhs != rhs:
            rep.add("associativity", (i, j, k, l) + diff_witness(lhs, rhs))
    if x.iota is not None:
        for i, j in itertools.product(I, repeat=2):
            io = x.iota.get((i, j))
            if io is None or not _typed(b, io, x.arr[i, j], x.arr[j, i]):
                rep.add("ι typing", (i, j))
                continue
        if rep.ok:
            for i, j in itertools.product(I, repeat=2):
                io, oi = x.iota[i, j], x.iota[j, i]
                one = b.identity(x.arr[i, j])
                if b.compose(oi, io) != one:
                    rep.add("ι involutive", (i, j))
                if b.compose(x.sigma[j, i], io) != x.tau[i, j]:
                    rep.add("σ∘ι = τ", (i, j))
                inv = b.compose(x.mu[i, j, i], x.pair(i, j, i, io, one))
                if inv != b.compose(x.eta[i], x.sigma[i, j]):
                    rep.add("μ(ι f, f) = η σ f", (i, j) + diff_witness(inv, b.compose(x.eta[i], x.sigma[i, j])))
    se = False
    sm = None
    if rep.ok and check_etale:
        se = all(is_local_homeomorphism(b, x.sigma[i, j]) for i in I for j in I)
        if x.iota is not None and se:
            maps = [x.tau[i, j] for i in I for j in I] + [x.iota[i, j] for i in I for j in I]
            maps += [x.mu[i, j, k] for i, j, k in itertools.product(I, repeat=3)]
            maps += [x.eta[i] for i in I]
            sm = all(is_local_homeomorphism(b, f) for f in maps)
    return PcatReport(rep, se, sm)


def _mu_points(x, i, j, k):
    """μ_ijk on points, keyed by (later, earlier)."""
    b = x.base
    later, earlier = x.arr[j, k], x.arr[i, j]
    out = {}
    for d, r in b.to_points(x.mu[i, j, k]).graph:
        top = [p for p in d if all(later.le(q[0], p[0]) and earlier.le(q[1], p[1]) for q in d)]
        out[top[0]] = r
    return out


def _pointwise_associativity(x, rep):
    I = x.I
    mus = {ijk: _mu_points(x, *ijk) for ijk in itertools.product(I, repeat=3)}
    for i, j, k, l in itertools.product(I, repeat=4):
        for (g, f), gf in mus[i, j, k].items():
            for (h, g2), hg in mus[j, k, l].items():
                if g2 != g:
                    continue
                lhs = mus[i, k, l].get((h, gf))
                rhs = mus[i, j, l].get((hg, f))
                if lhs is None or lhs != rhs:
                    rep.add("associativity", (i, j, k, l, h, g, f))
                    return


# ---------------------------------------------------------------- builders


def one_point(base):
    if hasattr(base, "inner"):
        pt = one_point(base.inner)
        return base.bundle(base.inner.identity(pt))
    if hasattr(base, "_pos") or base.name == "finloc":
        from .bases.finloc import Lattice
        return Lattice.chain(2)
    return base.make_object(_poset_pt())


def _poset_pt():
    from .bases.points import Poset
    return Poset.discrete(["*"])


def action_category(base, elements, unit, mul, X, act, name="action"):
    """M × X ⇉ X for a monoid acting on a finite set X (point bases)."""
    elements = list(elements)
    pts = base.carrier(X)
    Ar = base.make_object(_discrete(base, [(m, x) for m in elements for x in pts]))
    sig = base.mor(Ar, X, {(m, x): x for m in elements for x in pts})
    ta = base.mor(Ar, X, {(m, x): act[m, x] for m in elements for x in pts})
    eta = base.mor(X, Ar, {x: (unit, x) for x in pts})
    pc = PartiteCategory(base, ("•",), {"•": X}, {("•", "•"): Ar}, {("•", "•"): sig}, {("•", "•"): ta}, {"•": eta}, name=name)
    P = pc.P("•", "•", "•")
    mu = {}
    for (later, earlier) in base.carrier(P.obj):
        (n, _), (m, x) = later, earlier
        mu[later, earlier] = (mul[n, m], x)
    pc.mu[("•", "•", "•")] = base.mor(P.obj, Ar, mu)
    return pc


def monoid_category(base, elements, unit, mul, name="monoid"):
    pt = base.make_object(_discrete(base, ["*"]))
    act = {(m, "*"): "*" for m in elements}
    return action_category(base, elements, unit, mul, pt, act, name=name)


def _discrete(base, pts):
    from .bases.points import Poset
    return Poset.discrete(pts)


def empty_pcat(base):
    return PartiteCategory(base, (), {}, {}, {}, {}, {}, {}, name="empty")


# -------------------------------------------------------------- cofunctors


class Cofunctor:
    """F: 𝔸 ⇝ 𝔹 with component map I → J, F_i: B_{Fi} → A_i, and
    F_ij: A_ij ×_{A_i} B_{Fi} → B_{Fi,Fj}."""

    def __init__(self, source: PartiteCategory, target: PartiteCategory, comp: dict, F_obj: dict, F_arr=None, name=""):
        self.source = source
        self.target = target
        self.comp = dict(comp)
        self.F_obj = dict(F_obj)
        self.F_arr = dict(F_arr or {})
        self.name = name
        self._q = {}
        self._r = {}

    def Q(self, i, j):
        """A_ij ×_{A_i} B_{Fi}: π₁ to A_ij, π₂ to B_{Fi}."""
        if (i, j) not in self._q:
            A = self.source
            self._q[i, j] = A.base.fiber_product(A.sigma[i, j], self.F_obj[i])
        return self._q[i, j]

    def R(self, i, j, k):
        """P_ijk ×_{A_i} B_{Fi}."""
        if (i, j, k) not in self._r:
            A = self.source
            b = A.base
            P = A.P(i, j, k)
            self._r[i, j, k] = b.fiber_product(b.compose(A.sigma[i, j], P.pi2), self.F_obj[i])
        return self._r[i, j, k]


@dataclass
class CofunctorReport:
    report: Report
    bij_components: bool
    bij_objects: bool
    bij_arrows: bool

    @property
    def ok(self):
        return self.report.ok

    def flags(self):
        return {"bijComponents": self.bij_components, "bijObjects": self.bij_objects, "bijArrows": self.bij_arrows}


def is_iso(b, f):
    if not b.is_total(f):
        return False
    g = b.partial_inverse(f)
    return g is not None and b.is_total(g)


def validate_cofunctor(F: Cofunctor) -> CofunctorReport:
    A, B = F.source, F.target
    b = A.base
    rep = Report()
    for i in A.I:
        if F.comp.get(i) not in B.I:
            rep.add("component map", (i,))
    if not rep.ok:
        return CofunctorReport(rep, False, False, False)
    for i in A.I:
        f = F.F_obj.get(i)
        if f is None or not _typed(b, f, B.obj[F.comp[i]], A.obj[i]) or not b.is_total(f):
            rep.add("object action typing/totality", (i,))
    if not rep.ok:
        return CofunctorReport(rep, False, False, False)
    for i, j in itertools.product(A.I, repeat=2):
        f = F.F_arr.get((i, j))
        Fi, Fj = F.comp[i], F.comp[j]
        if f is None or not _typed(b, f, F.Q(i, j).obj, B.arr[Fi, Fj]) or not b.is_total(f):
            rep.add("arrow action typing/totality", (i, j))
    if not rep.ok:
        return CofunctorReport(rep, False, False, False)
    for i, j in itertools.product(A.I, repeat=2):
        Fi, Fj = F.comp[i], F.comp[j]
        Q = F.Q(i, j)
        Fij = F.F_arr[i, j]
        l, r = b.compose(B.sigma[Fi, Fj], Fij), Q.pi2
        if l != r:
            rep.add("source axiom σ F_ij = π₂", (i, j) + diff_witness(l, r))
        l = b.compose(F.F_obj[j], b.compose(B.tau[Fi, Fj], Fij))
        r = b.compose(A.tau[i, j], Q.pi1)
        if l != r:
            rep.add("target axiom", (i, j) + diff_witness(l, r))
    for i in A.I:
        Fi = F.comp[i]
        Bi = B.obj[Fi]
        q = b.pair(F.Q(i, i), b.compose(A.eta[i], F.F_obj[i]), b.identity(Bi))
        l = b.compose(F.F_arr[i, i], q)
        if l != B.eta[Fi]:
            rep.add("identity axiom", (i,) + diff_witness(l, B.eta[Fi]))
    if rep.ok:
        for i, j, k in itertools.product(A.I, repeat=3):
            Fi, Fj, Fk = F.comp[i], F.comp[j], F.comp[k]
            R = F.R(i, j, k)
            P = A.P(i, j, k)
            r1, r2 = R.pi1, R.pi2
            u = b.pair(F.Q(i, j), b.compose(P.pi2, r1), r2)
            bb = b.compose(F.F_arr[i, j], u)
            v = b.pair(F.Q(j, k), b.compose(P.pi1, r1), b.compose(B.tau[Fi, Fj], bb))
            bb2 = b.compose(F.F_arr[j, k], v)
            lhs = b.compose(B.mu[Fi, Fj, Fk], b.pair(B.P(Fi, Fj, Fk), bb2, bb))
            rhs = b.compose(F.F_arr[i, k], b.pair(F.Q(i, k), b.compose(A.mu[i, j, k], r1), r2))
            if lhs != rhs:
                rep.add("composition axiom", (i, j, k) + diff_witness(lhs, rhs))
    bc = len(set(F.comp.values())) == len(B.I) == len(A.I)
    bo = rep.ok and all(is_iso(b, F.F_obj[i]) for i in A.I)
    ba = rep.ok and all(is_iso(b, F.F_arr[i, j]) for i in A.I for j in A.I)
    return CofunctorReport(rep, bc, bo, ba)


def identity_cofunctor(A: PartiteCategory) -> Cofunctor:
    b = A.base
    F = Cofunctor(A, A, {i: i for i in A.I}, {i: b.identity(A.obj[i]) for i in A.I}, name="1")
    for i, j in itertools.product(A.I, repeat=2):
        F.F_arr[i, j] = F.Q(i, j).pi1
    return F


def compose_cofunctors(G: Cofunctor, F: Cofunctor) -> Cofunctor:
    """G∘F for F: 𝔸 ⇝ 𝔹 and G: 𝔹 ⇝ ℂ."""
    if F.target is not G.source and not F.target.data_equal(G.source):
        raise StructureError("cofunctors are not composable")
    A = F.source
    b = A.base
    comp = {i: G.comp[F.comp[i]] for i in A.I}
    obj = {i: b.compose(F.F_obj[i], G.F_obj[F.comp[i]]) for i in A.I}
    H = Cofunctor(A, G.target, comp, obj, name=f"{G.name}∘{F.name}")
    for i, j in itertools.product(A.I, repeat=2):
        Fi, Fj = F.comp[i], F.comp[j]
        Q = H.Q(i, j)
        q1, q2 = Q.pi1, Q.pi2
        inner = b.pair(F.Q(i, j), q1, b.compose(G.F_obj[Fi], q2))
        outer = b.pair(G.Q(Fi, Fj), b.compose(F.F_arr[i, j], inner), q2)
        H.F_arr[i, j] = b.compose(G.F_arr[Fi, Fj], outer)
    return H


def cofunctors_equal(F: Cofunctor, G: Cofunctor) -> bool:
    return F.comp == G.comp and F.F_obj == G.F_obj and F.F_arr == G.F_arr


# ---------------------------------------------------------- internal functors


class PartiteFunctor:
    """G: 𝔸 → 𝔹 with G_i: A_i → B_{Gi} and G_ij: A_ij → B_{Gi,Gj}."""

    def __init__(self, source, target, comp, G_obj, G_arr, name=""):
        self.source = source
        self.target = target
        self.comp = dict(comp)
        self.G_obj = dict(G_obj)
        self.G_arr = dict(G_arr)
        self.name = name


@dataclass
class FunctorCheck:
    report: Report
    covering: bool
    cone_witness: tuple | None = None

    @property
    def ok(self):
        return self.report.ok


def comparison_map(G: PartiteFunctor, i, j):
    """A_ij → B_{Gi,Gj} ×_{B_Gi} A_i, (G_ij, σ_ij)."""
    A, B = G.source, G.target
    b = A.base
    fp = b.fiber_product(B.sigma[G.comp[i], G.comp[j]], G.G_obj[i])
    return fp, b.pair(fp, G.G_arr[i, j], A.sigma[i, j])


def _cone_witness(b, fp, c):
    """A cone through which the comparison fails to factor uniquely."""
    if isinstance(c, PMap):
        hit = {}
        for x, y in c.graph:
            hit.setdefault(y, []).append(x)
        for pt in b.carrier(fp.obj):
            if pt not in hit:
                return ("no mediator", pt)
            if len(hit[pt]) > 1:
                return ("two mediators", pt, tuple(hit[pt][:2]))
    return ("comparison not invertible", c)


def validate_functor(G: PartiteFunctor) -> FunctorCheck:
    A, B = G.source, G.target
    b = A.base
    rep = Report()
    for i in A.I:
        Gi = G.comp[i]
        if b.compose(G.G_arr[i, i], A.eta[i]) != b.compose(B.eta[Gi], G.G_obj[i]):
            rep.add("G η = η G", (i,))
        for j in A.I:
            Gj = G.comp[j]
            g = G.G_arr[i, j]
            if b.compose(G.G_obj[i], A.sigma[i, j]) != b.compose(B.sigma[Gi, Gj], g):
                rep.add("G σ = σ G", (i, j))
            if b.compose(G.G_obj[j], A.tau[i, j]) != b.compose(B.tau[Gi, Gj], g):
                rep.add("G τ = τ G", (i, j))
    if rep.ok:
        for i, j, k in itertools.product(A.I, repeat=3):
            Gi, Gj, Gk = G.comp[i], G.comp[j], G.comp[k]
            P = A.P(i, j, k)
            gg = b.pair(B.P(Gi, Gj, Gk), b.compose(G.G_arr[j, k], P.pi1), b.compose(G.G_arr[i, j], P.pi2))
            if b.compose(G.G_arr[i, k], A.mu[i, j, k]) != b.compose(B.mu[Gi, Gj, Gk], gg):
                rep.add("G μ = μ (G × G)", (i, j, k))
    covering = rep.ok and len(set(G.comp.values())) == len(A.I) == len(B.I)
    witness = None
    if covering:
        for i, j in itertools.product(A.I, repeat=2):
            fp, c = comparison_map(G, i, j)
            if not is_iso(b, c):
                covering = False
                witness = ((i, j),) + _cone_witness(b, fp, c)
                break
    return FunctorCheck(rep, covering, witness)


def cofunctor_to_covering(F: Cofunctor) -> PartiteFunctor:
    chk = validate_cofunctor(F)
    if not chk.ok or not (chk.bij_components and chk.bij_arrows):
        raise StructureError("cofunctor must be valid, bijective on components and on arrows")
    A, B = F.source, F.target
    b = A.base
    inv = {F.comp[i]: i for i in A.I}
    G_obj = {F.comp[i]: F.F_obj[i] for i in A.I}
    G_arr = {}
    for i, j in itertools.product(A.I, repeat=2):
        G_arr[F.comp[i], F.comp[j]] = b.compose(F.Q(i, j).pi1, b.partial_inverse(F.F_arr[i, j]))
    return PartiteFunctor(B, A, inv, G_obj, G_arr, name=f"cover({F.name})")


def covering_to_cofunctor(G: PartiteFunctor) -> Cofunctor:
    chk = validate_functor(G)
    if not chk.ok:
        raise StructureError(f"not an internal functor: {chk.report.violations[0]}")
    if not chk.covering:
        w = chk.cone_witness
        raise StructureError(f"square is not a pullback; cone witness {w}")
    A, B = G.source, G.target
    b = A.base
    inv = {G.comp[i]: i for i in A.I}
    F_obj = {G.comp[i]: G.G_obj[i] for i in A.I}
    F = Cofunctor(B, A, inv, F_obj, name=f"cofunctor({G.name})")
    for i, j in itertools.product(A.I, repeat=2):
        Gi, Gj = G.comp[i], G.comp[j]
        fp, c = comparison_map(G, i, j)
        Q = F.Q(Gi, Gj)
        # Q and fp are the same fiber product; identify them canonically
        if Q.obj != fp.obj:
            raise StructureError("fiber products are not canonical")
        F.F_arr[Gi, Gj] = b.partial_inverse(c)
    return F


def functors_equal(G: PartiteFunctor, H: PartiteFunctor) -> bool:
    return G.comp == H.comp and G.G_obj == H.G_obj and G.G_arr == H.G_arr


def covering_conversions(x):
    """Cofunctor ↦ covering functor, covering functor ↦ cofunctor."""
    if isinstance(x, Cofunctor):
        return cofunctor_to_covering(x)
    if isinstance(x, PartiteFunctor):
        return covering_to_cofunctor(x)
    raise StructureError("expected a cofunctor or an internal functor")


def identity_functor(A: PartiteCategory) -> PartiteFunctor:
    b = A.base
    return PartiteFunctor(A, A, {i: i for i in A.I}, {i: b.identity(A.obj[i]) for i in A.I},
                          {(i, j): b.identity(A.arr[i, j]) for i in A.I for j in A.I}, name="1")


# ------------------------------------------------------------------ inverses


def try_inverses(x: PartiteCategory):
    """The unique ι making x a groupoid, or None."""
    I = x.I
    iota = {}
    for i, j in itertools.product(I, repeat=2):
        cands = _inverse_candidates(x, i, j)
        if cands is None:
            return None
        if len(cands) != 1:
            if len(cands) > 1:
                raise StructureError("inverse maps are not unique")
            return None
        iota[i, j] = cands[0]
    g = x.with_iota(iota)
    if not validate_pcat(g, check_etale=False).ok:
        return None
    return g


def _inverse_candidates(x, i, j):
    b = x.base
    A, Aop = x.arr[i, j], x.arr[j, i]
    if isinstance(b, PointBase):
        sig, ta = x.sigma[i, j].map, x.tau[i, j].map
        sig2, ta2 = x.sigma[j, i].map, x.tau[j, i].map
        mu_iji, mu_jij = x.mu[i, j, i].map, x.mu[j, i, j].map
        eta_i, eta_j = x.eta[i].map, x.eta[j].map
        g = {}
        for f in b.carrier(A):
            opts = [h for h in b.carrier(Aop)
                    if sig2[h] == ta[f] and ta2[h] == sig[f]
                    and mu_iji.get((h, f)) == eta_i[sig[f]]
                    and mu_jij.get((f, h)) == eta_j[ta[f]]]
            if len(opts) != 1:
                return [] if not opts else [None, None]
            g[f] = opts[0]
        try:
            return [b.mor(A, Aop, g)]
        except StructureError:
            return []
    out = []
    for h in b.hom(A, Aop):
        if not b.is_total(h):
            continue
        if b.compose(x.sigma[j, i], h) != x.tau[i, j] or b.compose(x.tau[j, i], h) != x.sigma[i, j]:
            continue
        one = b.identity(A)
        if b.compose(x.mu[i, j, i], x.pair(i, j, i, h, one)) != b.compose(x.eta[i], x.sigma[i, j]):
            continue
        if b.compose(x.mu[j, i, j], x.pair(j, i, j, one, h)) != b.compose(x.eta[j], x.tau[i, j]):
            continue
        out.append(h)
    return out


# ---------------------------------------------------------------- isomorphism


class _PointView:
    """Points, order and point maps of objects in a point base or FinLocP."""

    def __init__(self, b):
        self.b = b
        self.loc = not isinstance(b, PointBase)
        if self.loc and not hasattr(b, "to_points"):
            raise StructureError(f"no point view of base {b.name}")

    def points(self, X):
        return csorted(X.irreducibles) if self.loc else csorted(self.b.carrier(X))

    def le(self, X, x, y):
        return X.le(x, y) if self.loc else self.b.poset(X).le(x, y)

    def pmap(self, f):
        return (self.b.to_points(f) if self.loc else f).map

    def lift(self, A, B, m):
        if self.loc:
            return self.b.from_points(A, B, PMap(A.spectrum, B.spectrum, frozenset(m.items())))
        return self.b.mor(A, B, m)


def _order_isos(pv, X, Y, allowed, budget):
    xs, ys = pv.points(X), pv.points(Y)
    if len(xs) != len(ys):
        return
    out = {}
    used = set()

    def rec(k):
        if budget[0] <= 0:
            raise StructureError("isomorphism search budget exhausted")
        budget[0] -= 1
        if k == len(xs):
            yield dict(out)
            return
        x = xs[k]
        for y in allowed(x, ys):
            if y in used:
                continue
            if all(pv.le(X, x, u) == pv.le(Y, y, out[u]) and pv.le(X, u, x) == pv.le(Y, out[u], y) for u in out):
                out[x] = y
                used.add(y)
                yield from rec(k + 1)
                used.discard(y)
                del out[x]

    yield from rec(0)


def partite_isomorphism(x: PartiteCategory, y: PartiteCategory, budget=200_000):
    """Base isomorphisms (h_i, h_ij) commuting with σ, τ, η and μ, or None.

    Components are matched by name.
    """
    b = x.base
    if set(x.I) != set(y.I):
        return None
    pv = _PointView(b)
    I = x.I
    bud = [budget]
    allow_all = lambda p, ys: ys

    def obj_maps(k, acc):
        if k == len(I):
            yield dict(acc)
            return
        i = I[k]
        for h in _order_isos(pv, x.obj[i], y.obj[i], allow_all, bud):
            acc[i] = h
            yield from obj_maps(k + 1, acc)
        acc.pop(I[k], None)

    pairs = list(itertools.product(I, repeat=2))
    for hobj in obj_maps(0, {}):
        ok = True
        opts = {}
        for i, j in pairs:
            sx, tx = pv.pmap(x.sigma[i, j]), pv.pmap(x.tau[i, j])
            sy, ty = pv.pmap(y.sigma[i, j]), pv.pmap(y.tau[i, j])
            hi, hj = hobj[i], hobj[j]

            def allowed(p, ys, sx=sx, tx=tx, sy=sy, ty=ty, hi=hi, hj=hj):
                return [q for q in ys if sy.get(q) == hi.get(sx.get(p)) and ty.get(q) == hj.get(tx.get(p))]

            cands = []
            for h in _order_isos(pv, x.arr[i, j], y.arr[i, j], allowed, bud):
                if i == j:
                    ex, ey = pv.pmap(x.eta[i]), pv.pmap(y.eta[i])
                    if any(h[ex[a]] != ey[hobj[i][a]] for a in ex):
                        continue
                cands.append(h)
            if not cands:
                ok = False
                break
            opts[i, j] = cands
        if not ok:
            continue
        for choice in itertools.product(*(opts[p] for p in pairs)):
            h = dict(zip(pairs, choice))
            lifted = {p: pv.lift(x.arr[p], y.arr[p], h[p]) for p in pairs}
            good = True
            for i, j, k in itertools.product(I, repeat=3):
                P = x.P(i, j, k)
                lhs = b.compose(lifted[i, k], x.mu[i, j, k])
                rhs = b.compose(y.mu[i, j, k], y.pair(i, j, k, b.compose(lifted[j, k], P.pi1),
                                                        b.compose(lifted[i, j], P.pi2)))
                if lhs != rhs:
                    good = False
                    break
            if good:
                objs = {i: pv.lift(x.obj[i], y.obj[i], hobj[i]) for i in I}
                return objs, lifted
    return None
