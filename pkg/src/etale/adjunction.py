"""Externalisation Φ and internalisation Ψ between partite internal
categories in a base and restriction categories over it.

A *functor over a base* is an ``RFunctor`` whose target is a base (or
any join restriction category used as one).  A *map over a base* is a
restriction functor together with total components ``alpha[i]: Q F i → P i``
satisfying ``alpha[j] ∘ Q(F f) = P f ∘ alpha[i]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ._canon import show
from .bases.core import LocalAtlas, glue
from .partite import (
    Cofunctor,
    PartiteCategory,
    compose_cofunctors,
    cofunctors_equal,
    identity_cofunctor,
    validate_cofunctor,
    validate_pcat,
)
from .rcat import (
    RCat,
    RFunctor,
    StructureError,
    analyze_rfun,
    find_isomorphism,
    is_hyperconnected,
    is_inverse,
    is_join_restriction,
    piso_subcategory,
)

FunctorOverBase = RFunctor


@dataclass
class MapOverBase:
    F: RFunctor  # A → B
    P: RFunctor  # A → base
    Q: RFunctor  # B → base
    alpha: dict  # i -> total base map Q F i → P i

    def check(self):
        b = self.P.target
        A = self.F.source
        for i in A.objects:
            a = self.alpha[i]
            if not b.is_total(a):
                return False
            if b.dom(a) != self.Q.obj[self.F.obj[i]] or b.cod(a) != self.P.obj[i]:
                return False
        for f in A.mors:
            i, j = A.dom(f), A.cod(f)
            lhs = b.compose(self.alpha[j], self.Q.mor[self.F.mor[f]])
            rhs = b.compose(self.P.mor[f], self.alpha[i])
            if lhs != rhs:
                return False
        return True


def monoid_rcat(elements, unit, mul, restr=None, name="ΣM", obj="•"):
    """One-object restriction category from a finite monoid table."""
    els = list(elements)
    restr = restr or {m: unit for m in els}
    return RCat([obj], [(m, obj, obj) for m in els], {obj: unit},
                {(g, f): mul[g, f] for g in els for f in els}, dict(restr), name=name)


def over_base(A: RCat, base, obj, mor, name="P") -> RFunctor:
    return RFunctor(A, base, obj, mor, name=name)


def inclusion_over(base, c: RCat, name="incl") -> RFunctor:
    """A subcategory of ``base.as_rcat`` sitting over the base by inclusion."""
    return RFunctor(c, base, {a: a for a in c.objects}, {f: f for f in c.mors}, name=name)


# --------------------------------------------------------------------- fneq


def fneq(P: RFunctor, f, g):
    """⋁{Pe : e ∈ O(dom f), e ≤ f̄ḡ, fe = ge}, joined in the base."""
    A, C = P.source, P.target
    i = A.dom(f)
    if A.dom(g) != i or A.cod(g) != A.cod(f):
        raise StructureError("fneq of non-parallel maps")
    bound = A.compose(A.restrict(f), A.restrict(g))
    es = [P.mor[e] for e in A.idempotents(i) if A.leq(e, bound) and A.compose(f, e) == A.compose(g, e)]
    return C.join(es, P.obj[i], P.obj[i])


def _basis_join(b, basis, values, src, tgt):
    """⋁_k values[k] ∘ basis[k]*: the map determined on a basis of sections."""
    parts = []
    for k, t in basis.items():
        ti = b.partial_inverse(t)
        if ti is None:
            raise StructureError(f"basis element {show(k)} is not a partial isomorphism")
        parts.append(b.compose(values[k], ti))
    h = b.join(parts, src, tgt)
    if h is None:
        raise StructureError("values are not compatible on the basis")
    return h


def tau_star(x: PartiteCategory, i, j, k, t):
    """τ_ij*(t): A_ij → A_jk ×_{A_j} A_ij for a partial section t of σ_jk."""
    b = x.base
    u = b.compose(t, x.tau[i, j])
    return x.pair(i, j, k, u, b.restrict(u))


def star(b, fp, s, along):
    """along*(s) = (s∘along, restr(s∘along)) into the fiber product."""
    u = b.compose(s, along)
    return b.pair(fp, u, b.restrict(u))


# ---------------------------------------------------------- externalisation


@dataclass(frozen=True)
class Sec:
    i: object
    j: object
    s: object

    def key(self):
        return ("sec", self.i, self.j, self.s.key() if hasattr(self.s, "key") else self.s)

    def __repr__(self):
        return f"⟨{show(self.i)}→{show(self.j)}: {self.s!r}⟩"


class _ExternalOps:
    def __init__(self, x: PartiteCategory, keep=None):
        self.x = x
        self.keep = keep
        self._h = {}

    def hom(self, i, j):
        if (i, j) not in self._h:
            b = self.x.base
            secs = b.sections(self.x.sigma[i, j])
            if self.keep is not None:
                secs = [s for s in secs if self.keep(i, j, s)]
            self._h[i, j] = [Sec(i, j, s) for s in secs]
        return self._h[i, j]

    def dom(self, f):
        return f.i

    def cod(self, f):
        return f.j

    def identity(self, i):
        return Sec(i, i, self.x.eta[i])

    def compose(self, t, s):
        x, b = self.x, self.x.base
        i, j, k = s.i, s.j, t.j
        return Sec(i, k, b.compose(x.mu[i, j, k], b.compose(tau_star(x, i, j, k, t.s), s.s)))

    def restrict(self, s):
        b = self.x.base
        return Sec(s.i, s.i, b.compose(self.x.eta[s.i], b.restrict(s.s)))


def externalize(x: PartiteCategory, keep=None, name="Φ") -> RFunctor:
    """Sections of the source maps, composed by t∗s = μ∘τ*(t)∘s, over the base via τ∘s."""
    ops = _ExternalOps(x, keep)
    C = RCat.from_ops(ops, list(x.I), name=name)
    b = x.base
    mor = {s: b.compose(x.tau[s.i, s.j], s.s) for s in C.mors}
    return RFunctor(C, b, {i: x.obj[i] for i in x.I}, mor, name=f"π[{name}]")


def externalize_map(F: Cofunctor, PA: RFunctor | None = None, PB: RFunctor | None = None) -> MapOverBase:
    """ΦF(s) = F_ij ∘ F_i*(s), with components F_i."""
    A, B = F.source, F.target
    b = A.base
    PA = PA or externalize(A)
    PB = PB or externalize(B)
    mor = {}
    for s in PA.source.mors:
        i, j = s.i, s.j
        t = b.compose(F.F_arr[i, j], star(b, F.Q(i, j), s.s, F.F_obj[i]))
        mor[s] = Sec(F.comp[i], F.comp[j], t)
    G = RFunctor(PA.source, PB.source, dict(F.comp), mor, name=f"Φ({F.name})")
    for f in mor.values():
        if f not in PB.source._ix:
            raise StructureError("externalised cofunctor leaves the target hom-sets")
    return MapOverBase(G, PA, PB, {i: F.F_obj[i] for i in A.I})


def externalize_groupoid(g: PartiteCategory, name="Φg") -> RFunctor:
    """The wide subcategory of partial bisections: sections s with τ∘s invertible."""
    if g.iota is None:
        raise StructureError("externalize_groupoid needs a groupoid")
    b = g.base

    def bisection(i, j, s):
        return b.partial_inverse(b.compose(g.tau[i, j], s)) is not None

    return externalize(g, keep=bisection, name=name)


# ---------------------------------------------------------- internalisation


@dataclass
class Internalization:
    pcat: PartiteCategory
    unit: RFunctor  # A → Φ(ΨP)
    over: RFunctor  # π_{ΨP}
    glueings: dict  # (i, j) -> GlueResult
    sections: dict  # f -> s_f


def internalize(P: RFunctor, verify=True) -> Internalization:
    A, b = P.source, P.target
    rep = analyze_rfun(P)
    if not rep.restriction_preserving:
        raise StructureError(f"not a restriction functor: {rep.report.violations[:1]}")
    I = list(A.objects)
    obj = {i: P.obj[i] for i in I}
    arr, sig, tau, gl, s = {}, {}, {}, {}, {}
    for i in I:
        for j in I:
            hs = tuple(A.hom(i, j))
            phi = {(f, g): fneq(P, f, g) for f in hs for g in hs}
            r = glue(b, LocalAtlas(obj[i], hs, phi), verify=verify)
            gl[i, j] = r
            arr[i, j] = r.apex
            sig[i, j] = r.p
            for f in hs:
                s[f] = r.sections[f]
            tau[i, j] = _basis_join(b, {f: r.sections[f] for f in hs}, {f: P.mor[f] for f in hs}, r.apex, obj[j])
    eta = {i: s[A.identity(i)] for i in I}
    x = PartiteCategory(b, I, obj, arr, sig, tau, eta, name=f"Ψ({P.name})")
    for i, j, k in itertools.product(I, repeat=3):
        basis, vals = {}, {}
        for f in A.hom(i, j):
            for g in A.hom(j, k):
                basis[g, f] = b.compose(tau_star(x, i, j, k, s[g]), s[f])
                vals[g, f] = s[A.compose(g, f)]
        x.mu[i, j, k] = _basis_join(b, basis, vals, x.P(i, j, k).obj, arr[i, k])
    over = externalize(x, name=f"ΦΨ({P.name})")
    C = over.source
    unit = RFunctor(A, C, {i: i for i in I}, {f: Sec(A.dom(f), A.cod(f), s[f]) for f in A.mors}, name="η")
    for f in A.mors:
        if unit.mor[f] not in C._ix:
            raise StructureError("unit section missing from the externalisation")
    return Internalization(x, unit, over, gl, s)


def transpose(P: RFunctor, G: RFunctor, gamma: dict, B: PartiteCategory,
              psi: Internalization | None = None, name="") -> Cofunctor:
    """The cofunctor ΨP ⇝ 𝔹 transposing G: A → Φ𝔹 with 2-cell γ.

    ``G`` takes values in the externalisation of ``B``, so every ``G f`` is a ``Sec``.
    """
    psi = psi or internalize(P)
    x = psi.pcat
    b = x.base
    A = P.source
    F = Cofunctor(x, B, dict(G.obj), dict(gamma), name=name)
    for i in A.objects:
        for j in A.objects:
            Q = F.Q(i, j)
            basis = {f: star(b, Q, psi.sections[f], gamma[i]) for f in A.hom(i, j)}
            vals = {f: G.mor[f].s for f in A.hom(i, j)}
            F.F_arr[i, j] = _basis_join(b, basis, vals, Q.obj, B.arr[G.obj[i], G.obj[j]])
    return F


def internalize_map(m: MapOverBase, psiP: Internalization | None = None, psiQ: Internalization | None = None) -> Cofunctor:
    """Ψ(F, α): ΨP ⇝ ΨQ with F_ij ∘ α_i*(s_f) = s_{Ff}."""
    psiP = psiP or internalize(m.P)
    psiQ = psiQ or internalize(m.Q)
    x, y = psiP.pcat, psiQ.pcat
    b = x.base
    A = m.F.source
    F = Cofunctor(x, y, dict(m.F.obj), dict(m.alpha), name=f"Ψ({m.F.name})")
    for i in A.objects:
        for j in A.objects:
            Q = F.Q(i, j)
            basis = {f: star(b, Q, psiP.sections[f], m.alpha[i]) for f in A.hom(i, j)}
            vals = {f: psiQ.sections[m.F.mor[f]] for f in A.hom(i, j)}
            F.F_arr[i, j] = _basis_join(b, basis, vals, Q.obj, y.arr[m.F.obj[i], m.F.obj[j]])
    return F


# --------------------------------------------------------------- unit/counit


@dataclass
class UnitResult:
    psi: Internalization
    map: MapOverBase
    iso_direct: bool
    iso_criterion: bool

    @property
    def iso(self):
        if self.iso_direct != self.iso_criterion:
            raise StructureError("unit iso flag disagrees with the fixpoint criterion")
        return self.iso_direct


def adjunction_unit(P: RFunctor) -> UnitResult:
    psi = internalize(P)
    A = P.source
    C = psi.unit.target
    direct = len(C.mors) == len(A.mors) and len(set(psi.unit.mor.values())) == len(A.mors)
    crit = is_join_restriction(A) and is_hyperconnected(P)
    b = P.target
    m = MapOverBase(psi.unit, P, psi.over, {i: b.identity(P.obj[i]) for i in A.objects})
    return UnitResult(psi, m, direct, crit)


@dataclass
class CounitResult:
    cofunctor: Cofunctor  # ΨΦx ⇝ x
    over: RFunctor
    psi: Internalization
    iso_direct: bool
    iso_criterion: bool

    @property
    def iso(self):
        if self.iso_direct != self.iso_criterion:
            raise StructureError("counit iso flag disagrees with the fixpoint criterion")
        return self.iso_direct


def adjunction_counit(x: PartiteCategory) -> CounitResult:
    """ε_x: ΨΦx ⇝ x, the transpose of the identity of Φx."""
    over = externalize(x)
    psi = internalize(over)
    b = x.base
    C = over.source
    G = RFunctor(C, C, {i: i for i in C.objects}, {f: f for f in C.mors}, name="1")
    eps = transpose(over, G, {i: b.identity(x.obj[i]) for i in x.I}, x, psi, name="ε")
    chk = validate_cofunctor(eps)
    if not chk.ok:
        raise StructureError(f"counit is not a cofunctor: {chk.report.violations[:1]}")
    direct = chk.bij_components and chk.bij_objects and chk.bij_arrows
    crit = validate_pcat(x).source_etale
    return CounitResult(eps, over, psi, direct, crit)


def triangle_phi(x: PartiteCategory) -> bool:
    """Φ(ε_x) ∘ η_{Φx} = 1 on Φx."""
    cr = adjunction_counit(x)
    phieps = externalize_map(cr.cofunctor, PA=cr.psi.over, PB=cr.over)
    C = cr.over.source
    for f in C.mors:
        if phieps.F.mor[cr.psi.unit.mor[f]] != f:
            return False
    return True


def triangle_psi(P: RFunctor) -> bool:
    """ε_{ΨP} ∘ Ψ(η_P) = 1 on ΨP."""
    u = adjunction_unit(P)
    x = u.psi.pcat
    cr = adjunction_counit(x)
    # Ψ(η_P) lands in Ψ of the registered externalisation of x
    m = MapOverBase(_retarget(u.psi.unit, cr.over.source), P, cr.over, u.map.alpha)
    F = internalize_map(m, psiP=u.psi, psiQ=cr.psi)
    H = compose_cofunctors(cr.cofunctor, F)
    return cofunctors_equal(H, identity_cofunctor(x))


def _retarget(F: RFunctor, C: RCat) -> RFunctor:
    return RFunctor(F.source, C, F.obj, F.mor, name=F.name)


def galois_checks(P: RFunctor) -> dict:
    """ΦΨΦ ≅ Φ at ΨP (unit of ΦΨP is iso) and ΨΦΨ ≅ Ψ (counit at ΨP is iso)."""
    u = adjunction_unit(P)
    cr = adjunction_counit(u.psi.pcat)
    u2 = adjunction_unit(u.psi.over)
    return {"counit_at_psi_iso": cr.iso, "unit_at_phi_iso": u2.iso}


# ---------------------------------------------------------- explicit reflector


@dataclass(frozen=True)
class Fam:
    i: object
    j: object
    theta: tuple  # aligned with A.hom(i, j)

    def key(self):
        return ("fam", self.i, self.j, tuple(t.key() if hasattr(t, "key") else t for t in self.theta))

    def __repr__(self):
        return f"θ[{show(self.i)}→{show(self.j)}]{self.theta!r}"


class _ReflectorOps:
    def __init__(self, P: RFunctor, inverse_only=False):
        self.P = P
        A, C = P.source, P.target
        self.A, self.C = A, C
        self.eq = {}
        for i in A.objects:
            for j in A.objects:
                for f in A.hom(i, j):
                    for g in A.hom(i, j):
                        self.eq[f, g] = fneq(P, f, g)
        self.inverse_only = inverse_only
        self._h = {}

    def families(self, i, j):
        A, C, P = self.A, self.C, self.P
        hs = list(A.hom(i, j))
        O = C.idempotents(P.obj[i])
        out = []

        def rec(k, cur):
            if k == len(hs):
                out.append(tuple(cur))
                return
            f = hs[k]
            for t in O:
                if not C.leq(t, self.eq[f, f]):
                    continue
                good = True
                for m in range(k):
                    g, u = hs[m], cur[m]
                    e = self.eq[f, g]
                    if not (C.leq(C.compose(u, t), e) and C.leq(C.compose(u, e), t) and C.leq(C.compose(t, e), u)):
                        good = False
                        break
                if good:
                    rec(k + 1, cur + [t])

        rec(0, [])
        if self.inverse_only:
            out = [th for th in out if self._bisection(i, j, hs, th)]
        return out

    def _bisection(self, i, j, hs, th):
        A, C, P = self.A, self.C, self.P
        inv = {f: A.partial_inverse(f) for f in hs}
        for a, f in enumerate(hs):
            for c, g in enumerate(hs):
                Pf, Pg = P.mor[f], P.mor[g]
                lhs = C.compose(C.compose(C.compose(Pf, th[a]), P.mor[inv[f]]),
                                C.compose(C.compose(Pg, th[c]), P.mor[inv[g]]))
                if not C.leq(lhs, self.eq[inv[f], inv[g]]):
                    return False
        return True

    def hom(self, i, j):
        if (i, j) not in self._h:
            self._h[i, j] = [Fam(i, j, th) for th in self.families(i, j)]
        return self._h[i, j]

    def dom(self, f):
        return f.i

    def cod(self, f):
        return f.j

    def identity(self, i):
        return Fam(i, i, tuple(self.eq[self.A.identity(i), f] for f in self.A.hom(i, i)))

    def compose(self, psi, theta):
        A, C, P = self.A, self.C, self.P
        i, j, k = theta.i, theta.j, psi.j
        X = P.obj[i]
        fs, gs, hs = A.hom(i, j), A.hom(j, k), A.hom(i, k)
        out = []
        for h in hs:
            parts = []
            for a, f in enumerate(fs):
                for c, g in enumerate(gs):
                    r = C.restrict(C.compose(psi.theta[c], P.mor[f]))
                    parts.append(C.compose(self.eq[A.compose(g, f), h], C.compose(r, theta.theta[a])))
            out.append(C.join(parts, X, X))
        return Fam(i, k, tuple(out))

    def restrict(self, theta):
        A, C, P = self.A, self.C, self.P
        i = theta.i
        X = P.obj[i]
        top = C.join(list(theta.theta), X, X)
        return Fam(i, i, tuple(C.compose(self.eq[A.identity(i), f], top) for f in A.hom(i, i)))

    def project(self, theta):
        A, C, P = self.A, self.C, self.P
        fs = A.hom(theta.i, theta.j)
        return C.join([C.compose(P.mor[f], theta.theta[a]) for a, f in enumerate(fs)], P.obj[theta.i], P.obj[theta.j])


@dataclass
class Reflection:
    over: RFunctor  # projection M → base
    unit: RFunctor  # A → M


def reflector_explicit(P: RFunctor, inverse_only=False, name="ΦΨ") -> Reflection:
    ops = _ReflectorOps(P, inverse_only)
    A = P.source
    M = RCat.from_ops(ops, list(A.objects), name=name)
    proj = RFunctor(M, P.target, dict(P.obj), {t: ops.project(t) for t in M.mors}, name=f"π[{name}]")
    umor = {g: Fam(A.dom(g), A.cod(g), tuple(ops.eq[f, g] for f in A.hom(A.dom(g), A.cod(g)))) for g in A.mors}
    unit = RFunctor(A, M, {i: i for i in A.objects}, umor, name="η")
    return Reflection(proj, unit)


def reflector_groupoid(P: RFunctor, name="Φg Ψ") -> Reflection:
    if not is_inverse(P.source):
        raise StructureError("reflector_groupoid needs an inverse category")
    return reflector_explicit(P, inverse_only=True, name=name)


def reflector_matches_glueing(P: RFunctor, budget=500_000):
    """An isomorphism between the explicit reflector and ΦΨP over the base, or None."""
    r = reflector_explicit(P)
    psi = internalize(P)
    M, C = r.over.source, psi.over.source
    pm, pc = r.over.mor, psi.over.mor
    return find_isomorphism(M, C, compat=lambda f, g: pm[f] == pc[g],
                            fixed_objects={i: i for i in M.objects}, budget=budget)


def reflector_groupoid_matches(P: RFunctor) -> bool:
    """Families cut out by the bisection condition are the partial isos of the reflector."""
    full = reflector_explicit(P)
    grp = reflector_groupoid(P)
    sub = piso_subcategory(full.over.source)
    return set(sub.mors) == set(grp.over.source.mors)


def groupoid_externalization_matches(g: PartiteCategory) -> bool:
    ext = externalize(g)
    sub = piso_subcategory(ext.source)
    eg = externalize_groupoid(g)
    return set(sub.mors) == set(eg.source.mors) and is_inverse(eg.source)


# ------------------------------------------------------------- factorisation


@dataclass
class Factorization:
    middle: RCat
    L: RFunctor
    H: RFunctor


def factorize(F: RFunctor) -> Factorization:
    """(localic, hyperconnected) factorisation of a join restriction functor."""
    A, B = F.source, F.target
    if not isinstance(B, RCat):
        raise StructureError("factorize needs a table codomain")
    if not (is_join_restriction(A) and is_join_restriction(B)):
        raise StructureError("factorize needs join restriction categories on both sides")
    rep = analyze_rfun(F)
    if not rep.restriction_preserving:
        raise StructureError("not a restriction functor")
    if not rep.join_preserving:
        raise StructureError("F is not join-preserving")
    r = reflector_explicit(F, name="M")
    M = r.over.source
    L = r.unit
    H = r.over
    for f in A.mors:
        if H.mor[L.mor[f]] != F.mor[f]:
            raise StructureError("factorisation does not recompose to F")
    return Factorization(M, L, H)


@dataclass
class Square:
    L: RFunctor  # A → B, localic
    H: RFunctor  # C → D, hyperconnected
    F: RFunctor  # A → C
    G: RFunctor  # B → D


def square_commutes(sq: Square) -> bool:
    A = sq.L.source
    return all(sq.H.mor[sq.F.mor[f]] == sq.G.mor[sq.L.mor[f]] for f in A.mors) and all(
        sq.H.obj[sq.F.obj[a]] == sq.G.obj[sq.L.obj[a]] for a in A.objects)


def diagonal_filler(sq: Square, verify_flags=True) -> RFunctor:
    """J(g) = ⋁_f F f ∘ φ_fg where H φ_fg = G⟦g = L f⟧."""
    L, H, F, G = sq.L, sq.H, sq.F, sq.G
    A, B, C = L.source, L.target, F.target
    if verify_flags:
        if not analyze_rfun(L).localic:
            raise StructureError("left map is not localic")
        if not analyze_rfun(H).hyperconnected:
            raise StructureError("right map is not hyperconnected")
    if not square_commutes(sq):
        raise StructureError("square does not commute")
    inv_obj = {L.obj[a]: a for a in A.objects}
    Jobj = {b: F.obj[inv_obj[b]] for b in B.objects}
    from .rcat import sheq
    lift = {}
    for c in C.objects:
        for e in C.idempotents(c):
            lift[c, H.mor[e]] = e
    Jmor = {}
    for g in B.mors:
        i, j = inv_obj[B.dom(g)], inv_obj[B.cod(g)]
        c = F.obj[i]
        parts = []
        for f in A.hom(i, j):
            d = G.mor[sheq(B, g, L.mor[f])]
            phi = lift.get((c, d))
            if phi is None:
                raise StructureError("internal inconsistency: no idempotent lifts through H")
            parts.append(C.compose(F.mor[f], phi))
        Jmor[g] = C.join(parts, c, F.obj[j])
        if Jmor[g] is None:
            raise StructureError("filler components are not compatible")
    J = RFunctor(B, C, Jobj, Jmor, name="J")
    return J


def filler_checks(sq: Square, J: RFunctor) -> dict:
    A, B = sq.L.source, sq.L.target
    upper = all(J.mor[sq.L.mor[f]] == sq.F.mor[f] for f in A.mors)
    lower = all(sq.H.mor[J.mor[g]] == sq.G.mor[g] for g in B.mors)
    rep = analyze_rfun(J)
    return {"upper": upper, "lower": lower, "restriction_functor": rep.restriction_preserving}


def all_fillers(sq: Square, budget=2_000_000):
    """Every restriction functor J with J L = F and H J = G (exhaustive)."""
    from .rcat import enumerate_functors
    L, H, F, G = sq.L, sq.H, sq.F, sq.G
    A, B, C = L.source, L.target, F.target
    inv_obj = {L.obj[a]: a for a in A.objects}
    obj = {b: F.obj[inv_obj[b]] for b in B.objects}
    forced = {L.mor[f]: F.mor[f] for f in A.mors}

    def cands(g):
        if g in forced:
            return {forced[g]}
        return {c for c in C.hom(obj[B.dom(g)], obj[B.cod(g)]) if H.mor[c] == G.mor[g]}

    out = enumerate_functors(B, C, obj, candidates=cands, budget=budget)
    return [J for J in out if all(J.mor[L.mor[f]] == F.mor[f] for f in A.mors)]
