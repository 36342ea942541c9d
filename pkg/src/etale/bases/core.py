"""Machinery shared by every base: atlases, glueings, sections, pullbacks.

A base is an object implementing the ops protocol of :mod:`etale.rcat`
together with ``glue_atlas``, ``fiber_product``, ``pair``, ``sections`` and
``admit``.  Everything in this module is written against that protocol
only, so each construction works verbatim in every bundled base.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Hashable

from .._canon import csorted, show
from ..rcat import RCat, Report, StructureError, leq, compatible, validate_rcat


class Base:
    """Default implementations in terms of the primitive operations."""

    name = "base"

    def leq(self, f, g):
        return leq(self, f, g)

    def compatible(self, f, g):
        return compatible(self, f, g)

    def is_total(self, f):
        return self.restrict(f) == self.identity(self.dom(f))

    def meet_idem(self, d, e):
        return self.compose(d, e)

    def top_idem(self, a):
        return self.identity(a)

    def bottom_idem(self, a):
        return self.join([], a, a)

    def sections(self, p):
        """All partial sections of ``p`` by filtering a hom-set."""
        a, x = self.dom(p), self.cod(p)
        return tuple(s for s in self.hom(x, a) if self.compose(p, s) == self.restrict(s))

    def size(self, a):
        return len(self.idempotents(a))

    def as_rcat(self, objects, name=""):
        return RCat.from_ops(self, objects, name=name or self.name)

    def fneq(self, f, g):
        return sheq_in(self, f, g)


def sheq_in(ops, f, g):
    a = ops.dom(f)
    bound = ops.compose(ops.restrict(f), ops.restrict(g))
    es = [e for e in ops.idempotents(a) if leq(ops, e, bound) and ops.compose(f, e) == ops.compose(g, e)]
    return ops.join(es, a, a)


# ------------------------------------------------------------------ atlases


@dataclass(frozen=True)
class LocalAtlas:
    obj: Hashable
    index: tuple
    phi: dict

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(self.index))

    def __getitem__(self, ij):
        return self.phi[ij]

    def __hash__(self):
        return hash((self.obj, self.index))

    def __eq__(self, other):
        return (
            isinstance(other, LocalAtlas)
            and self.obj == other.obj
            and self.index == other.index
            and all(self.phi[k] == other.phi[k] for k in self.phi)
        )


def validate_atlas(base, atlas: LocalAtlas) -> Report:
    rep = Report()
    X = atlas.obj
    idem = set(base.idempotents(X))
    I = atlas.index
    for i in I:
        for j in I:
            if (i, j) not in atlas.phi:
                rep.add("atlas entry missing", (i, j))
                return rep
            if atlas.phi[i, j] not in idem:
                rep.add("atlas entry is not a restriction idempotent", (i, j))
                return rep
    for i, j in itertools.combinations(I, 2):
        if atlas.phi[i, j] != atlas.phi[j, i]:
            rep.add("atlas symmetry", (i, j))
    for i in I:
        for j in I:
            for k in I:
                if not base.leq(base.compose(atlas.phi[j, k], atlas.phi[i, j]), atlas.phi[i, k]):
                    rep.add("atlas cocycle", (i, j, k))
    return rep


@dataclass
class GlueResult:
    """A local homeomorphism ``p = ⋁ p_i`` with basis ``s_i = p_i*``."""

    base: object
    atlas: LocalAtlas
    apex: Hashable
    p: Hashable
    summands: dict
    sections: dict

    @property
    def index(self):
        return self.atlas.index

    def s(self, i):
        return self.sections[i]


def check_glue(base, g: GlueResult) -> Report:
    rep = Report()
    X, A = g.atlas.obj, g.apex
    if base.dom(g.p) != A or base.cod(g.p) != X:
        rep.add("glue typing", ())
        return rep
    if not base.is_total(g.p):
        rep.add("projection total", (g.p,))
    if base.join([g.summands[i] for i in g.index], A, X) != g.p:
        rep.add("p = ⋁ p_i", ())
    for i in g.index:
        pi, si = g.summands[i], g.sections[i]
        if base.partial_inverse(pi) != si:
            rep.add("s_i is the partial inverse of p_i", (i,))
        if base.compose(g.p, si) != base.restrict(si):
            rep.add("s_i is a partial section", (i,))
        for j in g.index:
            if base.compose(g.summands[j], si) != g.atlas.phi[i, j]:
                rep.add("p_j s_i = φ_ij", (i, j))
    if not basis_check(base, g.p, [g.sections[i] for i in g.index]):
        rep.add("basis p = ⋁ s_i*", ())
    return rep


def glue(base, atlas: LocalAtlas, verify=True) -> GlueResult:
    rep = validate_atlas(base, atlas)
    if not rep.ok:
        raise StructureError(f"invalid atlas: {rep.violations[0]}")
    g = base.glue_atlas(atlas)
    if verify:
        chk = check_glue(base, g)
        if not chk.ok:
            raise StructureError(f"glueing failed its own invariants: {chk.violations[0]}")
    return g


def atlas_of_lh(base, p, summands) -> LocalAtlas:
    """φ_ij = p_j s_i for a decomposition of a total map into partial isos."""
    summands = dict(summands) if isinstance(summands, dict) else dict(enumerate(summands))
    A, X = base.dom(p), base.cod(p)
    if not base.is_total(p):
        raise StructureError("atlas_of_lh needs a total map")
    inv = {}
    for i, pi in summands.items():
        s = base.partial_inverse(pi)
        if s is None:
            raise StructureError(f"summand {show(i)} is not a partial isomorphism")
        inv[i] = s
    if base.join(list(summands.values()), A, X) != p:
        raise StructureError("summands do not join to p")
    idx = tuple(summands)
    phi = {(i, j): base.compose(summands[j], inv[i]) for i in idx for j in idx}
    return LocalAtlas(X, idx, phi)


def as_glue(base, p, summands) -> GlueResult:
    """View a decomposed local homeomorphism as a glueing of its own atlas."""
    atlas = atlas_of_lh(base, p, summands)
    summands = dict(summands) if isinstance(summands, dict) else dict(enumerate(summands))
    secs = {i: base.partial_inverse(summands[i]) for i in atlas.index}
    return GlueResult(base, atlas, base.dom(p), p, summands, secs)


def compatibility_violation(base, g: GlueResult, fam: dict):
    phi = g.atlas.phi
    for i in g.index:
        if base.compose(fam[i], phi[i, i]) != fam[i]:
            return (i, i)
        for j in g.index:
            if not base.leq(base.compose(fam[j], phi[i, j]), fam[i]):
                return (j, i)
    return None


def induced_map(base, g: GlueResult, fam: dict, check=True):
    """The unique f out of the glueing apex with f s_i = f_i."""
    if not g.index:
        raise StructureError("induced map from an empty glueing needs an explicit codomain")
    B = base.cod(fam[g.index[0]])
    return induced_map_to(base, g, fam, B, check)


def induced_map_to(base, g: GlueResult, fam: dict, B, check=True):
    if check:
        w = compatibility_violation(base, g, fam)
        if w is not None:
            raise StructureError(f"family violates the atlas compatibility at {w}")
    parts = [base.compose(fam[i], g.summands[i]) for i in g.index]
    f = base.join(parts, g.apex, B)
    if f is None:
        raise StructureError("induced family is not compatible")
    return f


# ---------------------------------------------------------------- sections


def basis_check(base, p, subset) -> bool:
    """A family of partial sections is a basis iff p = ⋁ s_i*."""
    A, X = base.dom(p), base.cod(p)
    invs = []
    for s in subset:
        if base.compose(p, s) != base.restrict(s):
            return False
        si = base.partial_inverse(s)
        if si is None:
            return False
        invs.append(si)
    return base.join(invs, A, X) == p


def is_local_homeomorphism(base, p) -> bool:
    """Total and a join of the partial isomorphisms below it."""
    if not base.is_total(p):
        return False
    fast = getattr(base, "lh_by_points", None)
    if fast is not None:
        return fast(p)
    return lh_decomposition(base, p) is not None


def lh_decomposition(base, p):
    """A decomposition of ``p`` into partial isos, or None.

    The summands are the partial inverses of all nonempty partial sections.
    """
    A, X = base.dom(p), base.cod(p)
    secs = [s for s in base.sections(p) if s != base.join([], X, A)]
    invs = []
    for s in secs:
        si = base.partial_inverse(s)
        if si is None:
            return None
        invs.append(si)
    if base.join(invs, A, X) != p:
        return None
    return {s: si for s, si in zip(secs, invs)}


def lh_glue(base, p) -> GlueResult:
    """A glueing presentation of a local homeomorphism using all its sections."""
    d = lh_decomposition(base, p)
    if d is None or not base.is_total(p):
        raise StructureError("not a local homeomorphism")
    idx = csorted(d)
    return as_glue(base, p, {s: d[s] for s in idx})


class SingletonFamilies:
    """Sections of a local homeomorphism ↔ idempotent families over a basis."""

    def __init__(self, base, p, basis):
        self.base = base
        self.p = p
        self.basis = list(basis)
        if not basis_check(base, p, self.basis):
            raise StructureError("not a basis")
        self.X = base.cod(p)
        self.A = base.dom(p)
        n = len(self.basis)
        self.phi = [[sheq_in(base, self.basis[i], self.basis[j]) for j in range(n)] for i in range(n)]

    def to_family(self, s):
        return tuple(sheq_in(self.base, s, si) for si in self.basis)

    def valid(self, theta) -> bool:
        b = self.base
        n = len(self.basis)
        for i in range(n):
            for j in range(n):
                if not b.leq(b.compose(theta[j], theta[i]), self.phi[i][j]):
                    return False
                if not b.leq(b.compose(theta[j], self.phi[i][j]), theta[i]):
                    return False
        return True

    def from_family(self, theta):
        if not self.valid(theta):
            raise StructureError("family violates the singleton conditions")
        b = self.base
        return b.join([b.compose(s, t) for s, t in zip(self.basis, theta)], self.X, self.A)

    def families(self):
        b = self.base
        O = b.idempotents(self.X)
        n = len(self.basis)
        out = []

        def rec(k, cur):
            if k == n:
                out.append(tuple(cur))
                return
            for e in O:
                ok = True
                for j in range(k):
                    if not (b.leq(b.compose(e, cur[j]), self.phi[j][k])
                            and b.leq(b.compose(cur[j], self.phi[j][k]), e)
                            and b.leq(b.compose(e, self.phi[j][k]), cur[j])):
                        ok = False
                        break
                if ok and b.leq(e, self.phi[k][k]):
                    rec(k + 1, cur + [e])

        rec(0, [])
        return out


def singleton_families(base, p, basis) -> SingletonFamilies:
    return SingletonFamilies(base, p, basis)


# ------------------------------------------------------ pullback, composite


@dataclass
class PullbackSquare:
    q: GlueResult
    g: Hashable  # apex of q → apex of p
    f: Hashable
    p: GlueResult


def pullback_lh(base, pg: GlueResult, f) -> PullbackSquare:
    """Pullback of a glued local homeomorphism along a total map."""
    if not base.is_total(f):
        raise StructureError("pullback along a non-total map")
    if base.cod(f) != pg.atlas.obj:
        raise StructureError("pullback: codomains do not match")
    X1 = base.dom(f)
    I = pg.index
    psi = {(i, j): base.restrict(base.compose(pg.atlas.phi[i, j], f)) for i in I for j in I}
    q = glue(base, LocalAtlas(X1, I, psi))
    fam = {i: base.compose(pg.sections[i], f) for i in I}
    g = induced_map_to(base, q, fam, pg.apex)
    return PullbackSquare(q, g, f, pg)


def check_pullback(base, sq: PullbackSquare, sample) -> Report:
    """Square commutes, and every total cone from the sample factors uniquely."""
    rep = Report()
    p, q, g, f = sq.p.p, sq.q.p, sq.g, sq.f
    if base.compose(p, g) != base.compose(f, q):
        rep.add("pullback square commutes", ())
        return rep
    if not base.is_total(g):
        rep.add("pullback mediator total", (g,))
    A, X1, A1 = sq.p.apex, base.dom(f), sq.q.apex
    for W in sample:
        totals_A = [u for u in base.hom(W, A) if base.is_total(u)]
        totals_X1 = [v for v in base.hom(W, X1) if base.is_total(v)]
        cands = [h for h in base.hom(W, A1) if base.is_total(h)]
        for u in totals_A:
            for v in totals_X1:
                if base.compose(p, u) != base.compose(f, v):
                    continue
                meds = [h for h in cands if base.compose(g, h) == u and base.compose(q, h) == v]
                if len(meds) != 1:
                    rep.add("pullback universality", (W, u, v), f"{len(meds)} mediators")
                    return rep
    return rep


def pullback_section(base, sq: PullbackSquare, s):
    """f*(s): the unique partial section of q lying over s∘f."""
    t = [h for h in base.sections(sq.q.p) if base.compose(sq.g, h) == base.compose(s, sq.f)]
    if len(t) != 1:
        raise StructureError("pulled-back section not unique")
    return t[0]


def compose_lh(base, pg: GlueResult, qg: GlueResult):
    """Basis and atlas of p∘q for glued p: A → X and q: A' → A."""
    if qg.atlas.obj != pg.apex:
        raise StructureError("compose_lh: q must land in the apex of p")
    basis = {}
    for i in pg.index:
        for k in qg.index:
            basis[i, k] = base.compose(qg.sections[k], pg.sections[i])
    phi = {}
    for (i, k) in basis:
        for (j, l) in basis:
            phi[(i, k), (j, l)] = base.compose(
                pg.atlas.phi[i, j], base.restrict(base.compose(qg.atlas.phi[k, l], pg.sections[i]))
            )
    atlas = LocalAtlas(pg.atlas.obj, tuple(basis), phi)
    pq = base.compose(pg.p, qg.p)
    return basis, atlas, pq


# --------------------------------------------------------- isos over a base


def total_isos(base, A, B):
    out = []
    for h in base.hom(A, B):
        if base.is_total(h):
            hi = base.partial_inverse(h)
            if hi is not None and base.is_total(hi):
                out.append(h)
    return out


def iso_over(base, p, q):
    """All isos h: dom p → dom q with q h = p (search over the hom-set)."""
    return [h for h in total_isos(base, base.dom(p), base.dom(q)) if base.compose(q, h) == p]


def canonical_iso(base, g1: GlueResult, g2: GlueResult):
    """The induced comparison between two glueings of the same atlas."""
    if g1.index != g2.index:
        raise StructureError("glueings indexed differently")
    h = induced_map_to(base, g1, dict(g2.sections), g2.apex)
    return h


# -------------------------------------------------------------- generation


def random_atlas(base, X, n, rng: random.Random, index=None) -> LocalAtlas:
    O = list(base.idempotents(X))
    idx = tuple(index) if index is not None else tuple(range(n))
    phi = {}
    for i in idx:
        phi[i, i] = rng.choice(O)
    for a, b in itertools.combinations(idx, 2):
        bound = base.compose(phi[a, a], phi[b, b])
        below = [e for e in O if base.leq(e, bound)]
        phi[a, b] = phi[b, a] = rng.choice(below)
    changed = True
    while changed:
        changed = False
        for i in idx:
            for j in idx:
                for k in idx:
                    m = base.compose(phi[j, k], phi[i, j])
                    if not base.leq(m, phi[i, k]):
                        e = base.join([phi[i, k], m], X, X)
                        phi[i, k] = phi[k, i] = e
                        changed = True
    return LocalAtlas(X, idx, phi)


def validate_base(base, sample, atlases=2, seed=0, full_limit=10) -> Report:
    """Category laws, join laws and glueing round-trips on a finite sample."""
    from ..rcat import check_joins_table

    rep = Report()
    for X in sample:
        try:
            base.admit(X)
        except StructureError as e:
            rep.add("object admission", (X,), str(e))
    if not rep.ok:
        return rep
    c = base.as_rcat(sample)
    rep.extend(validate_rcat(c))
    rep.extend(check_joins_table(c, join=lambda fam, a, b: base.join(list(fam), a, b), full_limit=full_limit))
    rng = random.Random(seed)
    for X in sample:
        for n in range(atlases):
            at = random_atlas(base, X, n + 1, rng)
            try:
                g = glue(base, at)
            except StructureError as e:
                rep.add("glue", (X,), str(e))
                continue
            back = atlas_of_lh(base, g.p, g.summands)
            if back != at:
                rep.add("glue round-trip", (X,))
    return rep
