"""Finite locales (finite distributive lattices) and partial locale maps.

A partial map f: L ⇀ M is stored by its inverse image f*: M → L, which
preserves binary meets and all joins but not necessarily the top; f*(⊤) is
the domain of definition.  Composition, restriction, joins and glueings are
computed on inverse images.  Hom-set enumeration, fiber products, pairings
and partial inverses go through the points (join-irreducibles): a finite
distributive lattice is the lattice of down-sets of its poset of
join-irreducibles, and partial locale maps are exactly partial monotone
maps of points defined on a down-set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .._canon import csorted, show
from ..rcat import StructureError
from .core import Base, GlueResult, LocalAtlas
from .points import FinPosP, PMap, Poset, FiberProduct


@dataclass(frozen=True)
class Lattice:
    elements: frozenset
    rel: frozenset

    @staticmethod
    def make(elements, rel=()):
        P = Poset.make(elements, rel)
        return Lattice(P.carrier, P.rel)

    @staticmethod
    def chain(n):
        return Lattice.make(range(n), [(k, k + 1) for k in range(n - 1)])

    @staticmethod
    def of_downsets(P: Poset):
        ds = P.downsets
        return Lattice(frozenset(ds), frozenset((a, b) for a in ds for b in ds if a <= b))

    @staticmethod
    def boolean(points):
        return Lattice.of_downsets(Poset.discrete(points))

    @staticmethod
    def m3():
        return Lattice.make(["0", "a", "b", "c", "1"], [("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")])

    def le(self, a, b):
        return (a, b) in self.rel

    @cached_property
    def points(self):
        return tuple(csorted(self.elements))

    @cached_property
    def _tables(self):
        E = self.points
        up = {a: {b for b in E if (a, b) in self.rel} for a in E}
        down = {a: {b for b in E if (b, a) in self.rel} for a in E}
        meet, join = {}, {}
        for a in E:
            for b in E:
                lo = down[a] & down[b]
                m = [x for x in lo if all((y, x) in self.rel for y in lo)]
                hi = up[a] & up[b]
                j = [x for x in hi if all((x, y) in self.rel for y in hi)]
                meet[a, b] = m[0] if len(m) == 1 else None
                join[a, b] = j[0] if len(j) == 1 else None
        return meet, join

    def meet(self, a, b):
        return self._tables[0][a, b]

    def join(self, a, b):
        return self._tables[1][a, b]

    @cached_property
    def top(self):
        t = [a for a in self.points if all(self.le(b, a) for b in self.points)]
        return t[0] if t else None

    @cached_property
    def bottom(self):
        t = [a for a in self.points if all(self.le(a, b) for b in self.points)]
        return t[0] if t else None

    def join_all(self, xs):
        acc = self.bottom
        for x in xs:
            acc = self.join(acc, x)
        return acc

    def meet_all(self, xs):
        acc = self.top
        for x in xs:
            acc = self.meet(acc, x)
        return acc

    def check(self):
        """Raise unless this is a distributive lattice."""
        if not self.elements:
            raise StructureError("a lattice has at least one element")
        meet, join = self._tables
        if any(v is None for v in meet.values()) or any(v is None for v in join.values()):
            raise StructureError("not a lattice: some pair lacks a meet or join")
        E = self.points
        for a, b, c in itertools.product(E, repeat=3):
            if meet[a, join[b, c]] != join[meet[a, b], meet[a, c]]:
                raise StructureError(f"lattice is not distributive at ({show(a)},{show(b)},{show(c)})")

    @cached_property
    def irreducibles(self):
        """Join-irreducible elements."""
        out = []
        for a in self.points:
            if a == self.bottom:
                continue
            below = [b for b in self.points if self.le(b, a) and b != a]
            if self.join_all(below) != a:
                out.append(a)
        return tuple(out)

    @cached_property
    def spectrum(self) -> Poset:
        J = self.irreducibles
        return Poset(frozenset(J), frozenset((a, b) for a in J for b in J if self.le(a, b)))

    @cached_property
    def jset(self):
        return {a: frozenset(j for j in self.irreducibles if self.le(j, a)) for a in self.points}

    @cached_property
    def of_jset(self):
        return {v: k for k, v in self.jset.items()}

    def __len__(self):
        return len(self.elements)

    def key(self):
        return ("lattice", tuple(csorted(self.elements)), tuple(csorted(p for p in self.rel if p[0] != p[1])))

    def __repr__(self):
        return f"Lattice({len(self.elements)})"


@dataclass(frozen=True)
class LocMap:
    """Partial locale map src ⇀ tgt given by inverse image tgt → src."""

    src: Lattice
    tgt: Lattice
    inv: frozenset

    @cached_property
    def star(self):
        return dict(self.inv)

    def __call__(self, b):
        return self.star[b]

    def key(self):
        return ("locmap", self.src.key(), self.tgt.key(), tuple(csorted(self.inv)))

    def __repr__(self):
        return "⟨" + ",".join(f"{show(b)}↦{show(a)}" for b, a in csorted(self.inv)) + "⟩"


class FinLocP(Base):
    name = "finloc"

    def __init__(self):
        self._pos = FinPosP()
        self._admitted = set()

    def admit(self, L):
        if not isinstance(L, Lattice):
            raise StructureError("FinLocP objects are lattices")
        if L not in self._admitted:
            L.check()
            self._admitted.add(L)
        return L

    def size(self, L):
        return len(L)

    def empty(self):
        return Lattice.make(["⊥"])

    # inverse-image side --------------------------------------------------
    def mor(self, src, tgt, star):
        f = LocMap(src, tgt, frozenset(star.items()) if isinstance(star, dict) else frozenset(star))
        self.check_mor(f)
        return f

    def check_mor(self, f: LocMap):
        L, M = f.src, f.tgt
        st = f.star
        if set(st) != set(M.elements):
            raise StructureError("inverse image not defined on the whole target")
        if st[M.bottom] != L.bottom:
            raise StructureError("inverse image does not preserve the empty join")
        for a in M.points:
            for b in M.points:
                if st[M.meet(a, b)] != L.meet(st[a], st[b]):
                    raise StructureError("inverse image does not preserve binary meets")
                if st[M.join(a, b)] != L.join(st[a], st[b]):
                    raise StructureError("inverse image does not preserve joins")

    def dom(self, f):
        return f.src

    def cod(self, f):
        return f.tgt

    def identity(self, L):
        return LocMap(L, L, frozenset((a, a) for a in L.elements))

    def compose(self, g, f):
        if f.tgt != g.src:
            raise StructureError("composition of non-composable locale maps")
        fs = f.star
        return LocMap(f.src, g.tgt, frozenset((c, fs[b]) for c, b in g.inv))

    def domain(self, f):
        return f.star[f.tgt.top]

    def restrict(self, f):
        L = f.src
        u = self.domain(f)
        return LocMap(L, L, frozenset((a, L.meet(u, a)) for a in L.elements))

    def idem(self, L, u):
        return LocMap(L, L, frozenset((a, L.meet(u, a)) for a in L.elements))

    def idempotents(self, L):
        return tuple(self.idem(L, u) for u in L.points)

    def open_of(self, e):
        return self.domain(e)

    def is_total(self, f):
        return self.domain(f) == f.src.top

    def join(self, fam, a=None, b=None):
        fam = list(fam)
        if fam:
            a, b = fam[0].src, fam[0].tgt
        for f in fam:
            if f.src != a or f.tgt != b:
                raise StructureError("join of non-parallel maps")
        for f, g in itertools.combinations(fam, 2):
            if self.compose(f, self.restrict(g)) != self.compose(g, self.restrict(f)):
                return None
        return LocMap(a, b, frozenset((y, a.join_all(f.star[y] for f in fam)) for y in b.elements))

    # point side ----------------------------------------------------------
    def spectrum(self, L):
        return L.spectrum

    def to_points(self, f: LocMap) -> PMap:
        L, M = f.src, f.tgt
        dom = self.domain(f)
        g = {}
        for j in L.irreducibles:
            if not L.le(j, dom):
                continue
            img = M.meet_all([b for b in M.points if L.le(j, f.star[b])])
            if img not in M.irreducibles:
                raise StructureError("inverse image does not come from a point map")
            g[j] = img
        return PMap(L.spectrum, M.spectrum, frozenset(g.items()))

    def from_points(self, L, M, g: PMap) -> LocMap:
        star = {}
        for b in M.elements:
            S = M.jset[b]
            star[b] = L.of_jset[frozenset(j for j, q in g.graph if q in S)]
        return LocMap(L, M, frozenset(star.items()))

    def lh_by_points(self, f):
        return self._pos.is_discrete_fibration(self.to_points(f))

    def npoints(self, L):
        return len(L.irreducibles)

    def vector(self, f):
        g = self.to_points(f)
        Jt = {j: k for k, j in enumerate(self._pos.carrier(f.tgt.spectrum))}
        return tuple(Jt[g.map[j]] if j in g.map else -1 for j in self._pos.carrier(f.src.spectrum))

    def hom(self, a, b):
        cache = self.__dict__.setdefault("_hom_cache", {})
        key = (a, b)
        if key not in cache:
            pm = self._pos.hom(a.spectrum, b.spectrum)
            cache[key] = tuple(self.from_points(a, b, g) for g in pm)
        return cache[key]

    def partial_inverse(self, f):
        gi = self._pos.partial_inverse(self.to_points(f))
        if gi is None:
            return None
        return self.from_points(f.tgt, f.src, gi)

    def sections(self, p):
        ss = self._pos.sections(self.to_points(p))
        return tuple(self.from_points(p.tgt, p.src, s) for s in ss)

    def fiber_product(self, f, g):
        if not (self.is_total(f) and self.is_total(g)):
            raise StructureError("fiber products are taken of total maps")
        fp = self._pos.fiber_product(self.to_points(f), self.to_points(g))
        P = Lattice.of_downsets(fp.obj)
        down = {pt: fp.obj.below[pt] for pt in fp.obj.carrier}
        pi1 = self.from_points(P, f.src, PMap(P.spectrum, f.src.spectrum, frozenset((down[pt], pt[0]) for pt in fp.obj.carrier)))
        pi2 = self.from_points(P, g.src, PMap(P.spectrum, g.src.spectrum, frozenset((down[pt], pt[1]) for pt in fp.obj.carrier)))
        return FiberProduct(P, pi1, pi2, f, g)

    def pair(self, fp: FiberProduct, u, v):
        uu, vv = self.to_points(u), self.to_points(v)
        if uu.domain != vv.domain:
            raise StructureError("pairing needs components with equal domain")
        P = fp.obj
        below = {}
        for d in P.irreducibles:
            # d is the principal down-set of a single pair of points
            top = [pt for pt in d if all(
                (q[0], pt[0]) in fp.f.src.rel and (q[1], pt[1]) in fp.g.src.rel for q in d)]
            below[top[0]] = d
        g = {}
        for w, x in uu.graph:
            y = vv.map[w]
            if (x, y) not in below:
                raise StructureError("pairing components do not form a cone")
            g[w] = below[x, y]
        return self.from_points(u.src, P, PMap(u.src.spectrum, P.spectrum, frozenset(g.items())))

    # glueing -------------------------------------------------------------
    def glue_atlas(self, atlas: LocalAtlas) -> GlueResult:
        X = atlas.obj
        I = atlas.index
        phi = {ij: self.open_of(e) for ij, e in atlas.phi.items()}
        E = X.points
        fams = []

        def rec(k, cur):
            if k == len(I):
                fams.append(tuple(cur))
                return
            i = I[k]
            for t in E:
                if not X.le(t, phi[i, i]):
                    continue
                ok = True
                for m in range(k):
                    j = I[m]
                    if not (X.le(X.meet(cur[m], phi[i, j]), t) and X.le(X.meet(t, phi[i, j]), cur[m])):
                        ok = False
                        break
                if ok:
                    rec(k + 1, cur + [t])

        rec(0, [])
        els = frozenset(fams)
        rel = frozenset((a, b) for a in fams for b in fams if all(X.le(x, y) for x, y in zip(a, b)))
        A = Lattice(els, rel)
        self.admit(A)
        p = LocMap(A, X, frozenset((psi, tuple(X.meet(psi, phi[i, i]) for i in I)) for psi in E))
        summ, secs = {}, {}
        for n, i in enumerate(I):
            summ[i] = LocMap(A, X, frozenset((psi, tuple(X.meet(psi, phi[i, j]) for j in I)) for psi in E))
            secs[i] = LocMap(X, A, frozenset((th, th[n]) for th in fams))
        for f in [p, *summ.values(), *secs.values()]:
            self.check_mor(f)
        return GlueResult(self, atlas, A, p, summ, secs)
