"""Finite sets and finite posets with partial maps.

Both bases share one implementation: a finite set is a discrete poset.
Partial maps are stored as graphs; in posets the domain must be a down-set
and the map monotone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .._canon import ckey, csorted, show
from ..rcat import StructureError
from .core import Base, GlueResult, LocalAtlas


@dataclass(frozen=True)
class Poset:
    carrier: frozenset
    rel: frozenset  # pairs (x, y) with x ≤ y, reflexive and transitive

    @staticmethod
    def make(carrier, rel=()):
        """Reflexive-transitive closure of ``rel`` on ``carrier``."""
        carrier = frozenset(carrier)
        le = {(x, x) for x in carrier} | set(rel)
        changed = True
        while changed:
            changed = False
            for (a, b), (c, d) in itertools.product(list(le), list(le)):
                if b == c and (a, d) not in le:
                    le.add((a, d))
                    changed = True
        for a, b in le:
            if a not in carrier or b not in carrier:
                raise StructureError("order relation mentions a point outside the carrier")
            if a != b and (b, a) in le:
                raise StructureError("order relation is not antisymmetric")
        return Poset(carrier, frozenset(le))

    @staticmethod
    def discrete(carrier):
        carrier = frozenset(carrier)
        return Poset(carrier, frozenset((x, x) for x in carrier))

    @staticmethod
    def chain(n, prefix=""):
        pts = [f"{prefix}{k}" if prefix else k for k in range(n)]
        return Poset.make(pts, [(pts[k], pts[k + 1]) for k in range(n - 1)])

    def le(self, x, y):
        return (x, y) in self.rel

    @cached_property
    def points(self):
        return tuple(csorted(self.carrier))

    @cached_property
    def below(self):
        return {x: frozenset(a for a in self.carrier if (a, x) in self.rel) for x in self.carrier}

    @cached_property
    def linear(self):
        """Points in a linear extension (by number of points below)."""
        return tuple(sorted(self.points, key=lambda x: (len(self.below[x]), ckey(x))))

    @cached_property
    def downsets(self):
        out = []
        for mask in itertools.product((0, 1), repeat=len(self.linear)):
            S = frozenset(x for x, m in zip(self.linear, mask) if m)
            if all(self.below[x] <= S for x in S):
                out.append(S)
        return tuple(csorted(out))

    def is_downset(self, S):
        return all(self.below[x] <= S for x in S)

    @property
    def is_discrete(self):
        return len(self.rel) == len(self.carrier)

    def __len__(self):
        return len(self.carrier)

    def key(self):
        return ("poset", tuple(csorted(self.carrier)), tuple(csorted(p for p in self.rel if p[0] != p[1])))

    def __repr__(self):
        strict = [f"{show(a)}<{show(b)}" for a, b in csorted(self.rel) if a != b]
        return "Poset{" + ",".join(show(x) for x in self.points) + (";" + ",".join(strict) if strict else "") + "}"


@dataclass(frozen=True)
class PMap:
    src: object
    tgt: object
    graph: frozenset

    @cached_property
    def map(self):
        return dict(self.graph)

    @cached_property
    def domain(self):
        return frozenset(self.map)

    def __call__(self, x):
        return self.map.get(x)

    def key(self):
        return ("pmap", self.src.key() if hasattr(self.src, "key") else self.src,
                self.tgt.key() if hasattr(self.tgt, "key") else self.tgt,
                tuple(csorted(self.graph)))

    def __repr__(self):
        return "{" + ",".join(f"{show(a)}↦{show(b)}" for a, b in csorted(self.graph)) + "}"


class PointBase(Base):
    """Partial maps between finite posets (down-closed domain, monotone)."""

    name = "finpos"

    # objects -----------------------------------------------------------
    def poset(self, X) -> Poset:
        return X

    def carrier(self, X):
        return self.poset(X).points

    def make_object(self, poset: Poset):
        return poset

    def admit(self, X):
        if not isinstance(X, Poset):
            raise StructureError("FinPosP objects are posets")
        return X

    def size(self, X):
        return len(self.poset(X).carrier)

    def empty(self):
        return self.make_object(Poset.discrete(()))

    # morphisms ---------------------------------------------------------
    def mor(self, src, tgt, mapping):
        graph = frozenset(mapping.items()) if isinstance(mapping, dict) else frozenset(mapping)
        f = PMap(src, tgt, graph)
        self.check_mor(f)
        return f

    def check_mor(self, f: PMap):
        P, Q = self.poset(f.src), self.poset(f.tgt)
        if len(f.map) != len(f.graph):
            raise StructureError("graph is not a function")
        for x, y in f.graph:
            if x not in P.carrier or y not in Q.carrier:
                raise StructureError(f"graph pair ({show(x)},{show(y)}) leaves the carrier")
        if not P.is_downset(f.domain):
            raise StructureError("domain of definition is not down-closed")
        for x in f.domain:
            for a in P.below[x]:
                if not Q.le(f.map[a], f.map[x]):
                    raise StructureError("partial map is not monotone")

    def dom(self, f):
        return f.src

    def cod(self, f):
        return f.tgt

    def identity(self, a):
        return PMap(a, a, frozenset((x, x) for x in self.carrier(a)))

    def compose(self, g, f):
        if f.tgt != g.src:
            raise StructureError("composition of non-composable partial maps")
        gm = g.map
        return PMap(f.src, g.tgt, frozenset((x, gm[y]) for x, y in f.graph if y in gm))

    def restrict(self, f):
        return PMap(f.src, f.src, frozenset((x, x) for x in f.domain))

    def is_total(self, f):
        return len(f.graph) == len(self.poset(f.src).carrier)

    def idem(self, a, S):
        return PMap(a, a, frozenset((x, x) for x in S))

    def idempotents(self, a):
        return tuple(self.idem(a, S) for S in self.poset(a).downsets)

    def join(self, fam, a=None, b=None):
        fam = list(fam)
        if fam:
            a, b = fam[0].src, fam[0].tgt
        m = {}
        for f in fam:
            if f.src != a or f.tgt != b:
                raise StructureError("join of non-parallel maps")
            for x, y in f.graph:
                if m.setdefault(x, y) != y:
                    return None
        return PMap(a, b, frozenset(m.items()))

    def partial_inverse(self, f):
        inv = {}
        for x, y in f.graph:
            if y in inv:
                return None
            inv[y] = x
        g = PMap(f.tgt, f.src, frozenset(inv.items()))
        try:
            self.check_mor(g)
        except StructureError:
            return None
        return g

    def npoints(self, a):
        return len(self.carrier(a))

    def _pindex(self, a):
        cache = self.__dict__.setdefault("_pindex_cache", {})
        d = cache.get(a)
        if d is None:
            d = cache[a] = {x: k for k, x in enumerate(self.carrier(a))}
        return d

    def vector(self, f):
        ti = self._pindex(f.tgt)
        m = f.map
        return tuple(ti[m[x]] if x in m else -1 for x in self.carrier(f.src))

    def _maps(self, a, b, options):
        """Partial maps a → b where x may go to ``options(x)``."""
        P, Q = self.poset(a), self.poset(b)
        pts = P.linear
        out = []
        cur: dict = {}

        def rec(k):
            if k == len(pts):
                out.append(PMap(a, b, frozenset(cur.items())))
                return
            x = pts[k]
            below = [y for y in P.below[x] if y != x]
            # leaving x undefined keeps everything above it undefined too,
            # since a point is only assigned once all points below it are
            rec(k + 1)
            if all(y in cur for y in below):
                for v in options(x):
                    if all(Q.le(cur[y], v) for y in below):
                        cur[x] = v
                        rec(k + 1)
                        del cur[x]

        rec(0)
        return out

    def hom(self, a, b):
        key = (a, b)
        cache = self.__dict__.setdefault("_hom_cache", {})
        if key not in cache:
            Q = self.poset(b)
            ms = self._maps(a, b, lambda x: Q.points)
            cache[key] = tuple(sorted(ms, key=lambda f: (len(f.graph), ckey(tuple(csorted(f.graph))))))
        return cache[key]

    def sections(self, p):
        A, X = p.src, p.tgt
        fib = {x: [a for a in self.carrier(A) if p.map.get(a) == x] for x in self.carrier(X)}
        ss = self._maps(X, A, lambda x: fib[x])
        return tuple(sorted(ss, key=lambda f: (len(f.graph), ckey(tuple(csorted(f.graph))))))

    # limits and glueings -----------------------------------------------
    def glue_atlas(self, atlas: LocalAtlas) -> GlueResult:
        X = atlas.obj
        P = self.poset(X)
        I = atlas.index
        dom = {ij: atlas.phi[ij].domain for ij in atlas.phi}
        germ = {}
        for x in P.points:
            for i in I:
                if x in dom[i, i]:
                    rep = next(j for j in I if x in dom[i, j])
                    germ[i, x] = (rep, x)
        carrier = frozenset(germ.values())
        rel = set()
        for (i, x), gx in germ.items():
            for (j, y), gy in germ.items():
                if P.le(x, y) and x in dom[i, j]:
                    rel.add((gx, gy))
        apex = self.make_object(Poset(carrier, frozenset(rel)) if not P.is_discrete else Poset.discrete(carrier))
        Apos = self.poset(apex)
        if not P.is_discrete:
            # the order must be a partial order; verified rather than trusted
            chk = Poset.make(carrier, rel)
            if chk.rel != frozenset(rel):
                raise StructureError("germ order is not transitive")
        p = PMap(apex, X, frozenset((g, g[1]) for g in carrier))
        secs, summ = {}, {}
        for i in I:
            s = {x: germ[i, x] for x in dom[i, i]}
            secs[i] = PMap(X, apex, frozenset(s.items()))
            summ[i] = PMap(apex, X, frozenset((g, x) for x, g in s.items()))
        for f in [p, *secs.values(), *summ.values()]:
            self.check_mor(f)
        if not self.is_discrete_fibration(p):
            raise StructureError("germ projection is not a discrete fibration")
        del Apos
        return GlueResult(self, atlas, apex, p, summ, secs)

    def lh_by_points(self, p):
        """Total maps of Alexandrov spaces are étale exactly when they are discrete fibrations."""
        return self.is_discrete_fibration(p)

    def is_discrete_fibration(self, p):
        """Every x' ≤ p(a) lifts uniquely to some a' ≤ a."""
        A, X = self.poset(p.src), self.poset(p.tgt)
        for a in A.carrier:
            if a not in p.map:
                return False
            for x in X.below[p.map[a]]:
                lifts = [b for b in A.below[a] if p.map.get(b) == x]
                if len(lifts) != 1:
                    return False
        return True

    def fiber_product(self, f, g):
        """X ×_Z Y for total f: X → Z, g: Y → Z; π₁ to X, π₂ to Y."""
        if f.tgt != g.tgt:
            raise StructureError("fiber product of maps with different codomains")
        if not (self.is_total(f) and self.is_total(g)):
            raise StructureError("fiber products are taken of total maps")
        X, Y = self.poset(f.src), self.poset(g.src)
        pts = [(x, y) for x in X.points for y in Y.points if f.map[x] == g.map[y]]
        rel = [((x, y), (u, v)) for (x, y) in pts for (u, v) in pts if X.le(x, u) and Y.le(y, v)]
        P = self.make_object(Poset(frozenset(pts), frozenset(rel)))
        pi1 = PMap(P, f.src, frozenset(((x, y), x) for x, y in pts))
        pi2 = PMap(P, g.src, frozenset(((x, y), y) for x, y in pts))
        return FiberProduct(P, pi1, pi2, f, g)

    def pair(self, fp: "FiberProduct", u, v):
        """The map W → X ×_Z Y with components u, v (equal domains, f u = g v)."""
        if u.domain != v.domain:
            raise StructureError("pairing needs components with equal domain")
        out = {}
        for w, x in u.graph:
            y = v.map[w]
            if fp.f.map[x] != fp.g.map[y]:
                raise StructureError("pairing components do not form a cone")
            out[w] = (x, y)
        return PMap(u.src, fp.obj, frozenset(out.items()))


@dataclass(frozen=True)
class FiberProduct:
    obj: object
    pi1: object
    pi2: object
    f: object
    g: object
    parts: tuple | None = None


class FinPosP(PointBase):
    name = "finpos"


class FinSetP(PointBase):
    """Finite sets (frozensets of labels) and partial functions."""

    name = "finset"

    def poset(self, X):
        cache = self.__dict__.setdefault("_poset_cache", {})
        P = cache.get(X)
        if P is None:
            P = cache[X] = Poset.discrete(X)
        return P

    def make_object(self, poset):
        return frozenset(poset.carrier)

    def admit(self, X):
        if not isinstance(X, frozenset):
            raise StructureError("FinSetP objects are frozensets")
        return X

    def check_mor(self, f):
        if len(f.map) != len(f.graph):
            raise StructureError("graph is not a function")
        for x, y in f.graph:
            if x not in f.src or y not in f.tgt:
                raise StructureError(f"graph pair ({show(x)},{show(y)}) leaves the carrier")

    def is_total(self, f):
        return len(f.graph) == len(f.src)

    def carrier(self, X):
        return tuple(csorted(X))

    def partial_inverse(self, f):
        inv = {}
        for x, y in f.graph:
            if y in inv:
                return None
            inv[y] = x
        return PMap(f.tgt, f.src, frozenset(inv.items()))


def finset(*labels):
    return frozenset(labels)


def set_of_size(n):
    return frozenset(range(n))
