"""Finite restriction categories stored as tables.

A category is given by objects, typed morphism ids, identities, a
composition table ``(g, f) -> g∘f`` and a restriction table.  Law checks are
exhaustive; joins are least upper bounds in the hom-posets, never stored.

Everything generic here is written against a small protocol so that the
concrete bases in :mod:`etale.bases` can be passed wherever an ``ops``
argument appears: ``hom, compose, restrict, identity, dom, cod, join,
idempotents, partial_inverse``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from ._canon import ckey, csorted, show


class StructureError(ValueError):
    """Malformed input: dangling ids, ill-typed tables, missing entries."""


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Violation:
    law: str
    witness: tuple
    detail: str = ""

    def __str__(self):
        w = ", ".join(show(x) for x in self.witness)
        return f"{self.law}: ({w}) {self.detail}".rstrip()


@dataclass
class Report:
    violations: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, law, witness=(), detail=""):
        self.violations.append(Violation(law, tuple(witness), detail))

    def extend(self, other: "Report"):
        self.violations.extend(other.violations)
        self.flags.update(other.flags)

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------- the table


class RCat:
    """A finite restriction category given by explicit tables.

    Morphism ids are arbitrary hashables.  ``labels`` maps ids to display
    strings; ``data`` may carry whatever the ids stand for (for instance the
    base morphisms when the category was enumerated from a base).
    """

    def __init__(
        self,
        objects: Sequence[Hashable],
        morphisms: Iterable[tuple],
        identities: dict,
        composition: dict,
        restriction: dict,
        labels: dict | None = None,
        name: str = "",
    ):
        self.name = name
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise StructureError("duplicate object ids")
        obset = set(self.objects)
        mors, doms, cods = [], [], []
        for m in morphisms:
            f, a, b = m[0], m[1], m[2]
            if a not in obset or b not in obset:
                raise StructureError(f"morphism {show(f)} has dangling endpoint")
            mors.append(f)
            doms.append(a)
            cods.append(b)
        self.mors = tuple(mors)
        self._ix = {f: n for n, f in enumerate(self.mors)}
        if len(self._ix) != len(self.mors):
            raise StructureError("duplicate morphism ids")
        self._dom = dict(zip(mors, doms))
        self._cod = dict(zip(mors, cods))
        self.labels = dict(labels or {})
        homs: dict = {(a, b): [] for a in self.objects for b in self.objects}
        for f in self.mors:
            homs[self._dom[f], self._cod[f]].append(f)
        self._homs = {k: tuple(v) for k, v in homs.items()}

        self._id = {}
        for a in self.objects:
            if a not in identities:
                raise StructureError(f"no identity for object {show(a)}")
            i = identities[a]
            if i not in self._ix or self._dom[i] != a or self._cod[i] != a:
                raise StructureError(f"identity of {show(a)} is ill-typed")
            self._id[a] = i

        n = len(self.mors)
        obj_ix = {o: k for k, o in enumerate(self.objects)}
        dom_a = np.array([obj_ix[self._dom[f]] for f in self.mors], dtype=np.int64)
        cod_a = np.array([obj_ix[self._cod[f]] for f in self.mors], dtype=np.int64)
        if isinstance(composition, np.ndarray):
            C = composition.astype(np.int32)
            if C.shape != (n, n):
                raise StructureError("composition array has the wrong shape")
        else:
            C = np.full((n, n), -1, dtype=np.int32)
            for (g, f), h in composition.items():
                if g not in self._ix or f not in self._ix or h not in self._ix:
                    raise StructureError(f"composition entry ({show(g)},{show(f)}) has dangling id")
                C[self._ix[g], self._ix[f]] = self._ix[h]
        composable = dom_a[:, None] == cod_a[None, :]  # [g, f]
        w = np.argwhere((C >= 0) & ~composable)
        if len(w):
            g, f = w[0]
            raise StructureError(f"composition defined off-type at ({show(self.mors[g])},{show(self.mors[f])})")
        w = np.argwhere((C < 0) & composable)
        if len(w):
            g, f = w[0]
            raise StructureError(f"composition missing at ({show(self.mors[g])},{show(self.mors[f])})")
        if n:
            safe = np.where(C >= 0, C, 0)
            bad = composable & ((dom_a[safe] != dom_a[None, :]) | (cod_a[safe] != cod_a[:, None]))
            w = np.argwhere(bad)
            if len(w):
                g, f = w[0]
                raise StructureError(f"composite ({show(self.mors[g])},{show(self.mors[f])}) has wrong type")
        self._dom_a, self._cod_a = dom_a, cod_a
        R = np.full(n, -1, dtype=np.int32)
        for f in self.mors:
            if f not in restriction:
                raise StructureError(f"no restriction for {show(f)}")
            r = restriction[f]
            if r not in self._ix:
                raise StructureError(f"restriction of {show(f)} is dangling")
            if self._dom[r] != self._dom[f] or self._cod[r] != self._dom[f]:
                raise StructureError(f"restriction of {show(f)} is not an endomorphism of its domain")
            R[self._ix[f]] = self._ix[r]
        self._C = C
        self._R = R
        self._leq = None
        self._compat = None

    # construction from any ops provider -------------------------------

    @classmethod
    def from_ops(cls, ops, objects, name="", labeler=None):
        objects = list(objects)
        morphisms = []
        for a in objects:
            for b in objects:
                for f in ops.hom(a, b):
                    morphisms.append((f, a, b))
        ids = {f for f, _, _ in morphisms}
        if callable(getattr(ops, "vector", None)):
            comp = _vector_composition(ops, objects)
        else:
            comp = {}
            for g, b, c in morphisms:
                for f, a, b2 in morphisms:
                    if b2 == b:
                        h = ops.compose(g, f)
                        if h not in ids:
                            raise StructureError("composite escapes the enumerated hom-sets")
                        comp[g, f] = h
        restr = {f: ops.restrict(f) for f, _, _ in morphisms}
        ident = {a: ops.identity(a) for a in objects}
        labels = {f: labeler(f) for f, _, _ in morphisms} if labeler else None
        return cls(objects, morphisms, ident, comp, restr, labels, name=name)

    def _homs_into(self, b):
        return [f for f in self.mors if self._cod[f] == b]

    # protocol ---------------------------------------------------------

    def hom(self, a, b):
        return self._homs[a, b]

    def dom(self, f):
        return self._dom[f]

    def cod(self, f):
        return self._cod[f]

    def identity(self, a):
        return self._id[a]

    def compose(self, g, f):
        h = self._C[self._ix[g], self._ix[f]]
        if h < 0:
            raise StructureError(f"cannot compose {show(g)} after {show(f)}")
        return self.mors[h]

    def restrict(self, f):
        return self.mors[self._R[self._ix[f]]]

    def idempotents(self, a):
        return tuple(f for f in self._homs[a, a] if self._R[self._ix[f]] == self._ix[f])

    def is_total(self, f):
        return self.restrict(f) == self._id[self._dom[f]]

    def label(self, f):
        return self.labels.get(f, show(f))

    def index(self, f):
        return self._ix[f]

    def __len__(self):
        return len(self.mors)

    def __repr__(self):
        return f"RCat({self.name or '?'}: {len(self.objects)} objects, {len(self.mors)} morphisms)"

    # order ------------------------------------------------------------

    def _order_tables(self):
        if self._leq is None:
            n = len(self.mors)
            C, R = self._C, self._R
            ar = np.arange(n)
            par = np.zeros((n, n), dtype=bool)
            for hs in self._homs.values():
                ix = [self._ix[f] for f in hs]
                par[np.ix_(ix, ix)] = True
            if n:
                # leq[f, g] iff f = g∘restr(f)
                gRf = C[:, R].T  # [f, g] = C[g, R[f]]
                self._leq = par & (gRf == ar[:, None])
                fRg = C[ar[:, None], R[None, :]]  # [f, g] = C[f, R[g]]
                self._compat = par & (fRg == fRg.T)
            else:
                self._leq = par
                self._compat = par
        return self._leq, self._compat

    def leq(self, f, g):
        return bool(self._order_tables()[0][self._ix[f], self._ix[g]])

    def compatible(self, f, g):
        return bool(self._order_tables()[1][self._ix[f], self._ix[g]])

    def lub(self, fam, a=None, b=None):
        """Least upper bound of a parallel family, or None."""
        fam = list(fam)
        if fam:
            a, b = self._dom[fam[0]], self._cod[fam[0]]
        elif a is None:
            raise StructureError("empty family needs an explicit hom-set")
        L = self._order_tables()[0]
        hs = self._homs[a, b]
        fi = [self._ix[f] for f in fam]
        ups = [h for h in hs if all(L[i, self._ix[h]] for i in fi)]
        for u in ups:
            iu = self._ix[u]
            if all(L[iu, self._ix[v]] for v in ups):
                return u
        return None

    def glb(self, fam, a=None, b=None):
        fam = list(fam)
        if fam:
            a, b = self._dom[fam[0]], self._cod[fam[0]]
        L = self._order_tables()[0]
        hs = self._homs[a, b]
        fi = [self._ix[f] for f in fam]
        lows = [h for h in hs if all(L[self._ix[h], i] for i in fi)]
        for u in lows:
            iu = self._ix[u]
            if all(L[self._ix[v], iu] for v in lows):
                return u
        return None

    def join(self, fam, a=None, b=None):
        return self.lub(fam, a, b)

    def partial_inverse(self, f):
        a, b = self._dom[f], self._cod[f]
        rf = self.restrict(f)
        for g in self._homs[b, a]:
            if self.compose(g, f) == rf and self.compose(f, g) == self.restrict(g):
                return g
        return None


def _vector_composition(ops, objects):
    """Composition tables for bases whose maps are partial point maps.

    ``ops.vector(f)`` lists, for each point of the domain in a fixed order,
    the index of its image or -1.  Composites are computed with array
    indexing and identified by an integer code per hom-set.
    """
    npts = {a: ops.npoints(a) for a in objects}
    mats, codes = {}, {}
    for a in objects:
        for b in objects:
            hs = ops.hom(a, b)
            m = np.array([ops.vector(f) for f in hs], dtype=np.int64).reshape(len(hs), npts[a])
            mats[a, b] = m
            w = (npts[b] + 1) ** np.arange(npts[a], dtype=np.int64)
            cd = (m + 1) @ w if len(hs) else np.zeros(0, dtype=np.int64)
            order = np.argsort(cd)
            if len(np.unique(cd)) != len(cd):
                raise StructureError("hom-set enumeration has duplicates")
            codes[a, b] = (cd[order], order, w)
    offset, k = {}, 0
    for a in objects:
        for b in objects:
            offset[a, b] = k
            k += len(ops.hom(a, b))
    C = np.full((k, k), -1, dtype=np.int32)
    for a in objects:
        for b in objects:
            F = mats[a, b]
            if not len(F):
                continue
            for c in objects:
                G = mats[b, c]
                if not len(G):
                    continue
                safe = np.where(F >= 0, F, 0)
                if npts[b]:
                    R = np.where(F[None, :, :] >= 0, G[:, safe], -1)  # [g, f, x]
                else:
                    R = np.full((len(G), len(F), npts[a]), -1, dtype=np.int64)
                sc, order, w = codes[a, c]
                cd = (R + 1) @ w
                pos = np.minimum(np.searchsorted(sc, cd), len(sc) - 1)
                if not (sc[pos] == cd).all():
                    raise StructureError("composite escapes the enumerated hom-sets")
                gi = offset[b, c] + np.arange(len(G))
                fi = offset[a, b] + np.arange(len(F))
                C[np.ix_(gi, fi)] = offset[a, c] + order[pos]
    return C


# ------------------------------------------------------- generic order tools


def leq(ops, f, g) -> bool:
    return f == ops.compose(g, ops.restrict(f))


def compatible(ops, f, g) -> bool:
    return ops.compose(f, ops.restrict(g)) == ops.compose(g, ops.restrict(f))


@dataclass(frozen=True)
class HomOrderFacts:
    leq: bool
    compatible: bool
    bicompatible: bool | None


def hom_order(c, f, g) -> HomOrderFacts:
    if c.dom(f) != c.dom(g) or c.cod(f) != c.cod(g):
        raise StructureError("hom_order needs parallel morphisms")
    le = leq(c, f, g)
    co = compatible(c, f, g)
    fi, gi = c.partial_inverse(f), c.partial_inverse(g)
    bi = None
    if fi is not None and gi is not None:
        bi = co and compatible(c, fi, gi)
    return HomOrderFacts(le, co, bi)


def pairwise_compatible(ops, fam) -> bool:
    fam = list(fam)
    return all(compatible(ops, f, g) for f, g in itertools.combinations(fam, 2))


def bicompatible(ops, f, g) -> bool:
    fi, gi = ops.partial_inverse(f), ops.partial_inverse(g)
    if fi is None or gi is None:
        return False
    return compatible(ops, f, g) and compatible(ops, fi, gi)


@dataclass(frozen=True)
class JoinResult:
    value: Hashable | None
    compatible: bool


def join_family(c, fam, a=None, b=None, strict=False) -> JoinResult:
    fam = list(fam)
    if fam and any(c.dom(f) != c.dom(fam[0]) or c.cod(f) != c.cod(fam[0]) for f in fam):
        raise StructureError("join of a non-parallel family")
    co = pairwise_compatible(c, fam)
    if not co:
        if strict:
            raise StructureError("join requested for an incompatible family")
        return JoinResult(None, False)
    return JoinResult(c.join(fam, a, b), True)


def sheq(ops, f, g):
    """⋁{e ∈ O(dom f) : e ≤ restr(f)restr(g), fe = ge}."""
    a = ops.dom(f)
    bound = ops.compose(ops.restrict(f), ops.restrict(g))
    es = [e for e in ops.idempotents(a) if leq(ops, e, bound) and ops.compose(f, e) == ops.compose(g, e)]
    j = ops.join(es, a, a)
    if j is None:
        raise StructureError("sheq needs joins of restriction idempotents")
    return j


def sheq_meet(ops, f, g):
    e = sheq(ops, f, g)
    return e, ops.compose(f, e)


# ------------------------------------------------------------- validation


def _first(mask):
    idx = np.argwhere(mask)
    return tuple(int(x) for x in idx[0]) if len(idx) else None


def validate_rcat(c: RCat) -> Report:
    """Exhaustive check of the category laws and the four restriction laws."""
    rep = Report()
    n = len(c.mors)
    if n == 0:
        return rep
    C, R = c._C, c._R
    M = c.mors
    ar = np.arange(n)
    dom = np.array([c.objects.index(c._dom[f]) for f in M])
    cod = np.array([c.objects.index(c._cod[f]) for f in M])
    idm = np.array([c._ix[c._id[o]] for o in c.objects])

    bad = C[idm[cod], ar] != ar
    if bad.any():
        f = int(np.argmax(bad))
        rep.add("left unit", (M[idm[cod[f]]], M[f]))
    bad = C[ar, idm[dom]] != ar
    if bad.any():
        f = int(np.argmax(bad))
        rep.add("right unit", (M[f], M[idm[dom[f]]]))

    # associativity: h(gf) = (hg)f, one block per chain of objects a→b→c→d
    byhom = {}
    for k in range(n):
        byhom.setdefault((dom[k], cod[k]), []).append(k)
    byhom = {k: np.array(v) for k, v in byhom.items()}
    no = len(c.objects)
    found = False
    for (a, b), F in byhom.items():
        for cc in range(no):
            G = byhom.get((b, cc))
            if G is None:
                continue
            GF = C[np.ix_(G, F)]
            for d in range(no):
                H = byhom.get((cc, d))
                if H is None:
                    continue
                lhs = C[H[:, None, None], GF[None, :, :]]
                HG = C[np.ix_(H, G)]
                rhs = C[HG[:, :, None], F[None, None, :]]
                w = _first(lhs != rhs)
                if w:
                    rep.add("associativity", (M[H[w[0]]], M[G[w[1]]], M[F[w[2]]]))
                    found = True
                    break
            if found:
                break
        if found:
            break

    same_dom = dom[:, None] == dom[None, :]
    composable = dom[:, None] == cod[None, :]  # [g, f]

    w = _first(C[ar, R] != ar)
    if w:
        rep.add("R1", (M[w[0]],), "f∘restr(f) ≠ f")
    A = C[R[:, None], R[None, :]]
    w = _first(same_dom & (A != A.T))
    if w:
        rep.add("R2", (M[w[0]], M[w[1]]), "restrictions do not commute")
    X = C[:, R]  # [g, f] = g∘restr(f)
    lhs = np.where(same_dom, R[np.where(same_dom, X, 0)], -1)
    rhs = np.where(same_dom, A, -1)
    w = _first(same_dom & (lhs != rhs))
    if w:
        rep.add("R3", (M[w[0]], M[w[1]]), "restr(g∘restr f) ≠ restr(g)∘restr(f)")
    GF = np.where(composable, C, 0)
    lhs = C[R[:, None], ar[None, :]]  # [g, f] = restr(g)∘f
    rhs = C[ar[None, :], R[GF]]  # [g, f] = f∘restr(g∘f)
    w = _first(composable & (lhs != rhs))
    if w:
        rep.add("R4", (M[w[0]], M[w[1]]), "restr(g)∘f ≠ f∘restr(g∘f)")
    return rep


def compatible_families(ops, hs, full_limit=10):
    """Pairwise-compatible subfamilies of a hom-set.

    All of them when the hom-set is small, otherwise every family of size at
    most three.
    """
    hs = list(hs)
    n = len(hs)
    comp = [[compatible(ops, hs[i], hs[j]) for j in range(n)] for i in range(n)]
    out = [()]
    if n <= full_limit:
        def grow(cur, start):
            for k in range(start, n):
                if all(comp[k][j] for j in cur):
                    nxt = cur + (k,)
                    out.append(tuple(hs[j] for j in nxt))
                    grow(nxt, k + 1)
        grow((), 0)
    else:
        for i in range(n):
            out.append((hs[i],))
            for j in range(i + 1, n):
                if comp[i][j]:
                    out.append((hs[i], hs[j]))
                    for k in range(j + 1, n):
                        if comp[i][k] and comp[j][k]:
                            out.append((hs[i], hs[j], hs[k]))
    return out


def check_joins_table(c: RCat, join=None, full_limit=10) -> Report:
    """Join axioms on a table: lubs of compatible families, distributivity.

    ``join(fam, a, b)`` is the join being certified (default: lub search).
    Binary and empty joins are checked on every hom-set, together with both
    distributive laws and compatibility with restriction; larger families
    are checked in full on hom-sets of at most ``full_limit`` elements.
    """
    rep = Report()
    n = len(c.mors)
    if n == 0:
        return rep
    if join is None:
        join = lambda fam, a, b: c.lub(list(fam), a, b)
    L, K = c._order_tables()
    C, R = c._C, c._R
    ix = c._ix
    M = c.mors
    dom = np.array([c.objects.index(c._dom[f]) for f in M])
    cod = np.array([c.objects.index(c._cod[f]) for f in M])
    JT = np.full((n, n), -1, dtype=np.int32)
    bottom = {}
    for (a, b), hs in c._homs.items():
        if not hs:
            continue
        z = join([], a, b)
        if z is None or z not in ix:
            rep.add("empty join exists", (a, b))
            return rep
        zi = ix[z]
        bottom[a, b] = zi
        hi = [ix[f] for f in hs]
        if not L[zi, hi].all():
            rep.add("empty join is least", (z,))
        for k, i in enumerate(hi):
            JT[i, i] = i
            for j in hi[k + 1:]:
                if not K[i, j]:
                    continue
                jn = join([M[i], M[j]], a, b)
                if jn is None or jn not in ix:
                    rep.add("join exists", (M[i], M[j]))
                    return rep
                q = ix[jn]
                ub = L[i] & L[j]
                if not ub[q] or not L[q, ub].all():
                    rep.add("join is least upper bound", (M[i], M[j], jn))
                JT[i, j] = JT[j, i] = q
        if len(hs) <= full_limit:
            for fam in compatible_families(c, hs, full_limit):
                if len(fam) < 3:
                    continue
                jn = join(list(fam), a, b)
                acc = ix[fam[0]]
                for f in fam[1:]:
                    acc = JT[acc, ix[f]]
                if jn is None or jn not in ix or ix[jn] != acc:
                    rep.add("finite join agrees with binary joins", fam)
    if not rep.ok:
        return rep
    obj_ix = {o: k for k, o in enumerate(c.objects)}
    for (a, b), zi in bottom.items():
        for g in range(n):
            if cod[g] == obj_ix[a] and C[zi, g] != bottom[c._dom[M[g]], b]:
                rep.add("0g = 0", (M[zi], M[g]))
                return rep
            if dom[g] == obj_ix[b] and C[g, zi] != bottom[a, c._cod[M[g]]]:
                rep.add("h0 = 0", (M[g], M[zi]))
                return rep
    f1, f2 = np.nonzero((JT >= 0) & (np.arange(n)[:, None] < np.arange(n)[None, :]))
    if not len(f1):
        return rep
    J = JT[f1, f2]
    ar = np.arange(n)
    ok = cod[None, :] == dom[f1][:, None]  # g with f∘g defined
    safe = lambda X: np.where(ok, X, 0)
    lhs = C[J[:, None], ar[None, :]]
    rhs = JT[safe(C[f1[:, None], ar[None, :]]), safe(C[f2[:, None], ar[None, :]])]
    w = np.argwhere(ok & (lhs != rhs))
    if len(w):
        p, g = w[0]
        rep.add("(f1 ∨ f2)g = f1g ∨ f2g", (M[f1[p]], M[f2[p]], M[g]))
    ok = dom[None, :] == cod[f1][:, None]  # h with h∘f defined
    safe = lambda X: np.where(ok, X, 0)
    lhs = C[ar[None, :], J[:, None]]
    rhs = JT[safe(C[ar[None, :], f1[:, None]]), safe(C[ar[None, :], f2[:, None]])]
    w = np.argwhere(ok & (lhs != rhs))
    if len(w):
        p, h = w[0]
        rep.add("h(f1 ∨ f2) = hf1 ∨ hf2", (M[h], M[f1[p]], M[f2[p]]))
    bad = np.nonzero(R[J] != JT[R[f1], R[f2]])[0]
    if len(bad):
        p = bad[0]
        rep.add("restr(f1 ∨ f2) = restr f1 ∨ restr f2", (M[f1[p]], M[f2[p]]))
    return rep


def is_join_restriction(c: RCat, full_limit=10) -> bool:
    return check_joins_table(c, full_limit=full_limit).ok


# ---------------------------------------------------------- classification


@dataclass
class Classification:
    total: dict
    restriction_idempotent: dict
    partial_iso: dict
    etale: dict
    inverse: bool
    etale_category: bool
    join_restriction: bool

    def as_dict(self):
        return {
            "inverse": self.inverse,
            "etale": self.etale_category,
            "join_restriction": self.join_restriction,
        }


def is_etale_map(ops, f) -> bool:
    """f is the join of the partial isomorphisms below it."""
    a, b = ops.dom(f), ops.cod(f)
    below = {ops.compose(f, e) for e in ops.idempotents(a)}
    isos = [g for g in csorted(below) if ops.partial_inverse(g) is not None]
    return ops.join(isos, a, b) == f


def classify(c: RCat) -> Classification:
    jr = is_join_restriction(c)
    total = {f: c.is_total(f) for f in c.mors}
    ridem = {f: c.restrict(f) == f for f in c.mors}
    piso = {f: c.partial_inverse(f) is not None for f in c.mors}
    et = {}
    for f in c.mors:
        a, b = c.dom(f), c.cod(f)
        below = {c.compose(f, e) for e in c.idempotents(a)}
        isos = [g for g in below if piso[g]]
        et[f] = c.lub(isos, a, b) == f
    return Classification(total, ridem, piso, et, all(piso.values()), all(et.values()), jr)


def subcategory(c: RCat, keep, name="") -> RCat:
    keep = set(keep)
    for a in c.objects:
        if c.identity(a) not in keep:
            raise StructureError(f"subcategory misses identity of {show(a)}")
    ms = [f for f in c.mors if f in keep]
    comp = {}
    for g in ms:
        for f in ms:
            if c.dom(g) == c.cod(f):
                h = c.compose(g, f)
                if h not in keep:
                    raise StructureError(f"subcategory not closed under composition at ({show(g)},{show(f)})")
                comp[g, f] = h
    restr = {}
    for f in ms:
        r = c.restrict(f)
        if r not in keep:
            raise StructureError(f"subcategory not closed under restriction at {show(f)}")
        restr[f] = r
    return RCat(
        c.objects,
        [(f, c.dom(f), c.cod(f)) for f in ms],
        {a: c.identity(a) for a in c.objects},
        comp,
        restr,
        {f: c.label(f) for f in ms},
        name=name or c.name,
    )


def piso_subcategory(c: RCat) -> RCat:
    return subcategory(c, [f for f in c.mors if c.partial_inverse(f) is not None], name=f"PIso({c.name})")


def etale_subcategory(c: RCat) -> RCat:
    cl = classify(c)
    return subcategory(c, [f for f in c.mors if cl.etale[f]], name=f"Et({c.name})")


def is_inverse(c: RCat) -> bool:
    return all(c.partial_inverse(f) is not None for f in c.mors)


# ---------------------------------------------------------------- functors


class RFunctor:
    """A functor out of a finite restriction category.

    The target is anything implementing the ops protocol; equality of
    morphisms in the target is Python equality.
    """

    def __init__(self, source: RCat, target, obj: dict, mor: dict, name=""):
        self.source = source
        self.target = target
        self.obj = dict(obj)
        self.mor = dict(mor)
        self.name = name
        for a in source.objects:
            if a not in self.obj:
                raise StructureError(f"functor undefined on object {show(a)}")
        for f in source.mors:
            if f not in self.mor:
                raise StructureError(f"functor undefined on morphism {show(f)}")

    def __call__(self, f):
        return self.mor[f]

    def then(self, other: "RFunctor", name="") -> "RFunctor":
        return RFunctor(
            self.source,
            other.target,
            {a: other.obj[self.obj[a]] for a in self.source.objects},
            {f: other.mor[self.mor[f]] for f in self.source.mors},
            name=name,
        )


def identity_functor(c: RCat) -> RFunctor:
    return RFunctor(c, c, {a: a for a in c.objects}, {f: f for f in c.mors}, name="1")


@dataclass
class FunctorReport:
    functorial: bool
    restriction_preserving: bool
    hyperconnected: bool
    join_preserving: bool
    localic: bool | None
    report: Report

    def as_dict(self):
        return {
            "functorial": self.functorial,
            "restriction_preserving": self.restriction_preserving,
            "hyperconnected": self.hyperconnected,
            "join_preserving": self.join_preserving,
            "localic": self.localic,
        }


def _typed(F: RFunctor, rep: Report) -> bool:
    A, T = F.source, F.target
    ok = True
    for f in A.mors:
        Ff = F.mor[f]
        if T.dom(Ff) != F.obj[A.dom(f)] or T.cod(Ff) != F.obj[A.cod(f)]:
            rep.add("functor typing", (f,))
            ok = False
    return ok


def is_hyperconnected(F: RFunctor) -> bool:
    A, T = F.source, F.target
    for a in A.objects:
        img = {F.mor[e] for e in A.idempotents(a)}
        tgt = set(T.idempotents(F.obj[a]))
        if len(img) != len(A.idempotents(a)) or img != tgt:
            return False
    return True


def is_localic(F: RFunctor) -> bool:
    """Bijective on objects, preserves binary meets, and g = ⋁_f (g ∧ Ff)."""
    A, B = F.source, F.target
    if not isinstance(B, RCat):
        raise StructureError("localic test needs a table target")
    if sorted(map(ckey, F.obj.values())) != sorted(map(ckey, B.objects)) or len(set(F.obj.values())) != len(A.objects):
        return False
    for i in A.objects:
        for j in A.objects:
            hs = A.hom(i, j)
            for f, g in itertools.combinations_with_replacement(hs, 2):
                m = A.glb([f, g])
                n = B.glb([F.mor[f], F.mor[g]])
                if m is None or n is None or F.mor[m] != n:
                    return False
            for g in B.hom(F.obj[i], F.obj[j]):
                parts = [B.glb([g, F.mor[f]]) for f in hs]
                if any(p is None for p in parts) or B.lub(parts, F.obj[i], F.obj[j]) != g:
                    return False
    return True


def analyze_rfun(F: RFunctor, full_limit=8) -> FunctorReport:
    A, T = F.source, F.target
    rep = Report()
    functorial = _typed(F, rep)
    if functorial:
        for a in A.objects:
            if F.mor[A.identity(a)] != T.identity(F.obj[a]):
                rep.add("preserves identities", (a,))
                functorial = False
        for g in A.mors:
            for f in A.mors:
                if A.dom(g) == A.cod(f) and F.mor[A.compose(g, f)] != T.compose(F.mor[g], F.mor[f]):
                    rep.add("preserves composition", (g, f))
                    functorial = False
                    break
            if not functorial:
                break
    rpres = functorial and all(F.mor[A.restrict(f)] == T.restrict(F.mor[f]) for f in A.mors)
    if functorial and not rpres:
        rep.add("preserves restriction", ())
    hyper = rpres and is_hyperconnected(F)
    jp = rpres
    if rpres:
        for i in A.objects:
            for j in A.objects:
                for fam in compatible_families(A, A.hom(i, j), full_limit):
                    s = A.lub(list(fam), i, j)
                    if s is None:
                        continue
                    t = T.join([F.mor[f] for f in fam], F.obj[i], F.obj[j])
                    if t != F.mor[s]:
                        jp = False
                        rep.add("preserves joins", fam)
                        break
                if not jp:
                    break
            if not jp:
                break
    loc = None
    if isinstance(T, RCat):
        loc = rpres and is_localic(F)
    return FunctorReport(functorial, rpres, hyper, jp, loc, rep)


# ------------------------------------------------------ searches over tables


def _signature(c: RCat, f):
    a, b = c.dom(f), c.cod(f)
    r = c.restrict(f)
    return (
        r == f,
        r == c.identity(a),
        a == b,
        len(c.hom(a, b)),
        sum(1 for e in c.idempotents(a) if c.compose(f, e) == f),
        sum(1 for e in c.idempotents(a) if c.leq(e, r)),
    )


def _object_signature(c: RCat, a):
    return (
        len(c.hom(a, a)),
        len(c.idempotents(a)),
        tuple(sorted(len(c.hom(a, b)) for b in c.objects)),
        tuple(sorted(len(c.hom(b, a)) for b in c.objects)),
    )


def find_isomorphism(c: RCat, d: RCat, *, compat: Callable | None = None, fixed_objects: dict | None = None, budget=500_000):
    """Backtracking search for an isomorphism of restriction categories.

    Returns ``(obj_map, mor_map)`` or ``None``; raises ``BudgetExceeded``
    rather than giving up silently.
    """
    if len(c.objects) != len(d.objects) or len(c.mors) != len(d.mors):
        return None
    csig = {f: _signature(c, f) for f in c.mors}
    dsig = {f: _signature(d, f) for f in d.mors}
    if sorted(csig.values()) != sorted(dsig.values()):
        return None
    cos = {a: _object_signature(c, a) for a in c.objects}
    dos = {a: _object_signature(d, a) for a in d.objects}
    nodes = [0]

    def object_maps():
        cobj = list(c.objects)
        if fixed_objects is not None:
            yield dict(fixed_objects)
            return
        def rec(k, used, cur):
            if k == len(cobj):
                yield dict(cur)
                return
            a = cobj[k]
            for b in d.objects:
                if b not in used and dos[b] == cos[a]:
                    cur[a] = b
                    used.add(b)
                    yield from rec(k + 1, used, cur)
                    used.discard(b)
                    del cur[a]
        yield from rec(0, set(), {})

    order = sorted(c.mors, key=lambda f: (not csig[f][0], not csig[f][1], -csig[f][4], ckey(f)))
    # restrictions first so that the restriction constraint is always live
    for om in object_maps():
        m: dict = {}
        used: set = set()

        def consistent(f, g):
            if compat is not None and not compat(f, g):
                return False
            rf = c.restrict(f)
            if rf in m and m[rf] != d.restrict(g):
                return False
            if rf == f and d.restrict(g) != g:
                return False
            for h, hh in m.items():
                if c.dom(h) == c.cod(f):
                    k = c.compose(h, f)
                    if k in m and m[k] != d.compose(hh, g):
                        return False
                    if k == f and d.compose(hh, g) != g:
                        return False
                if c.dom(f) == c.cod(h):
                    k = c.compose(f, h)
                    if k in m and m[k] != d.compose(g, hh):
                        return False
                if c.dom(f) == c.cod(f) and c.compose(f, f) in m and m[c.compose(f, f)] != d.compose(g, g):
                    return False
            return True

        def rec(k):
            nodes[0] += 1
            if nodes[0] > budget:
                raise BudgetExceeded("isomorphism search exceeded its node budget")
            if k == len(order):
                return True
            f = order[k]
            for g in d.hom(om[c.dom(f)], om[c.cod(f)]):
                if g in used or dsig[g] != csig[f]:
                    continue
                if not consistent(f, g):
                    continue
                m[f] = g
                used.add(g)
                if rec(k + 1):
                    return True
                del m[f]
                used.discard(g)
            return False

        if rec(0):
            # full verification; the incremental checks are necessary only
            for g in c.mors:
                for f in c.mors:
                    if c.dom(g) == c.cod(f) and m[c.compose(g, f)] != d.compose(m[g], m[f]):
                        break
                else:
                    continue
                break
            else:
                return om, dict(m)
    return None


def enumerate_functors(c: RCat, d, obj_map: dict, candidates: Callable | None = None, budget=2_000_000):
    """All restriction functors c → d with the given object map."""
    out = []
    order = sorted(c.mors, key=lambda f: (c.restrict(f) != f, ckey(f)))
    nodes = [0]
    m: dict = {}

    def ok(f, g):
        rf = c.restrict(f)
        if rf in m and m[rf] != d.restrict(g):
            return False
        if rf == f and d.restrict(g) != g:
            return False
        if f == c.identity(c.dom(f)) and g != d.identity(obj_map[c.dom(f)]):
            return False
        for h, hh in m.items():
            if c.dom(h) == c.cod(f):
                k = c.compose(h, f)
                if k in m and m[k] != d.compose(hh, g):
                    return False
            if c.dom(f) == c.cod(h):
                k = c.compose(f, h)
                if k in m and m[k] != d.compose(g, hh):
                    return False
        if c.dom(f) == c.cod(f):
            k = c.compose(f, f)
            if k in m and m[k] != d.compose(g, g):
                return False
            if k == f and d.compose(g, g) != g:
                return False
        return True

    def rec(k):
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExceeded("functor search exceeded its node budget")
        if k == len(order):
            out.append(dict(m))
            return
        f = order[k]
        pool = d.hom(obj_map[c.dom(f)], obj_map[c.cod(f)])
        if candidates is not None:
            allowed = candidates(f)
            pool = [g for g in pool if g in allowed]
        for g in pool:
            if ok(f, g):
                m[f] = g
                rec(k + 1)
                del m[f]

    rec(0)
    res = []
    for mm in out:
        F = RFunctor(c, d, obj_map, mm)
        if analyze_rfun(F).restriction_preserving:
            res.append(F)
    return res


# ---------------------------------------------------------- completions


def _down(c, hs, S):
    return frozenset(h for h in hs if any(c.leq(h, s) for s in S))


def jr_completion(i: RCat, mode: str = "j"):
    """Join completion of an inverse category (mode ``j``) or join
    restriction completion of a join inverse category (mode ``jr``).

    Returns ``(category, embedding functor f ↦ ↓f)``.
    """
    if not is_inverse(i):
        raise StructureError("completion input must be an inverse category")
    if mode not in ("j", "jr"):
        raise StructureError(f"unknown completion mode {mode!r}")
    if mode == "jr" and not is_join_restriction(i):
        raise StructureError("mode jr needs a join inverse category")
    pinv = {f: i.partial_inverse(f) for f in i.mors}

    def bicomp(f, g):
        return i.compatible(f, g) and i.compatible(pinv[f], pinv[g])

    def close(a, b, S):
        hs = i.hom(a, b)
        S = set(_down(i, hs, S))
        if mode == "jr":
            S.add(i.lub([], a, b))
            changed = True
            while changed:
                changed = False
                for f, g in itertools.combinations(list(S), 2):
                    if bicomp(f, g):
                        j = i.lub([f, g])
                        if j not in S:
                            S.add(j)
                            changed = True
                S = set(_down(i, hs, S))
        return frozenset(S)

    homs = {}
    for a in i.objects:
        for b in i.objects:
            hs = list(i.hom(a, b))
            found = set()
            n = len(hs)
            # down-closed subsets, compatible (jr) or bicompatible (j)
            def rec(k, cur):
                if k == n:
                    S = frozenset(cur)
                    if _down(i, hs, S) == S:
                        if mode == "j":
                            found.add(S)
                        elif close(a, b, S) == S:
                            found.add(S)
                    return
                rec(k + 1, cur)
                f = hs[k]
                if mode == "j":
                    if all(bicomp(f, g) for g in cur):
                        rec(k + 1, cur + [f])
                elif all(i.compatible(f, g) for g in cur):
                    rec(k + 1, cur + [f])
            rec(0, [])
            homs[a, b] = csorted(found)
    mors = [((a, b, S), a, b) for (a, b), Ss in homs.items() for S in Ss]
    ident = {a: (a, a, close(a, a, [i.identity(a)])) for a in i.objects}
    comp = {}
    for (T, b, c) in mors:
        for (S, a, b2) in mors:
            if b2 == b:
                prods = [i.compose(t, s) for t in T[2] for s in S[2]]
                comp[T, S] = (a, c, close(a, c, prods))
    restr = {}
    for (S, a, b) in mors:
        if mode == "j":
            restr[S] = (a, a, close(a, a, [i.restrict(s) for s in S[2]]))
        else:
            restr[S] = (a, a, close(a, a, [i.lub([i.restrict(s) for s in S[2]], a, a)]))
    labels = {m[0]: "{" + ",".join(i.label(f) for f in csorted(m[0][2])) + "}" for m in mors}
    J = RCat(i.objects, mors, ident, comp, restr, labels, name=f"{mode}({i.name})")
    emb = RFunctor(i, J, {a: a for a in i.objects}, {f: (i.dom(f), i.cod(f), close(i.dom(f), i.cod(f), [f])) for f in i.mors}, name="↓")
    return J, emb


def jr_counit(c: RCat):
    """The functor jr(PIso(c)) → c sending S to ⋁S, with fidelity/fullness flags."""
    p = piso_subcategory(c)
    J, _ = jr_completion(p, "jr")
    mor = {S: c.lub(list(S[2]), S[0], S[1]) for S in J.mors}
    eps = RFunctor(J, c, {a: a for a in c.objects}, mor, name="ε")
    faithful = len(set(mor.values())) == len(mor)
    full = set(mor.values()) == set(c.mors)
    return eps, {"faithful": faithful, "full": full}
