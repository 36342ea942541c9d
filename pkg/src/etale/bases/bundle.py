"""Bundles over an inner base: total maps x: X' → X and commuting squares.

Restriction, joins, fiber products and glueings are all computed
componentwise in the inner base.
"""

from __future__ import annotations

from dataclasses import dataclass

from .._canon import show
from ..rcat import StructureError
from .core import Base, GlueResult, LocalAtlas, glue, induced_map_to
from .points import FiberProduct


@dataclass(frozen=True)
class BunObj:
    top: object
    bot: object
    x: object  # total inner map top → bot

    def key(self):
        return ("bundle", _k(self.top), _k(self.bot), _k(self.x))

    def __repr__(self):
        return f"Bun({show(self.top)}→{show(self.bot)})"


@dataclass(frozen=True)
class BunMor:
    src: BunObj
    tgt: BunObj
    top: object
    bot: object

    def key(self):
        return ("bunmor", self.src.key(), self.tgt.key(), _k(self.top), _k(self.bot))

    def __repr__(self):
        return f"({self.top!r} over {self.bot!r})"


def _k(x):
    return x.key() if hasattr(x, "key") else x


class Bun(Base):
    def __init__(self, inner):
        self.inner = inner
        self.name = f"bundle:{inner.name}"
        if not hasattr(inner, "vector"):
            self.vector = None

    def bundle(self, x):
        i = self.inner
        if not i.is_total(x):
            raise StructureError("a bundle is a total map")
        return BunObj(i.dom(x), i.cod(x), x)

    def admit(self, a):
        if not isinstance(a, BunObj):
            raise StructureError("bundle objects are BunObj")
        self.inner.admit(a.top)
        self.inner.admit(a.bot)
        if not self.inner.is_total(a.x) or self.inner.dom(a.x) != a.top or self.inner.cod(a.x) != a.bot:
            raise StructureError("bundle map must be a total map top → bot")
        return a

    def size(self, a):
        return self.inner.size(a.top) + self.inner.size(a.bot)

    def empty(self):
        e = self.inner.empty()
        return BunObj(e, e, self.inner.identity(e))

    def mor(self, src, tgt, top, bot):
        f = BunMor(src, tgt, top, bot)
        self.check_mor(f)
        return f

    def check_mor(self, f):
        i = self.inner
        if i.compose(f.tgt.x, f.top) != i.compose(f.bot, f.src.x):
            raise StructureError("bundle square does not commute")
        if i.restrict(f.top) != i.restrict(i.compose(f.bot, f.src.x)):
            raise StructureError("top component must be defined exactly over the bottom domain")

    def dom(self, f):
        return f.src

    def cod(self, f):
        return f.tgt

    def identity(self, a):
        return BunMor(a, a, self.inner.identity(a.top), self.inner.identity(a.bot))

    def compose(self, g, f):
        if f.tgt != g.src:
            raise StructureError("composition of non-composable bundle maps")
        i = self.inner
        return BunMor(f.src, g.tgt, i.compose(g.top, f.top), i.compose(g.bot, f.bot))

    def restrict(self, f):
        return BunMor(f.src, f.src, self.inner.restrict(f.top), self.inner.restrict(f.bot))

    def is_total(self, f):
        return self.inner.is_total(f.bot)

    def idempotents(self, a):
        i = self.inner
        return tuple(BunMor(a, a, i.restrict(i.compose(e, a.x)), e) for e in i.idempotents(a.bot))

    def join(self, fam, a=None, b=None):
        fam = list(fam)
        if fam:
            a, b = fam[0].src, fam[0].tgt
        t = self.inner.join([f.top for f in fam], a.top, b.top)
        s = self.inner.join([f.bot for f in fam], a.bot, b.bot)
        if t is None or s is None:
            return None
        return BunMor(a, b, t, s)

    def partial_inverse(self, f):
        t = self.inner.partial_inverse(f.top)
        s = self.inner.partial_inverse(f.bot)
        if t is None or s is None:
            return None
        g = BunMor(f.tgt, f.src, t, s)
        try:
            self.check_mor(g)
        except StructureError:
            return None
        return g

    def hom(self, a, b):
        cache = self.__dict__.setdefault("_hom_cache", {})
        key = (a, b)
        if key not in cache:
            i = self.inner
            tops = i.hom(a.top, b.top)
            out = []
            for f in i.hom(a.bot, b.bot):
                fx = i.compose(f, a.x)
                r = i.restrict(fx)
                for t in tops:
                    if i.restrict(t) == r and i.compose(b.x, t) == fx:
                        out.append(BunMor(a, b, t, f))
            cache[key] = tuple(out)
        return cache[key]

    # point-map fast path when the inner base has one
    def npoints(self, a):
        return self.inner.npoints(a.top) + self.inner.npoints(a.bot)

    def vector(self, f):
        i = self.inner
        off = i.npoints(f.tgt.top)
        vb = tuple(v + off if v >= 0 else -1 for v in i.vector(f.bot))
        return i.vector(f.top) + vb

    # limits and glueings -------------------------------------------------
    def fiber_product(self, f, g):
        i = self.inner
        bot = i.fiber_product(f.bot, g.bot)
        top = i.fiber_product(f.top, g.top)
        x = i.pair(bot, i.compose(f.src.x, top.pi1), i.compose(g.src.x, top.pi2))
        P = BunObj(top.obj, bot.obj, x)
        pi1 = BunMor(P, f.src, top.pi1, bot.pi1)
        pi2 = BunMor(P, g.src, top.pi2, bot.pi2)
        return FiberProduct(P, pi1, pi2, f, g, parts=(top, bot))

    def pair(self, fp, u, v):
        top, bot = fp.parts
        i = self.inner
        return BunMor(u.src, fp.obj, i.pair(top, u.top, v.top), i.pair(bot, u.bot, v.bot))

    def glue_atlas(self, atlas: LocalAtlas) -> GlueResult:
        i = self.inner
        a = atlas.obj
        I = atlas.index
        bot = glue(i, LocalAtlas(a.bot, I, {ij: e.bot for ij, e in atlas.phi.items()}))
        top = glue(i, LocalAtlas(a.top, I, {ij: e.top for ij, e in atlas.phi.items()}))
        fam = {k: i.compose(bot.sections[k], a.x) for k in I}
        if I:
            ax = induced_map_to(i, top, fam, bot.apex)
        else:
            ax = i.join([], top.apex, bot.apex)
        A = BunObj(top.apex, bot.apex, ax)
        p = BunMor(A, a, top.p, bot.p)
        summ = {k: BunMor(A, a, top.summands[k], bot.summands[k]) for k in I}
        secs = {k: BunMor(a, A, top.sections[k], bot.sections[k]) for k in I}
        for f in [p, *summ.values(), *secs.values()]:
            self.check_mor(f)
        return GlueResult(self, atlas, A, p, summ, secs)
