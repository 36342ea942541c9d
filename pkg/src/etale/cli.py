"""Batch command line: parse finite structures, run a construction, print a
canonical JSON report.

Exit codes: 0 ok, 1 a law is violated, 2 structural, schema or IO error.
"""

from __future__ import annotations

import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

import click
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from ._canon import csorted, render, show
from .adjunction import (
    Square,
    adjunction_counit,
    adjunction_unit,
    all_fillers,
    diagonal_filler,
    externalize,
    externalize_groupoid,
    factorize,
    filler_checks,
    inclusion_over,
    internalize,
    monoid_rcat,
    reflector_explicit,
    reflector_groupoid,
    reflector_groupoid_matches,
    reflector_matches_glueing,
)
from .applications import (
    Coverage,
    MonoidAction,
    check_section_formula,
    esn_groupoid,
    full_group_direct,
    full_monoid,
    haefliger,
    lh_product,
    relative_join_completion,
    saturate,
    validate_coverage,
)
from .bases import Bun, FinLocP, FinPosP, FinSetP, Lattice, Poset, PointBase
from .bases.core import is_local_homeomorphism
from .bases.sheaves import counit, gamma, is_sheaf
from .partite import PartiteCategory, try_inverses, validate_pcat
from .rcat import RCat, RFunctor, StructureError, analyze_rfun, classify, piso_subcategory, validate_rcat

VERSION = 1
SCHEMAS = ("rcat", "over", "action", "coverage", "sample", "bundle", "partite", "report")

# which options each verb accepts
ALLOWED = {
    "check": {"base"},
    "internalize": {"groupoid", "base"},
    "externalize": {"groupoid"},
    "reflect": {"groupoid", "base", "explicit"},
    "factorize": set(),
    "filler": set(),
    "haefliger": {"groupoid", "base"},
    "product": {"base"},
    "fullmonoid": {"group"},
    "complete": set(),
    "esn": {"base"},
    "sheaf": set(),
}


class Failure(Exception):
    """Structural, schema or IO problem; exit code 2."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


# ---------------------------------------------------------------- documents


def schema(name):
    text = resources.files("etale").joinpath("schemas", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    if p.parts and p.parts[0] == "examples":
        bundled = resources.files("etale").joinpath("examples", *p.parts[1:])
        if bundled.is_file():
            return Path(str(bundled))
    raise Failure(f"no such file: {path}")


def load(path: str, accept=SCHEMAS):
    p = _resolve(path)
    try:
        raw = p.read_bytes()
    except OSError as e:
        raise Failure(f"cannot read {path}: {e.strerror}")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise Failure(f"{path}: not UTF-8", {"byte_offset": e.start})
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        off = len(text[: e.pos].encode("utf-8"))
        raise Failure(f"{path}: {e.msg} at byte {off}", {"byte_offset": off, "line": e.lineno, "column": e.colno})
    if not isinstance(doc, dict) or set(doc) != {"schema", "version", "payload"}:
        raise Failure(f"{path}: expected an envelope with exactly schema, version and payload")
    kind = doc["schema"]
    if not isinstance(kind, str) or not kind.startswith("etale.") or kind[6:] not in SCHEMAS:
        raise Failure(f"{path}: unknown schema {kind!r}")
    if doc["version"] != VERSION:
        raise Failure(f"{path}: unsupported version {doc['version']!r}")
    kind = kind[6:]
    if kind not in accept:
        raise Failure(f"{path}: a {kind} document is not accepted here (want {', '.join(accept)})")
    v = Draft202012Validator(schema(kind))
    e = best_match(v.iter_errors(doc["payload"]))
    if e is not None:
        while e.context:
            e = best_match(e.context)
        loc = "/".join(str(x) for x in e.absolute_path)
        raise Failure(f"{path}: schema violation at /payload/{loc}: {e.message}", {"path": f"/payload/{loc}"})
    return kind, doc["payload"]


def thaw(v):
    """JSON arrays become tuples so that points are hashable."""
    if isinstance(v, list):
        return tuple(thaw(x) for x in v)
    return v


def make_base(name):
    if name == "finset":
        return FinSetP()
    if name == "finpos":
        return FinPosP()
    if name == "finloc":
        return FinLocP()
    if name == "bundle:finset":
        return Bun(FinSetP())
    raise Failure(f"unknown base {name!r}")


def make_object(b, spec):
    if isinstance(b, Bun):
        if not isinstance(spec, dict) or "top" not in spec:
            raise Failure("bundle objects need top, bot and map")
        i = b.inner
        top, bot = i.make_object(Poset.discrete(thaw(spec["top"]))), i.make_object(Poset.discrete(thaw(spec["bot"])))
        try:
            x = i.mor(top, bot, {thaw(a): thaw(c) for a, c in spec["map"]})
            return b.bundle(x)
        except StructureError as e:
            raise Failure(f"bad bundle object: {e}")
    if isinstance(spec, dict):
        if "points" not in spec:
            raise Failure("this base takes point lists or posets")
        P = Poset.make(thaw(spec["points"]), [(thaw(a), thaw(c)) for a, c in spec.get("le", [])])
    else:
        P = Poset.discrete(thaw(spec))
    if isinstance(b, FinLocP):
        L = Lattice.of_downsets(P)
        b.admit(L)
        return L
    if isinstance(b, FinSetP) and P.rel != Poset.discrete(P.carrier).rel:
        raise Failure("finset objects carry no order")
    return b.make_object(P)


def rcat_of(payload, base_override=None) -> RCat:
    k = payload["kind"]
    name = payload.get("name", "")
    try:
        if k == "table":
            comp = {(g, f): h for g, f, h in payload["compose"]}
            mors = [(m["id"], m["dom"], m["cod"]) for m in payload["morphisms"]]
            return RCat(payload["objects"], mors, payload["identity"], comp, payload["restrict"], name=name)
        if k == "monoid":
            mul = {(a, c): d for a, c, d in payload["mul"]}
            return monoid_rcat(payload["elements"], payload["unit"], mul, payload.get("restrict"), name=name or "ΣM")
        b = make_base(base_override or payload["base"])
        objs = [make_object(b, o) for o in payload["objects"]]
        C = b.as_rcat(objs, name=name)
        if payload.get("subcategory", "all") == "piso":
            C = piso_subcategory(C)
            C.name = name
        C.base = b
        return C
    except KeyError as e:
        raise Failure(f"missing table entry {e}")
    except StructureError as e:
        raise Failure(str(e))


def over_of(payload) -> RFunctor:
    A = rcat_of(payload["category"])
    b = make_base(payload["base"])
    if not isinstance(b, PointBase):
        raise Failure("functors are read into point bases")
    try:
        obj = {i: make_object(b, s) for i, s in payload["obj"].items()}
        if set(obj) != set(A.objects):
            raise Failure("obj must cover exactly the objects of the category")
        mor = {}
        for f in A.mors:
            if f not in payload["mor"]:
                raise Failure(f"no image for morphism {f}")
            mor[f] = b.mor(obj[A.dom(f)], obj[A.cod(f)], {thaw(x): thaw(y) for x, y in payload["mor"][f]})
    except StructureError as e:
        raise Failure(str(e))
    return RFunctor(A, b, obj, mor, name=A.name or "P")


def functor_of(kind, payload, base_override=None) -> RFunctor:
    if kind == "over":
        return over_of(payload)
    C = rcat_of(payload, base_override)
    if not hasattr(C, "base"):
        raise Failure("this verb needs a category over a base (a sample or an over document)")
    return inclusion_over(C.base, C, name=C.name or "incl")


def action_of(payload) -> MonoidAction:
    a = MonoidAction(tuple(payload["elements"]), payload["unit"], {(m, n): k for m, n, k in payload["mul"]},
                     tuple(thaw(x) for x in payload["X"]), {(m, thaw(x)): thaw(y) for m, x, y in payload["act"]})
    try:
        a.check()
    except (KeyError, StructureError) as e:
        raise Failure(f"invalid monoid action: {e}")
    return a


def coverage_of(payload) -> Coverage:
    A = rcat_of(payload["category"])
    gens = {}
    for c in payload["covers"]:
        if c["mor"] not in A._ix:
            raise Failure(f"cover on unknown morphism {c['mor']}")
        for S in c["sieves"]:
            if any(s not in A._ix for s in S):
                raise Failure(f"sieve on {c['mor']} names an unknown morphism")
            gens.setdefault(c["mor"], set()).add(frozenset(S))
    return saturate(A, gens) if payload.get("saturate") else Coverage(A, gens)


def partite_of(payload) -> PartiteCategory:
    b = make_base(payload["base"])
    I = payload["components"]
    try:
        obj = {i: make_object(b, payload["obj"][i]) for i in I}
        arr, sig, tau, iota = {}, {}, {}, {}
        for a in payload["arr"]:
            i, j = a["src"], a["tgt"]
            A = make_object(b, a["object"])
            arr[i, j] = A
            sig[i, j] = b.mor(A, obj[i], {thaw(x): thaw(y) for x, y in a["sigma"]})
            tau[i, j] = b.mor(A, obj[j], {thaw(x): thaw(y) for x, y in a["tau"]})
            if "iota" in a:
                iota[i, j] = [(thaw(x), thaw(y)) for x, y in a["iota"]]
        eta = {i: b.mor(obj[i], arr[i, i], {thaw(x): thaw(y) for x, y in payload["eta"][i]}) for i in I}
        x = PartiteCategory(b, I, obj, arr, sig, tau, eta, name=payload.get("name", ""))
        for m in payload["mu"]:
            i, j, k = m["i"], m["j"], m["k"]
            x.mu[i, j, k] = b.mor(x.P(i, j, k).obj, arr[i, k], {thaw(p): thaw(y) for p, y in m["map"]})
        if iota:
            if len(iota) != len(arr):
                raise Failure("iota must be given on every arrow object or none")
            x = x.with_iota({ij: b.mor(arr[ij], arr[ij[1], ij[0]], dict(g)) for ij, g in iota.items()})
    except KeyError as e:
        raise Failure(f"missing partite data {e}")
    except StructureError as e:
        raise Failure(str(e))
    return x


# -------------------------------------------------------------- serialisers


def _graph(f):
    return [[render(x), render(y)] for x, y in csorted(f.graph)]


def _object(b, X):
    if isinstance(b, FinSetP):
        return [render(x) for x in b.carrier(X)]
    P = b.poset(X)
    return {"points": [render(x) for x in P.points],
            "le": [[render(x), render(y)] for x, y in csorted(P.rel) if x != y]}


def rcat_doc(C: RCat):
    ids = {f: f"m{n}" for n, f in enumerate(C.mors)}
    obs = {a: (a if isinstance(a, str) else f"o{n}") for n, a in enumerate(C.objects)}
    return {
        "kind": "table",
        "name": C.name or "",
        "objects": [obs[a] for a in C.objects],
        "morphisms": [{"id": ids[f], "dom": obs[C.dom(f)], "cod": obs[C.cod(f)]} for f in C.mors],
        "identity": {obs[a]: ids[C.identity(a)] for a in C.objects},
        "compose": [[ids[g], ids[f], ids[C.compose(g, f)]] for g in C.mors for f in C.mors if C.dom(g) == C.cod(f)],
        "restrict": {ids[f]: ids[C.restrict(f)] for f in C.mors},
    }


def partite_doc(x: PartiteCategory):
    b = x.base
    if not isinstance(b, PointBase):
        raise Failure("only point-base partite categories are serialised")
    nm = {i: (i if isinstance(i, str) else f"c{n}") for n, i in enumerate(x.I)}
    arr = []
    for (i, j), A in x.arr.items():
        a = {"src": nm[i], "tgt": nm[j], "object": _object(b, A),
             "sigma": _graph(x.sigma[i, j]), "tau": _graph(x.tau[i, j])}
        if x.iota is not None:
            a["iota"] = _graph(x.iota[i, j])
        arr.append(a)
    return {
        "base": b.name,
        "name": x.name or "",
        "components": [nm[i] for i in x.I],
        "obj": {nm[i]: _object(b, x.obj[i]) for i in x.I},
        "arr": arr,
        "eta": {nm[i]: _graph(x.eta[i]) for i in x.I},
        "mu": [{"i": nm[i], "j": nm[j], "k": nm[k], "map": _graph(m)} for (i, j, k), m in x.mu.items()],
    }


def canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def artifact(name, kind, payload, embed=True):
    env = {"schema": f"etale.{kind}", "version": VERSION, "payload": payload}
    a = {"name": name, "schema": f"etale.{kind}", "digest": hashlib.sha256(canonical(env).encode()).hexdigest()}
    if embed:
        a["document"] = env
    return a


class Outcome:
    def __init__(self, verb):
        self.verb = verb
        self.flags, self.summary, self.witnesses, self.artifacts = {}, {}, [], []

    def violation(self, law, **witness):
        self.witnesses.append({"law": law, **{k: render(v) if not isinstance(v, (str, int, bool, list, dict)) else v
                                              for k, v in witness.items()}})

    def expect(self, cond, law, **witness):
        if not cond:
            self.violation(law, **witness)

    def envelope(self, status=None):
        status = status or ("ok" if not self.witnesses else "violated")
        return {"schema": "etale.report", "version": VERSION,
                "payload": {"status": status, "verb": self.verb, "flags": self.flags, "summary": self.summary,
                            "witnesses": self.witnesses, "artifacts": self.artifacts}}


def _hom_sizes(x: PartiteCategory):
    return {f"{show(i)}→{show(j)}": x.base.size(A) if not isinstance(x.base, PointBase) else len(x.base.carrier(A))
            for (i, j), A in x.arr.items()}


def _report_violations(out, rep):
    for v in rep.violations:
        out.violation(v.law, witness=[show(w) for w in v.witness], detail=v.detail)


# ------------------------------------------------------------------- verbs


def do_check(out, path, opts):
    kind, pl = load(path)
    if kind == "rcat":
        C = rcat_of(pl, opts.get("base"))
        _report_violations(out, validate_rcat(C))
        if out.witnesses:
            return
        out.flags.update(classify(C).as_dict())
        out.summary.update(objects=len(C.objects), morphisms=len(C.mors))
    elif kind == "over":
        F = over_of(pl)
        _report_violations(out, validate_rcat(F.source))
        r = analyze_rfun(F)
        out.flags.update(r.as_dict())
        _report_violations(out, r.report)
    elif kind == "action":
        a = action_of(pl)
        out.flags.update(group=a.is_group())
        out.summary.update(monoid=len(a.elements), points=len(a.X))
    elif kind == "coverage":
        cov = coverage_of(pl)
        _report_violations(out, validate_coverage(cov))
        out.summary.update(covers=sum(len(v) for v in cov.covers.values()))
    elif kind == "partite":
        x = partite_of(pl)
        r = validate_pcat(x)
        _report_violations(out, r.report)
        out.flags.update(source_etale=r.source_etale, groupoid=x.is_groupoid)
        if opts["exhaustive"] and r.ok and not x.is_groupoid:
            out.flags["admits_inverses"] = try_inverses(x) is not None
    elif kind == "sample":
        b, objs, probes = _sample(pl, opts.get("base"))
        out.summary.update(objects=len(objs), probes=len(probes))
    elif kind == "bundle":
        b, p = _bundle(pl)
        out.flags.update(local_homeomorphism=is_local_homeomorphism(b, p))
    else:
        raise Failure(f"check does not take {kind} documents")


def do_internalize(out, path, opts):
    kind, pl = load(path, ("rcat", "over"))
    P = functor_of(kind, pl, opts.get("base"))
    psi = internalize(P)
    x = psi.pcat
    if opts["groupoid"]:
        g = try_inverses(x)
        out.expect(g is not None, "internalisation admits inverses")
        x = g or x
    r = validate_pcat(x)
    _report_violations(out, r.report)
    out.flags.update(source_etale=r.source_etale, groupoid=x.is_groupoid)
    out.summary.update(arrows=_hom_sizes(x))
    if opts["exhaustive"]:
        u = adjunction_unit(P)
        out.flags.update(unit_iso=u.iso_direct)
        out.expect(u.iso_direct == u.iso_criterion, "unit iso agrees with hyperconnected ∧ join")
    if isinstance(x.base, PointBase):
        out.artifacts.append(artifact("internalized", "partite", partite_doc(x)))


def do_externalize(out, path, opts):
    kind, pl = load(path, ("partite", "action"))
    if kind == "action":
        from .partite import action_category
        a = action_of(pl)
        b = FinSetP()
        x = action_category(b, a.elements, a.unit, a.mul, frozenset(a.X), a.act)
        if opts["groupoid"]:
            x = try_inverses(x) or x
    else:
        x = partite_of(pl)
    r = validate_pcat(x)
    _report_violations(out, r.report)
    if out.witnesses:
        return
    if opts["groupoid"]:
        if not x.is_groupoid:
            raise Failure("--groupoid needs a partite groupoid")
        E = externalize_groupoid(x)
    else:
        E = externalize(x)
    C = E.source
    out.summary.update(morphisms=len(C.mors))
    out.flags.update(classify(C).as_dict())
    if opts["exhaustive"]:
        rep = analyze_rfun(E)
        out.expect(rep.hyperconnected, "externalisation is hyperconnected")
        c = adjunction_counit(x.without_iota())
        out.flags.update(counit_iso=c.iso_direct)
        out.expect(c.iso_direct == c.iso_criterion, "counit iso agrees with source-étale")
    out.artifacts.append(artifact("externalized", "rcat", rcat_doc(C)))


def do_reflect(out, path, opts):
    kind, pl = load(path, ("rcat", "over"))
    P = functor_of(kind, pl, opts.get("base"))
    if opts["explicit"]:
        r = reflector_groupoid(P) if opts["groupoid"] else reflector_explicit(P)
        C = r.over.source
    else:
        x = internalize(P).pcat
        if opts["groupoid"]:
            g = try_inverses(x)
            if g is None:
                raise Failure("internalisation admits no inverses")
            C = externalize_groupoid(g).source
        else:
            C = externalize(x).source
    out.summary.update(morphisms=len(C.mors))
    out.flags.update(classify(C).as_dict())
    if opts["exhaustive"]:
        if opts["groupoid"]:
            out.expect(reflector_groupoid_matches(P), "groupoid reflector = partial isos of the reflector")
        else:
            out.expect(reflector_matches_glueing(P) is not None, "explicit reflector ≅ ΦΨ")
    out.artifacts.append(artifact("reflection", "rcat", rcat_doc(C)))


def _table_functor(pl):
    P = over_of(pl)
    b = P.target
    objs = csorted(set(P.obj.values()))
    D = b.as_rcat(objs, name=b.name)
    return RFunctor(P.source, D, dict(P.obj), dict(P.mor), name=P.name)


def do_factorize(out, path, opts):
    _, pl = load(path, ("over",))
    F = _table_functor(pl)
    try:
        fz = factorize(F)
    except StructureError as e:
        raise Failure(str(e))
    lr, hr = analyze_rfun(fz.L), analyze_rfun(fz.H)
    out.flags.update(L_localic=bool(lr.localic), H_hyperconnected=hr.hyperconnected)
    out.expect(bool(lr.localic), "left factor is localic")
    out.expect(hr.hyperconnected, "right factor is hyperconnected")
    out.expect(all(fz.H.mor[fz.L.mor[f]] == F.mor[f] for f in F.source.mors), "H∘L = F")
    out.summary.update(middle_morphisms=len(fz.middle.mors))
    out.artifacts.append(artifact("middle", "rcat", rcat_doc(fz.middle)))


def do_filler(out, path, opts):
    _, pl = load(path, ("over",))
    F = _table_functor(pl)
    try:
        fz = factorize(F)
        sq = Square(fz.L, fz.H, fz.L, fz.H)
        J = diagonal_filler(sq)
    except StructureError as e:
        raise Failure(str(e))
    for law, ok in filler_checks(sq, J).items():
        out.expect(ok, law)
    out.summary.update(middle_morphisms=len(fz.middle.mors))
    if opts["exhaustive"]:
        n = len(all_fillers(sq))
        out.summary.update(fillers=n)
        out.expect(n == 1, "filler is unique", found=n)


def _sample(pl, base_override=None):
    b = make_base(base_override or pl["base"])
    return b, [make_object(b, o) for o in pl["objects"]], [make_object(b, o) for o in pl.get("probes", [])]


def do_haefliger(out, path, opts):
    _, pl = load(path, ("sample",))
    b, objs, _ = _sample(pl, opts.get("base"))
    x = haefliger(b, objs, mode="groupoid" if opts["groupoid"] else "category")
    out.summary.update(arrows=_hom_sizes(x))
    r = validate_pcat(x)
    _report_violations(out, r.report)
    out.flags.update(source_etale=r.source_etale, groupoid=x.is_groupoid)
    if isinstance(b, PointBase):
        out.artifacts.append(artifact("haefliger", "partite", partite_doc(x)))


def do_product(out, path, opts):
    _, pl = load(path, ("sample",))
    b, objs, probes = _sample(pl, opts.get("base"))
    if not 1 <= len(objs) <= 2:
        raise Failure("product takes one or two objects")
    A, B = objs[0], objs[-1]
    if opts["exhaustive"] and not probes:
        probes = objs
    r = lh_product(b, A, B, sample=probes if opts["exhaustive"] else ())
    if isinstance(b, Bun):
        out.summary.update(base=len(b.inner.carrier(r.obj.bot)), total=len(b.inner.carrier(r.obj.top)))
    else:
        out.summary.update(size=b.size(r.obj) if not isinstance(b, PointBase) else len(b.carrier(r.obj)))
    if opts["exhaustive"]:
        out.summary.update(spans=r.spans_checked)
        for W, u, v, n in r.failures:
            out.violation("unique mediating local homeomorphism", apex=show(W), mediators=n)


def do_fullmonoid(out, path, opts):
    _, pl = load(path, ("action",))
    a = action_of(pl)
    if opts["group"] and not a.is_group():
        raise Failure("full group requested for a monoid that is not a group")
    fm = full_monoid(a, want_group=opts["group"])
    out.flags.update(group=a.is_group())
    out.summary.update(external=len(fm.external.source.mors), total=len(fm.total.mors))
    if fm.full_group is not None:
        out.summary.update(full_group=len(fm.full_group.mors))
    if opts["exhaustive"]:
        out.expect(fm.iso_to_internalized, "action category ≅ Ψ of the action functor")
        out.expect(check_section_formula(fm, a), "total sections compose by u(x) = t(s(x)·x)s(x)")
        if fm.full_group is not None:
            out.expect(len(fm.full_group.mors) == full_group_direct(a), "full group matches the direct count")


def do_complete(out, path, opts):
    _, pl = load(path, ("coverage",))
    cov = coverage_of(pl)
    rep = validate_coverage(cov)
    if not rep.ok:
        _report_violations(out, rep)
        return
    rc = relative_join_completion(cov)
    out.summary.update(morphisms=len(rc.completion.mors))
    out.flags.update(cover_to_join=rc.cover_to_join)
    out.expect(rc.cover_to_join, "unit is cover-to-join")
    out.artifacts.append(artifact("completion", "rcat", rcat_doc(rc.completion)))


def do_esn(out, path, opts):
    _, pl = load(path, ("rcat",))
    I = rcat_of(pl, opts.get("base"))
    try:
        r = esn_groupoid(I)
    except StructureError as e:
        raise Failure(str(e))
    g = r.groupoid
    out.flags.update(sources_discrete_fibrations=r.sources_discrete_fibrations,
                     object_posets_meet_semilattices=r.object_posets_meet_semilattices, inductive=r.inductive)
    out.summary.update(arrows=_hom_sizes(g), objects={show(i): len(g.obj[i].points) for i in g.I})
    out.expect(r.inductive, "G(I) is inductive")
    out.artifacts.append(artifact("esn", "partite", partite_doc(g)))


def _bundle(pl):
    b = FinSetP()
    X = frozenset(thaw(x) for x in pl["X"])
    A = frozenset(thaw(a) for a in pl["A"])
    try:
        p = b.mor(A, X, {thaw(a): thaw(x) for a, x in pl["p"]})
    except StructureError as e:
        raise Failure(str(e))
    if not b.is_total(p):
        raise Failure("p must be total")
    return b, p


def do_sheaf(out, path, opts):
    _, pl = load(path, ("bundle",))
    b, p = _bundle(pl)
    G = gamma(b, p)
    c = counit(b, p)
    lh = is_local_homeomorphism(b, p)
    out.flags.update(local_homeomorphism=lh, counit_iso=c.iso, sections_sheaf=is_sheaf(G))
    out.summary.update(sections=len(G.carrier))
    out.expect(c.iso == lh, "counit iso exactly on local homeomorphisms")


VERBS = {
    "check": do_check, "internalize": do_internalize, "externalize": do_externalize, "reflect": do_reflect,
    "factorize": do_factorize, "filler": do_filler, "haefliger": do_haefliger, "product": do_product,
    "fullmonoid": do_fullmonoid, "complete": do_complete, "esn": do_esn, "sheaf": do_sheaf,
}


def run(verb, path, *, base=None, groupoid=False, group=False, explicit=False, verify_level="fast", out_dir=None):
    """Run one command; returns (exit code, report envelope)."""
    out = Outcome(verb)
    given = {k for k, v in (("base", base), ("groupoid", groupoid), ("group", group), ("explicit", explicit)) if v}
    bad = given - ALLOWED[verb]
    try:
        if bad:
            raise Failure(f"{verb} does not take --{', --'.join(sorted(bad))}")
        opts = {"base": base, "groupoid": groupoid, "group": group, "explicit": explicit, "exhaustive": verify_level == "exhaustive"}
        VERBS[verb](out, path, opts)
    except Failure as e:
        out.witnesses = [{"error": str(e), **e.witness}]
        return 2, out.envelope("error")
    except StructureError as e:
        out.witnesses = [{"error": str(e)}]
        return 2, out.envelope("error")
    env = out.envelope()
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for a in out.artifacts:
            (d / f"{a['name']}.json").write_text(json.dumps(a["document"], sort_keys=True, ensure_ascii=False, indent=1) + "\n",
                                                 encoding="utf-8")
        for a in env["payload"]["artifacts"]:
            a.pop("document", None)
    return (0 if not out.witnesses else 1), env


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Finite restriction categories and étale partite categories."""


def _verb(name, helptext):
    @click.argument("path")
    @click.option("--base", type=click.Choice(["finset", "finpos", "finloc", "bundle:finset"]), default=None,
                  help="Base for sample documents.")
    @click.option("--groupoid", is_flag=True, help="Work with partial isomorphisms and inverses.")
    @click.option("--group", is_flag=True, help="Also compute the full group.")
    @click.option("--explicit", is_flag=True, help="Use the explicit family description where one exists.")
    @click.option("--verify-level", type=click.Choice(["fast", "exhaustive"]), default="fast")
    @click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                  help="Write artifacts here instead of embedding them.")
    def cmd(path, base, groupoid, group, explicit, verify_level, out_dir):
        code, env = run(name, path, base=base, groupoid=groupoid, group=group, explicit=explicit,
                        verify_level=verify_level, out_dir=out_dir)
        click.echo(json.dumps(env, sort_keys=True, ensure_ascii=False, indent=1))
        sys.exit(code)

    cmd.__doc__ = helptext
    main.command(name)(cmd)


for _name, _help in [
    ("check", "Validate a document and print its flags."),
    ("internalize", "Glue a category over a base into a partite category."),
    ("externalize", "Sections of a partite category as a restriction category."),
    ("reflect", "The explicit reflection of a category over a base."),
    ("factorize", "Localic / hyperconnected factorisation of a functor."),
    ("filler", "Diagonal filler of the factorisation square."),
    ("haefliger", "Haefliger category or groupoid of a sample of base objects."),
    ("product", "Product of local homeomorphisms."),
    ("fullmonoid", "External and full monoid of an action."),
    ("complete", "Relative join completion for a coverage."),
    ("esn", "Inductive groupoid of an inverse category."),
    ("sheaf", "Sections and glueing of a map of finite sets."),
]:
    _verb(_name, _help)


if __name__ == "__main__":
    main()
