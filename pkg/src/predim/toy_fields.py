"""Field surrogates with an E-relation: the exponential toy and the j toys.

Transcendence is linear rank of rational vectors; Hecke and SL2 orbits are
opaque labels.  Points in one Hecke class are interalgebraic, so their
vectors must be parallel, and the same holds for z's in one SL2 class.
"""
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import core
from . import expr as E
from .errors import PredimError
from .linalg import Span, solve_in_basis
from .universe import ClassId, Point, Substructure, Universe, generate, whole
from .varieties import Mode, Role, is_free, is_normal, jacobian, samples


def _nonzero(v):
    return any(v)


def _parallel(u, v):
    return Span([u, v]).rank <= 1


# -- audit

@dataclass
class AxiomReport:
    class_id: str
    violations: list = field(default_factory=list)
    tuples_checked: int = 0
    modular_bound: int = None

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {"class_id": self.class_id, "ok": self.ok, "violations": self.violations,
                "tuples_checked": self.tuples_checked, "modular_bound": self.modular_bound}


def axiom_audit(U, modular_bound=None):
    """A1-A4 label closure and the Ax-Schanuel scheme, exhaustively.

    `modular_bound` is recorded only: orbits are labels, so every Hecke
    relation is visible regardless of degree.
    """
    rep = AxiomReport(U.class_id.value, modular_bound=modular_bound)
    if U.class_id == ClassId.AB_INITIO:
        if core.delta_mask(U, 0) != 0:
            rep.violations.append({"axiom": "P1", "witness": []})
        return rep
    if U.class_id == ClassId.EXP_TOY:
        _audit_exp(U, rep)
    else:
        _audit_ej(U, rep)
    return rep


def _const(U, pid):
    return not _nonzero(U.points[pid].td)


def _audit_ej(U, rep):
    P = U.points
    w = U.klass.sigma_weight
    tag = "A1'" if w == 3 else "A2"
    for e in U.epairs:
        flags = [_const(U, pid) for pid in e]
        if any(flags) and not all(flags):
            rep.violations.append({"axiom": tag, "witness": list(e)})
        if not flags[0] and (P[e[0]].sl2 is None or P[e[1]].hecke is None):
            rep.violations.append({"axiom": "LABELS", "witness": list(e)})
    live = [e for e in U.epairs if not _const(U, e[1])]
    # interalgebraic orbits
    for key, role, axiom in (("hecke", 1, "A4"), ("sl2", 0, "A3")):
        by = {}
        for pid, p in P.items():
            lab = getattr(p, key)
            if lab is not None and _nonzero(p.td):
                by.setdefault(lab, []).append(pid)
        for lab, pids in by.items():
            for a, b in itertools.combinations(sorted(pids), 2):
                if not _parallel(P[a].td, P[b].td):
                    rep.violations.append({"axiom": axiom, "witness": [a, b], "label": lab})
    # derivative mode: class-mates' whole tuples are interalgebraic
    if w == 3:
        by_class = {}
        for e in live:
            by_class.setdefault(P[e[1]].hecke, []).append(e)
        for lab, es in by_class.items():
            for e1, e2 in itertools.combinations(es, 2):
                s1 = Span(P[pid].td for pid in e1)
                s2 = Span(P[pid].td for pid in e2)
                if not (all(s1.contains(P[pid].td) for pid in e2)
                        and all(s2.contains(P[pid].td) for pid in e1)):
                    rep.violations.append({"axiom": "A4'", "witness": [list(e1), list(e2)],
                                           "label": lab})
    # pairs sharing a j have z's in one SL2 orbit
    for e1, e2 in itertools.combinations(live, 2):
        if e1[1] == e2[1] and P[e1[0]].sl2 != P[e2[0]].sl2:
            rep.violations.append({"axiom": "A3", "witness": [list(e1), list(e2)]})
    # label closure: every class-mate of a paired j is paired in the same SL2 orbit
    for z, j, *_ in live:
        h, s = P[j].hecke, P[z].sl2
        for pid, p in P.items():
            if p.hecke == h and _nonzero(p.td):
                if not any(e[1] == pid and P[e[0]].sl2 == s for e in live):
                    rep.violations.append({"axiom": "A4", "witness": [z, j, pid]})
    # Ax-Schanuel over tuples with pairwise distinct Hecke classes
    classes = {}
    for e in sorted(live):
        classes.setdefault(U.hecke_key(e[1]), []).append(e)
    keys = sorted(classes)
    for choice in itertools.product(*[[None] + classes[k] for k in keys]):
        tup = [e for e in choice if e is not None]
        if not tup:
            continue
        rep.tuples_checked += 1
        r = Span(P[pid].td for e in tup for pid in e).rank
        if r < w * len(tup) + 1:
            rep.violations.append({"axiom": "AS", "witness": [list(e) for e in tup],
                                   "rank": r, "needed": w * len(tup) + 1})


def _audit_exp(U, rep):
    P = U.points
    for x, y in U.epairs:
        if _const(U, x) != _const(U, y):
            rep.violations.append({"axiom": "A2", "witness": [x, y]})
        if _nonzero(P[x].td) != _nonzero(P[x].lin):
            rep.violations.append({"axiom": "LIN", "witness": [x]})
    live = [e for e in U.epairs if _nonzero(P[e[0]].lin)]
    for e1, e2 in itertools.combinations(live, 2):
        if _parallel(P[e1[0]].lin, P[e2[0]].lin):
            if not (_parallel(P[e1[0]].td, P[e2[0]].td) and _parallel(P[e1[1]].td, P[e2[1]].td)):
                rep.violations.append({"axiom": "HOM", "witness": [list(e1), list(e2)]})
    for k in range(1, len(live) + 1):
        for tup in itertools.combinations(sorted(live), k):
            if Span(P[x].lin for x, _ in tup).rank < k:
                continue
            rep.tuples_checked += 1
            r = Span(P[pid].td for e in tup for pid in e).rank
            if r < k + 1:
                rep.violations.append({"axiom": "AS", "witness": [list(e) for e in tup],
                                       "rank": r, "needed": k + 1})


def positivity_audit(U, cap=core.DEFAULT_CAP):
    """delta >= 0 on every structure, with equality only at the constants."""
    if len(U) > cap:
        raise PredimError("CAP_EXCEEDED", "positivity audit is exhaustive")
    c = U.close_mask(0)
    bad = []
    for Y in core.flats_between(U, c, U.full_mask):
        d = core.delta_mask(U, Y)
        if d < 0 or (d == 0 and Y != c):
            bad.append(sorted(U.ids_of(Y)))
    return bad


# -- bases

def ej_basis(B, A):
    """E-points of B outside A, one per Hecke class not met in A (EXP: lin-independent over A)."""
    U = core._same_universe(B, A)
    _, b = core._closed_mask(B)
    _, a = core._closed_mask(A)
    if a & ~b:
        raise PredimError("NOT_SUBSET", "A is not contained in B")
    if U.class_id == ClassId.AB_INITIO:
        raise PredimError("BAD_CLASS", "ab initio structures have no E-points")
    if U.class_id == ClassId.EXP_TOY:
        span = Span(U.points[x].lin for x, _ in U.live_epoints(a))
        out = []
        for e in U.live_epoints(b):
            if span.add(U.points[e[0]].lin):
                out.append(e)
        return out
    seen = {U.hecke_key(e[1]) for e in U.live_epoints(a)}
    out = []
    for e in U.live_epoints(b):
        k = U.hecke_key(e[1])
        if k not in seen:
            seen.add(k)
            out.append(e)
    return out


def sigma(S):
    return core.delta(S).sigma


def set_level_delta(U, pairs):
    """rank of the pairs' points minus lin-rank of their x-sides (finite sets, no closure)."""
    P = U.points
    return (Span(P[pid].td for e in pairs for pid in e).rank
            - Span(P[e[0]].lin for e in pairs).rank)


# -- universe surgery helpers

def _fresh(U, stem, taken=None):
    taken = set(U.ids) if taken is None else taken
    k = 0
    while f"{stem}{k}" in taken:
        k += 1
    return f"{stem}{k}"


def _fresh_label(used, stem):
    k = 0
    while f"{stem}{k}" in used:
        k += 1
    used.add(f"{stem}{k}")
    return f"{stem}{k}"


def _labels(U, key):
    return {getattr(p, key) for p in U.points.values() if getattr(p, key) is not None}


def _extend(U, new_points, new_epairs, extra_dims):
    """New universe with `extra_dims` appended coordinates (existing vectors padded)."""
    dim = U.dim + extra_dims
    pts = []
    for pid in U.ids:
        p = U.points[pid]
        pts.append(Point(pid, p.td + (Fraction(0),) * extra_dims, p.lin, p.hecke, p.sl2, p.constant))
    pts.extend(Point(p.id, tuple(p.td) + (Fraction(0),) * (dim - len(p.td)), p.lin, p.hecke, p.sl2, p.constant)
               for p in new_points)
    return Universe(U.class_id, pts, list(U.epairs) + list(new_epairs), name=U.name)


def _axis(dim, i, scale=1):
    v = [Fraction(0)] * dim
    v[i] = Fraction(scale)
    return tuple(v)


@dataclass
class Extension:
    universe: Universe
    structure: Substructure
    base: Substructure
    strong: core.StrongCheck = None
    audit: AxiomReport = None
    added: tuple = ()

    def to_json(self):
        return {"universe": self.universe.to_json(), "structure": sorted(self.structure.members),
                "base": sorted(self.base.members), "added": list(self.added),
                "strong": None if self.strong is None else self.strong.to_json(),
                "relative_delta": core.delta(self.structure).delta - core.delta(_rebase(self)).delta,
                "audit": None if self.audit is None else self.audit.to_json()}


def _rebase(ext):
    return Substructure(ext.universe, ext.universe.closure(ext.base.members))


def adjoin_transcendentals(U, k=1, paired=False, prefix="t"):
    """k fresh independent points with fresh Hecke labels (EXP: fresh E-pairs when paired)."""
    if U.class_id == ClassId.AB_INITIO:
        raise PredimError("BAD_CLASS", "use the ab initio builder")
    used_h, used_s = _labels(U, "hecke"), _labels(U, "sl2")
    taken = set(U.ids)
    dim = U.dim
    lin_dim = U.lin_dim
    pts, eps, extra, extra_lin = [], [], 0, 0
    for _ in range(k):
        if U.class_id == ClassId.EXP_TOY:
            x = _fresh(U, prefix + "x", taken)
            taken.add(x)
            lin = tuple([Fraction(0)] * (lin_dim + extra_lin)) + (Fraction(1),)
            extra_lin += 1
            pts.append(Point(x, _axis(dim + extra + 1, dim + extra), lin))
            extra += 1
            if paired:
                y = _fresh(U, prefix + "y", taken)
                taken.add(y)
                pts.append(Point(y, _axis(dim + extra + 1, dim + extra)))
                extra += 1
                eps.append((x, y))
            continue
        j = _fresh(U, prefix + "j", taken)
        taken.add(j)
        pts.append(Point(j, _axis(dim + extra + 1, dim + extra), hecke=_fresh_label(used_h, "h")))
        extra += 1
        if paired:
            group = [("z", "sl2")] + ([("j1", None), ("j2", None)] if U.class_id == ClassId.EJ_DERIV_TOY else [])
            ids = []
            for stem, lab in group:
                pid = _fresh(U, prefix + stem, taken)
                taken.add(pid)
                pts.append(Point(pid, _axis(dim + extra + 1, dim + extra),
                                 sl2=_fresh_label(used_s, "s") if lab else None))
                extra += 1
                ids.append(pid)
            eps.append((ids[0], j, *ids[1:]))
    pts = [_pad_lin(p, lin_dim + extra_lin) for p in pts]
    base = [U.points[i] for i in U.ids]
    if U.class_id == ClassId.EXP_TOY:
        base = [_pad_lin(p, lin_dim + extra_lin) for p in base]
    V = _extend(U.replace(points=base), pts, eps, extra)
    return Extension(V, whole(V), generate(V, U.ids), added=tuple(p.id for p in pts))


def _pad_lin(p, n):
    if p.lin is None:
        return p
    return Point(p.id, p.td, tuple(p.lin) + (Fraction(0),) * (n - len(p.lin)), p.hecke, p.sl2, p.constant)


# -- full extension

def unmatched(U, A):
    """Non-constant j-role points of A (EXP: x-role points) without an E-partner inside A."""
    P = U.points
    inside = [e for e in U.epairs if set(e) <= A.members]
    if U.class_id == ClassId.EXP_TOY:
        xs = {e[0] for e in inside}
        return sorted(pid for pid in A.members
                      if P[pid].lin is not None and _nonzero(P[pid].lin) and pid not in xs)
    js = {e[1] for e in inside}
    return sorted(pid for pid in A.members
                  if P[pid].hecke is not None and _nonzero(P[pid].td) and pid not in js)


def full_extension(U, A, cap=core.DEFAULT_CAP):
    """Give every unmatched j of A a partner; class-mates share the partner's vector and orbit."""
    if A.universe is not U:
        raise PredimError("UNKNOWN_UNIVERSE", "A must live in U")
    core._closed_mask(A)
    todo = unmatched(U, A)
    if not todo:
        return Extension(U, A, A, core.StrongCheck(True), axiom_audit(U))
    # a partner already present in U is pulled in rather than duplicated
    role = 0 if U.class_id == ClassId.EXP_TOY else 1
    present = [e for e in U.epairs if e[role] in todo]
    if present:
        more = full_extension(U, generate(U, A.members | {p for e in present for p in e}), cap)
        V = more.universe
        A2 = generate(V, A.members)
        return Extension(V, more.structure, A2, core.is_strong(A2, more.structure, cap),
                         more.audit, more.added)
    P = U.points
    deriv = U.class_id == ClassId.EJ_DERIV_TOY
    exp = U.class_id == ClassId.EXP_TOY
    used_s = _labels(U, "sl2")
    taken = set(U.ids)
    groups = {}
    for j in todo:
        groups.setdefault(("#" + j) if exp else U.hecke_key(j), []).append(j)
    slots = 3 if deriv else 1
    extra = slots * len(groups)
    dim = U.dim + extra
    pts, eps, axis = [], [], U.dim
    for key in sorted(groups):
        lab = None if exp else _fresh_label(used_s, "s")
        vecs = [_axis(dim, axis + i) for i in range(slots)]
        axis += slots
        for j in groups[key]:
            stems = ("y",) if exp else ("z", "j1", "j2") if deriv else ("z",)
            ids = []
            for i, stem in enumerate(stems):
                pid = _fresh(U, f"{stem}_{j}_", taken)
                taken.add(pid)
                # class-mates are interalgebraic: reuse the class's fresh directions
                pts.append(Point(pid, vecs[i], sl2=lab if i == 0 and not exp else None))
                ids.append(pid)
            eps.append((j, ids[0]) if exp else (ids[0], j, *ids[1:]))
    V = _extend(U, pts, eps, extra)
    A2 = generate(V, A.members)
    hat = generate(V, A.members | {p.id for p in pts})
    if len(hat) > cap:
        raise PredimError("CAP_EXCEEDED", f"full extension has {len(hat)} points (cap {cap})")
    return Extension(V, hat, A2, core.is_strong(A2, hat, cap), axiom_audit(V),
                     tuple(p.id for p in pts))


def is_full(S):
    return not unmatched(S.universe, S)


# -- free amalgam

def _basis_ids(U, ids, key="td"):
    span = Span()
    out = []
    for pid in sorted(ids):
        v = getattr(U.points[pid], key)
        if v is not None and span.add(v):
            out.append(pid)
    return out


def _coords(U, basis, pid, key="td"):
    c = solve_in_basis([getattr(U.points[b], key) for b in basis], getattr(U.points[pid], key))
    if c is None:
        raise PredimError("BAD_AMALGAM", f"{pid} is outside the expected span")
    return c


@dataclass
class Amalgam:
    universe: Universe
    structure: Substructure
    b1: Substructure
    b2: Substructure
    b1_strong: core.StrongCheck
    b2_strong: core.StrongCheck
    a_strong_in_b1: bool
    audit: AxiomReport
    renamed: dict

    def to_json(self):
        return {"universe": self.universe.to_json(), "b1_strong": self.b1_strong.to_json(),
                "b2_strong": self.b2_strong.to_json(), "a_strong_in_b1": self.a_strong_in_b1,
                "audit": self.audit.to_json(), "renamed": self.renamed,
                "delta": core.delta(self.structure).to_json()}


def free_amalgam_toy(A, B1, B2, cap=core.DEFAULT_CAP):
    """B1 and B2 glued along A with rank-independent extensions over A."""
    U1, U2 = B1.universe, B2.universe
    if U1.class_id != U2.class_id or U1.class_id == ClassId.AB_INITIO:
        raise PredimError("BAD_CLASS", "both sides must be field surrogates of one class")
    exp = U1.class_id == ClassId.EXP_TOY
    a = set(A.members)
    if not a <= B1.members or not a <= B2.members:
        raise PredimError("NOT_SUBSET", "A must lie in both B1 and B2")
    if U1 is U2 and B1.members & B2.members != A.members:
        raise PredimError("BAD_AMALGAM", "A must be the intersection of B1 and B2")
    A1, A2 = Substructure(U1, frozenset(a)), Substructure(U2, frozenset(a))
    core._closed_mask(A1), core._closed_mask(A2)
    keys = ("td", "lin") if exp else ("td",)
    for pid in a:
        p1, p2 = U1.points[pid], U2.points[pid]
        if (p1.hecke, p1.sl2, p1.constant) != (p2.hecke, p2.sl2, p2.constant):
            raise PredimError("BAD_AMALGAM", f"{pid} is labelled differently on the two sides")
    if {e for e in U1.epairs if set(e) <= a} != {e for e in U2.epairs if set(e) <= a}:
        raise PredimError("BAD_AMALGAM", "E restricted to A differs on the two sides")
    bases = {}
    for key in keys:
        basis = _basis_ids(U1, a, key)
        if _basis_ids(U2, a, key) != basis:
            raise PredimError("BAD_AMALGAM", "A has different configurations on the two sides")
        for pid in a:
            if getattr(U1.points[pid], key) is None:
                continue
            if _coords(U1, basis, pid, key) != _coords(U2, basis, pid, key):
                raise PredimError("BAD_AMALGAM", f"{pid} sits differently over A on the two sides")
        bases[key] = basis
    if unmatched(U1, A1):
        # both sides could partner the same j of A in different orbits
        raise PredimError("NOT_FULL", "A must be full; apply full_extension first",
                          unmatched=unmatched(U1, A1))
    strong2 = core.is_strong(A2, B2, cap)
    if not strong2:
        raise PredimError("NOT_STRONG", "A is not strong in B2", witness=sorted(strong2.witness))
    strong1 = bool(core.is_strong(A1, B1, cap))

    rest1 = sorted(B1.members - a)
    rest2 = sorted(B2.members - a)
    # point ids and orbit labels from B2 that clash with B1 get a side tag
    taken = set(B1.members)
    rename = {}
    for pid in rest2:
        new = pid
        while new in taken:
            new += "@2"
        taken.add(new)
        rename[pid] = new
    labs = {}
    for key in ("hecke", "sl2"):
        a_labs = {getattr(U1.points[p], key) for p in a}
        one = {getattr(U1.points[p], key) for p in rest1}
        labs[key] = {}
        for p in rest2:
            lab = getattr(U2.points[p], key)
            if lab is None or lab in a_labs:
                continue
            new = lab
            while new in one:
                new += "@2"
            labs[key][lab] = new

    pts, dims = {}, {}
    for key in keys:
        base = bases[key]
        ext1 = _extension_basis(U1, base, rest1, key)
        ext2 = _extension_basis(U2, base, rest2, key)
        n_a, n1, n2 = len(base), len(ext1), len(ext2)
        dims[key] = n_a + n1 + n2
        for pid in sorted(a) + rest1:
            v = getattr(U1.points[pid], key)
            if v is None:
                continue
            c = _coords(U1, base + ext1, pid, key)
            pts.setdefault(pid, {})[key] = tuple(c[:n_a]) + tuple(c[n_a:]) + (Fraction(0),) * n2
        for pid in rest2:
            v = getattr(U2.points[pid], key)
            if v is None:
                continue
            c = _coords(U2, base + ext2, pid, key)
            pts.setdefault(rename[pid], {})[key] = tuple(c[:n_a]) + (Fraction(0),) * n1 + tuple(c[n_a:])
    out = []
    for pid in sorted(a) + rest1:
        p = U1.points[pid]
        out.append(Point(pid, pts.get(pid, {}).get("td", (Fraction(0),) * dims["td"]),
                         pts.get(pid, {}).get("lin"), p.hecke, p.sl2, p.constant))
    for pid in rest2:
        p = U2.points[pid]
        out.append(Point(rename[pid], pts.get(rename[pid], {}).get("td", (Fraction(0),) * dims["td"]),
                         pts.get(rename[pid], {}).get("lin"),
                         labs["hecke"].get(p.hecke, p.hecke), labs["sl2"].get(p.sl2, p.sl2), p.constant))
    eps = {e for e in U1.epairs if set(e) <= B1.members}
    eps |= {tuple(rename.get(x, x) for x in e) for e in U2.epairs if set(e) <= B2.members}
    V = Universe(U1.class_id, out, sorted(eps), name=f"{U1.name}*{U2.name}")
    B = whole(V)
    b1 = generate(V, B1.members)
    b2 = generate(V, [rename.get(x, x) for x in B2.members])
    return Amalgam(V, B, b1, b2, core.is_strong(b1, B, cap), core.is_strong(b2, B, cap),
                   strong1, axiom_audit(V), rename)


def _extension_basis(U, base, rest, key):
    span = Span(getattr(U.points[b], key) for b in base)
    out = []
    for pid in rest:
        v = getattr(U.points[pid], key)
        if v is not None and span.add(v):
            out.append(pid)
    return out


def amalgam_inequality(am, faithful_only=True):
    """delta(X) >= delta(X & B1) + delta(X & B2) - delta(X & A) for every structure X.

    A structure X whose span meets span(A) in more than the span of its own
    A-points has lost part of its intersection with A (the surrogate only
    holds finitely many points of A).  Those X are skipped when
    `faithful_only` is set.
    """
    U = am.universe
    b1, b2 = am.b1.mask, am.b2.mask
    a = b1 & b2
    ra = U.td_rank(a)
    bad = []
    for X in core.flats_between(U, 0, U.full_mask):
        if faithful_only and U.td_rank(X) + ra - U.td_rank(X | a) != U.td_rank(X & a):
            continue
        lhs = core.delta_mask(U, X)
        rhs = (core.delta_mask(U, X & b1) + core.delta_mask(U, X & b2) - core.delta_mask(U, X & a))
        if lhs < rhs:
            bad.append(sorted(U.ids_of(X)))
    return bad


# -- generic points of normal free varieties

ROLE_STEMS = {Role.X: "z", Role.Y: "j", Role.Y1: "j1", Role.Y2: "j2"}


def gsec_witness(U, A, V, bindings=None, modular_bound=2, seed=0, cap=core.DEFAULT_CAP):
    """Adjoin a generic E-point of V over A.

    Parameters named in `bindings` are bound to points of A; the rest are
    free.  The generic point is realised by Jacobian rows: coordinate c gets
    the vector sum_t dphi_c/dt * v(t), where v(t) is the bound point's
    vector or a fresh axis for a free parameter.
    """
    if U.class_id not in (ClassId.EJ_TOY, ClassId.EJ_DERIV_TOY):
        raise PredimError("BAD_CLASS", "generic points are built for the j toys")
    deriv = U.class_id == ClassId.EJ_DERIV_TOY
    if deriv != V.deriv:
        raise PredimError("BAD_VARIETY", "variety shape does not match the class")
    if A.universe is not U:
        raise PredimError("UNKNOWN_UNIVERSE", "A must live in U")
    core._closed_mask(A)
    bindings = dict(bindings or {})
    for t, pid in bindings.items():
        if t not in V.params:
            raise PredimError("BAD_INPUT", f"{t} is not a parameter")
        if pid not in A.members:
            raise PredimError("BAD_INPUT", f"{pid} is not in A")
    bound_ids = [bindings[t] for t in V.params if t in bindings]
    if Span(U.points[p].td for p in bound_ids).rank != len(bound_ids):
        raise PredimError("UNSUPPORTED", "bound parameters must be independent points of A")
    if not core.is_strong(A, whole(U), cap):
        raise PredimError("NOT_STRONG", "A is not strong in U")
    w = 3 if deriv else 1
    n = V.n
    free = [t for t in V.params if t not in bindings]
    fi = [V.params.index(t) for t in free]
    ss = samples(V, seed, 5, tag="gsec")
    # over A: Jacobian in the free parameters only
    over_a = [[tuple(r[i] for i in fi) for r in s.rows] for s in ss]

    def rank_over_a(coords):
        return max(Span([rows[c] for c in coords]).rank for rows in over_a)

    def rank_over_c(coords):
        return max(Span([s.rows[c] for c in coords]).rank for s in ss)

    if rank_over_a(range(V.m)) != w * n:
        raise PredimError("WRONG_DIM", f"dim V over A is {rank_over_a(range(V.m))}, expected {w * n}")
    for k in range(1, n + 1):
        for idx in itertools.combinations(range(n), k):
            cs = [c for i in idx for c in V.pair_coords(i)]
            if rank_over_a(cs) < w * k:
                raise PredimError("NOT_NORMAL", f"projection {idx} is too small over A", index=list(idx))
            if rank_over_c(cs) <= w * k:
                raise PredimError("NOT_NORMAL", f"projection {idx} is not strongly normal over C",
                                  index=list(idx))
    verdict = is_free(V, modular_bound, seed=seed)
    if verdict.verdict != "FREE":
        raise PredimError("NOT_FREE", f"forced relation {verdict.reason}", N=verdict.N,
                          pair=list(verdict.pair))
    # realize at a sample whose rank profile over A is the generic one
    profiles = [tuple(Span([rows[c] for c in cs]).rank
                      for k in range(1, V.m + 1) for cs in itertools.combinations(range(V.m), k))
                for rows in over_a]
    top = tuple(map(max, zip(*profiles)))
    if top not in profiles:
        raise PredimError("SINGULAR_SAMPLE_EXHAUSTED", "no sample realizes the generic rank profile")
    g = ss[profiles.index(top)]
    a_js = [e[1] for e in U.epairs if e[1] in A.members]
    for c in range(V.m):
        if not any(over_a[0][c]) and rank_over_a([c]) == 0:
            vec = _linear_vector(U, V, g, c, bindings, {}, 0)
            if V.roles[c] == Role.Y and any(_parallel(vec, U.points[j].td) for j in a_js):
                raise PredimError("UNSUPPORTED", "y lies in a fibre over an E-point of A; needs generic constants")
            raise PredimError("UNSUPPORTED", f"coordinate {c} is algebraic over A")
    extra = len(free)
    dim = U.dim + extra
    axes = {t: U.dim + i for i, t in enumerate(free)}
    used_h, used_s = _labels(U, "hecke"), _labels(U, "sl2")
    taken = set(U.ids)
    pts, eps = [], []
    for i in range(n):
        ids = []
        for c in V.pair_coords(i):
            role = V.roles[c]
            pid = _fresh(U, f"g{ROLE_STEMS[role]}{i}_", taken)
            taken.add(pid)
            lab = {}
            if role == Role.X:
                lab["sl2"] = _fresh_label(used_s, "s")
            if role == Role.Y:
                lab["hecke"] = _fresh_label(used_h, "h")
            pts.append(Point(pid, _linear_vector(U, V, g, c, bindings, axes, dim), **lab))
            ids.append(pid)
        eps.append(tuple(ids))
    W = _extend(U, pts, eps, extra)
    A2 = generate(W, A.members)
    B = generate(W, A.members | {p.id for p in pts})
    if len(B) > cap:
        raise PredimError("CAP_EXCEEDED", f"witness structure has {len(B)} points")
    ext = Extension(W, B, A2, core.is_strong(A2, B, cap), axiom_audit(W), tuple(p.id for p in pts))
    ext.top_strong = core.is_strong(B, whole(W), cap) if len(W) <= cap else None
    return ext


def _linear_vector(U, V, sample, c, bindings, axes, dim):
    dim = dim or U.dim
    v = [Fraction(0)] * dim
    for t, d in zip(V.params, sample.rows[c]):
        if not d:
            continue
        if t in bindings:
            for k, x in enumerate(U.points[bindings[t]].td):
                v[k] += d * x
        elif t in axes:
            v[axes[t]] += d
    return tuple(v)


# -- isomorphism over a common base

def _rank_profile(U, ids):
    ids = list(ids)
    return {m: Span(U.points[ids[i]].td for i in range(len(ids)) if m >> i & 1).rank
            for m in range(1 << len(ids))}


def is_isomorphic_over(A, B1, B2, limit=8):
    """A label- and rank-preserving bijection B1 -> B2 fixing A pointwise."""
    U1, U2 = B1.universe, B2.universe
    a = set(A.members)
    if not a <= B1.members or not a <= B2.members:
        raise PredimError("NOT_SUBSET", "A must lie in both structures")
    r1, r2 = sorted(B1.members - a), sorted(B2.members - a)
    if len(r1) != len(r2):
        return False
    if len(r1) > limit:
        raise PredimError("CAP_EXCEEDED", "exhaustive matcher is limited to small extensions")
    P1, P2 = U1.points, U2.points
    a_h = {P1[p].hecke for p in a}
    a_s = {P1[p].sl2 for p in a}
    E1 = {e for e in U1.epairs if set(e) <= B1.members}
    E2 = {e for e in U2.epairs if set(e) <= B2.members}
    order = sorted(a) + r1
    prof1 = _rank_profile(U1, order)
    for perm in itertools.permutations(r2):
        f = {p: p for p in a}
        f.update(zip(r1, perm))
        if any(P1[p].constant != P2[f[p]].constant for p in r1):
            continue
        if {tuple(f[x] for x in e) for e in E1} != E2:
            continue
        if not (_label_map(P1, P2, f, "hecke", a_h) and _label_map(P1, P2, f, "sl2", a_s)):
            continue
        if _rank_profile(U2, [f[p] for p in order]) == prof1:
            return True
    return False


def _label_map(P1, P2, f, key, fixed):
    fwd, back = {}, {}
    for p, q in f.items():
        l1, l2 = getattr(P1[p], key), getattr(P2[q], key)
        if (l1 is None) != (l2 is None):
            return False
        if l1 is None:
            continue
        if l1 in fixed and l1 != l2:
            return False
        if fwd.setdefault(l1, l2) != l2 or back.setdefault(l2, l1) != l1:
            return False
    return True


def extension_invariant(A, B):
    """Locus surrogate of B over A: sigma(B/A), td(B/A), and the rank profile of a basis over A."""
    U = B.universe
    a = U.mask(A.members)
    basis = ej_basis(B, A)
    base_span = Span(U.points[p].td for p in A.members)
    pts = [p for e in basis for p in e]
    profile = []
    for m in range(1 << len(pts)):
        s = base_span.copy()
        for i, p in enumerate(pts):
            if m >> i & 1:
                s.add(U.points[p].td)
        profile.append(s.rank - base_span.rank)
    return (len(basis), U.td_rank(U.mask(B.members)) - U.td_rank(a), tuple(profile))
