"""Seeded random universes and strong extensions for the property batteries.

Field universes respect the orbit invariants the predimension relies on:
Hecke class-mates are parallel, each Hecke class has one SL2 class whose
members are parallel, and in the exponential toy x-side lin vectors are
multiples of coordinate axes with same-axis pairs parallel.
"""
import itertools
import random
from fractions import Fraction

from . import core
from .ab_initio import TernaryStructure, is_strong_exhaustive, in_k0
from .errors import PredimError
from .toy_fields import adjoin_transcendentals, full_extension, gsec_witness
from .universe import ClassId, Point, Universe, generate, whole
from .varieties import pairs_variety


def _vec(rng, dim, lo=-2, hi=2):
    while True:
        v = tuple(Fraction(rng.randint(lo, hi)) for _ in range(dim))
        if any(v):
            return v


def _scale(rng, v):
    c = Fraction(rng.choice([1, -1, 2, -2, 3]), rng.choice([1, 1, 2]))
    return tuple(c * x for x in v)


def random_ab(rng, max_points=12, density=None):
    n = rng.randint(1, max_points)
    els = [f"e{i}" for i in range(n)]
    rels = set()
    if n >= 3:
        k = rng.randint(0, int((density or rng.uniform(0.3, 1.5)) * n))
        for _ in range(k):
            rels.add(tuple(rng.sample(els, 3)))
    return TernaryStructure(frozenset(els), frozenset(rels))


def random_universe(class_id, rng, max_points=12, name="R"):
    """A universe satisfying the orbit invariants (not necessarily Ax-Schanuel)."""
    class_id = ClassId(class_id)
    if class_id == ClassId.AB_INITIO:
        return random_ab(rng, max_points).as_universe(name)
    dim = rng.randint(1, 5)
    pts, eps = [], []
    budget = rng.randint(1, max_points)
    ids = itertools.count()

    def new(prefix):
        return f"{prefix}{next(ids)}"

    if rng.random() < 0.3:
        pts.append(Point(new("c"), (Fraction(0),) * dim))
        budget -= 1
    deriv = class_id == ClassId.EJ_DERIV_TOY
    exp = class_id == ClassId.EXP_TOY
    width = 4 if deriv else 2
    n_axes = 0
    while budget > 0:
        r = rng.random()
        if r < 0.25 or budget < width:
            pts.append(Point(new("p"), _vec(rng, dim)))
            budget -= 1
            continue
        # one orbit class: base directions reused by every member
        if exp:
            axis = n_axes
            n_axes += 1
        dirs = [_vec(rng, dim) for _ in range(width)]
        h, s = new("h"), new("s")
        members = 1 if budget < 2 * width or rng.random() < 0.6 else 2
        for _ in range(members):
            group = []
            for slot in range(width):
                pid = new("xzjk"[slot] if not exp else "xy"[slot])
                v = _scale(rng, dirs[slot])
                if slot >= 2:
                    # derivative slots of class-mates are interalgebraic with the whole tuple
                    for k in range(slot):
                        c = Fraction(rng.randint(-1, 1))
                        v = tuple(a + c * b for a, b in zip(v, dirs[k]))
                if exp:
                    lin = None
                    if slot == 0:
                        lin = tuple(Fraction(0) if i != axis else Fraction(rng.choice([1, 2, -1]))
                                    for i in range(axis + 1))
                    pts.append(Point(pid, v, lin))
                else:
                    lab = {0: {"sl2": s}, 1: {"hecke": h}}.get(slot, {})
                    pts.append(Point(pid, v, **lab))
                group.append(pid)
            eps.append(tuple(group))
            budget -= width
        if not exp and rng.random() < 0.3 and budget > 0:
            # an unpaired class-mate would break label closure; add a lone j of a fresh class
            pts.append(Point(new("j"), _vec(rng, dim), hecke=new("h")))
            budget -= 1
    if exp:
        width_lin = n_axes
        pts = [p if p.lin is None else Point(p.id, p.td, tuple(p.lin) + (Fraction(0),) * (width_lin - len(p.lin)))
               for p in pts]
    return Universe(class_id, pts, eps, name=name)


# -- strong extensions

def ab_extension(A, rng, max_new=3, tries=200):
    """B in K0 with A <= B, adding up to max_new elements and random triples through them."""
    for _ in range(tries):
        new = [f"n{i}" for i in range(rng.randint(1, max_new))]
        els = sorted(A.elements) + new
        rels = set(A.relations)
        for _ in range(rng.randint(0, 2 * len(new)) if len(els) >= 3 else 0):
            t = tuple(rng.sample(els, 3))
            if any(x in new for x in t):
                rels.add(t)
        B = TernaryStructure(frozenset(els), frozenset(rels))
        if in_k0(B) and is_strong_exhaustive(B, A.elements) is None:
            return B
    raise PredimError("GENERATOR_EXHAUSTED", "no strong extension found")


def ab_base(rng, max_base=4):
    for _ in range(200):
        A = random_ab(rng, max_base, density=0.6)
        if in_k0(A):
            return A
    raise PredimError("GENERATOR_EXHAUSTED", "no base in K0 found")


def ab_strong_pair(rng, max_base=4, max_new=3):
    """(A, B) with A <= B, both in K0."""
    A = ab_base(rng, max_base)
    return A, ab_extension(A, rng, max_new)


def ab_triple(rng):
    A = ab_base(rng)
    return A, ab_extension(A, rng), ab_extension(A, rng)


def constants_universe(class_id, n_constants=1):
    return Universe(ClassId(class_id), [Point(f"c{i}", ()) for i in range(n_constants)], name="C")


def full_base(class_id, rng, max_transcendentals=2):
    """A full structure grown from the constants by adjoining points and matching them."""
    class_id = ClassId(class_id)
    U = constants_universe(class_id)
    k = 1 if class_id == ClassId.EJ_DERIV_TOY else rng.randint(1, max_transcendentals)
    U = adjoin_transcendentals(U, k, paired=rng.random() < 0.4).universe
    ext = full_extension(U, whole(U))
    return ext.universe


def _independent_points(U, ids):
    from .linalg import Span
    span, out = Span(), []
    for pid in sorted(ids):
        if span.add(U.points[pid].td):
            out.append(pid)
    return out


def _lin_form(rng, names):
    terms = [f"(* {rng.choice([1, 2, 3, -1, -2])} {n})" for n in names]
    if rng.random() < 0.5 and len(names) >= 1:
        a, b = rng.choice(names), rng.choice(names)
        terms.append(f"(* {a} {b})")
    return f"(+ {' '.join(terms)} {rng.randint(-3, 3)})"


def random_gsec_variety(U, A, rng):
    """A random parametric variety with free parameters and parameters bound to points of A."""
    deriv = U.class_id == ClassId.EJ_DERIV_TOY
    n = 1 if deriv else rng.randint(1, 2)
    w = 3 if deriv else 1
    cands = _independent_points(U, [p for p in A.members if any(U.points[p].td)])
    r = min(len(cands), rng.randint(1, 2))
    bound = dict(zip([f"a{i}" for i in range(r)], rng.sample(cands, r)))
    free = [f"t{i}" for i in range(w * n)]
    names = free + sorted(bound)
    cols = {"x": [], "y": [], "y1": [], "y2": []}
    for i in range(n):
        for role in (("x", "y", "y1", "y2") if deriv else ("x", "y")):
            chosen = [rng.choice(free)] + rng.sample(names, rng.randint(1, len(names)))
            cols[role].append(_lin_form(rng, sorted(set(chosen))))
    V = pairs_variety(names, cols["x"], cols["y"], cols["y1"] if deriv else (), cols["y2"] if deriv else ())
    return V, bound


def gsec_extension(U, rng, tries=20, seed=0):
    """Adjoin a generic point of a random admissible variety over the whole of U."""
    A = whole(U)
    last = None
    for k in range(tries):
        V, bound = random_gsec_variety(U, A, rng)
        try:
            return gsec_witness(U, A, V, bound, seed=seed + k).universe
        except PredimError as err:
            if err.code not in ("NOT_NORMAL", "NOT_FREE", "WRONG_DIM", "UNSUPPORTED",
                                "SINGULAR_SAMPLE_EXHAUSTED"):
                raise
            last = err
    raise PredimError("GENERATOR_EXHAUSTED", "no admissible variety found", last=str(last))


def exp_generic_pairs(U, rng, n=1, tries=30):
    """n new E-pairs with fresh lin directions whose vectors add exactly n to the rank over U."""
    A = whole(U)
    base = _independent_points(U, A.members)
    for _ in range(tries):
        dim = U.dim + n
        lin_dim = U.lin_dim + n
        pts = [p if p.lin is None else Point(p.id, p.td, tuple(p.lin) + (Fraction(0),) * n, p.hecke, p.sl2, p.constant)
               for p in (U.points[i] for i in U.ids)]
        new, eps = [], []
        for i in range(n):
            pair = []
            for side in "xy":
                v = [Fraction(0)] * dim
                for b in base:
                    c = rng.randint(-2, 2)
                    for k, x in enumerate(U.points[b].td):
                        v[k] += c * x
                for k in range(n):
                    v[U.dim + k] += rng.randint(-2, 2)
                lin = None
                if side == "x":
                    lin = tuple(Fraction(int(k == U.lin_dim + i)) for k in range(lin_dim))
                pid = f"g{side}{len(U) + len(new)}"
                new.append(Point(pid, tuple(v), lin))
                pair.append(pid)
            eps.append(tuple(pair))
        try:
            V = Universe(U.class_id, pts + new, list(U.epairs) + eps, name=U.name)
        except PredimError:
            continue
        from .toy_fields import axiom_audit
        A2 = generate(V, U.ids)
        if A2.members != frozenset(U.ids):
            continue
        B = whole(V)
        if core.delta(B).delta != core.delta(A2).delta:
            continue
        if core.is_strong(A2, B) and axiom_audit(V).ok:
            return V
    return adjoin_transcendentals(U, 1, paired=True).universe


def random_strong_extension(U, rng, seed=0):
    """One random step from the AS-preserving operations; U <= result."""
    r = rng.random()
    if r < 0.3:
        return adjoin_transcendentals(U, 1, paired=rng.random() < 0.5, prefix="n").universe
    if U.class_id == ClassId.EXP_TOY:
        return exp_generic_pairs(U, rng)
    return gsec_extension(U, rng, seed=seed)


def amalgam_triple(class_id, rng, seed=0):
    """(A, B1, B2) with A full and strong in both sides, on separate universes."""
    U = full_base(class_id, rng)
    V1 = random_strong_extension(U, rng, seed)
    V2 = random_strong_extension(Universe.loads(U.dumps()), rng, seed + 1)
    return generate(V1, U.ids), whole(V1), whole(V2)
