"""Class-agnostic predimension engine.

Every function works on span-closed subsets of a finite universe, encoded
internally as bitmasks.  Strongness and closures are decided by exhaustive
search over the structures between two bounds, which is exact because the
universe is finite.
"""
from dataclasses import dataclass

from .errors import PredimError
from .rng import stream
from .universe import Substructure, Universe

DEFAULT_CAP = 16


@dataclass(frozen=True)
class PredimReport:
    td: int
    sigma: int
    delta: int
    basis_witness: tuple

    def to_json(self):
        return {"td": self.td, "sigma": self.sigma, "delta": self.delta,
                "basis_witness": [list(e) for e in self.basis_witness]}


@dataclass(frozen=True)
class StrongCheck:
    strong: bool
    witness: frozenset = None
    deficit: int = 0

    def __bool__(self):
        return self.strong

    def to_json(self):
        return {"strong": self.strong,
                "witness": None if self.witness is None else sorted(self.witness),
                "deficit": self.deficit}


def _universe(S):
    U = getattr(S, "universe", None)
    if not isinstance(U, Universe):
        raise PredimError("UNKNOWN_UNIVERSE", "structure does not point at a universe")
    return U


def _closed_mask(S):
    U = _universe(S)
    m = U.mask(S.members)
    if not U.is_closed_mask(m):
        raise PredimError("UNCLOSED_INPUT", "members are not closed under generation",
                          missing=sorted(U.ids_of(U.close_mask(m) & ~m)))
    return U, m


def _same_universe(*structures):
    U = _universe(structures[0])
    for S in structures[1:]:
        if _universe(S) is not U:
            raise PredimError("UNKNOWN_UNIVERSE", "structures live in different universes")
    return U


def delta_mask(U, mask):
    p = U.parts(mask)
    return p.td - U.klass.sigma_weight * p.sigma


def report_mask(U, mask):
    p = U.parts(mask)
    return PredimReport(p.td, p.sigma, p.td - U.klass.sigma_weight * p.sigma, p.basis)


def delta(S):
    U, m = _closed_mask(S)
    return report_mask(U, m)


def relative_delta(X, A):
    U = _same_universe(X, A)
    _, a = _closed_mask(A)
    xa = U.close_mask(U.mask(X.members) | a)
    return delta_mask(U, xa) - delta_mask(U, a)


def flats_between(U, low, high):
    """All closed masks Y with low <= Y <= high; `low` is closed first."""
    low = U.close_mask(low)
    if low & ~high:
        return []
    if not U.is_field():
        free = high & ~low
        out, sub = [], free
        while True:
            out.append(low | sub)
            if sub == 0:
                break
            sub = (sub - 1) & free
        return out
    seen = {low}
    todo = [low]
    bits = [1 << i for i in range(len(U)) if high >> i & 1]
    while todo:
        F = todo.pop()
        for b in bits:
            if F & b:
                continue
            G = U.close_mask(F | b)
            if G not in seen and not G & ~high:
                seen.add(G)
                todo.append(G)
    return list(seen)


def _cap(U, mask, cap):
    n = bin(mask).count("1")
    if n > cap:
        raise PredimError("CAP_EXCEEDED", f"{n} points exceed the exhaustive-search cap {cap}")


def _size_key(U, mask):
    return (bin(mask).count("1"), sorted(U.ids_of(mask)))


def is_strong(A, B, cap=DEFAULT_CAP):
    """A <= B: every structure X between A and B has delta(X) >= delta(A).

    On failure the witness is a violating structure of least size.
    """
    U = _same_universe(A, B)
    _, a = _closed_mask(A)
    _, b = _closed_mask(B)
    if a & ~b:
        raise PredimError("NOT_SUBSET", "A is not contained in B")
    _cap(U, b, cap)
    base = delta_mask(U, a)
    bad = [Y for Y in flats_between(U, a, b) if delta_mask(U, Y) < base]
    if not bad:
        return StrongCheck(True)
    Y = min(bad, key=lambda m: _size_key(U, m))
    return StrongCheck(False, U.ids_of(Y), delta_mask(U, Y) - base)


def _closure_mask(U, x, b, cap):
    _cap(U, b, cap)
    cands = flats_between(U, x, b)
    best = min(delta_mask(U, Y) for Y in cands)
    meet = b
    for Y in cands:
        if delta_mask(U, Y) == best:
            meet &= Y
    # minimizers of a submodular function are closed under intersection
    assert delta_mask(U, meet) == best
    return meet, best


def _inside(U, X, B):
    _, b = _closed_mask(B)
    x = U.mask(X)
    if x & ~b:
        raise PredimError("NOT_SUBSET", "X is not contained in B")
    return x, b


def self_sufficient_closure(X, B, cap=DEFAULT_CAP):
    """The smallest strong substructure of B containing the points X."""
    U = _universe(B)
    x, b = _inside(U, X, B)
    meet, _ = _closure_mask(U, x, b, cap)
    return Substructure(U, U.ids_of(meet))


def dimension_d(X, B, cap=DEFAULT_CAP):
    U = _universe(B)
    x, b = _inside(U, X, B)
    return _closure_mask(U, x, b, cap)[1]


def pregeometry_closure(X, B, cap=DEFAULT_CAP):
    U = _universe(B)
    x, b = _inside(U, X, B)
    d0 = _closure_mask(U, x, b, cap)[1]
    out = set()
    for i, pid in enumerate(U.ids):
        if b >> i & 1 and _closure_mask(U, x | 1 << i, b, cap)[1] == d0:
            out.add(pid)
    return frozenset(out)


@dataclass
class SubmodularityReport:
    trials: int
    violations: list

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {"trials": self.trials, "violations": self.violations, "ok": self.ok}


def submodularity_audit(B, trials=1000, seed=0):
    """Sample pairs of structures inside B and test the submodular inequality."""
    U, b = _closed_mask(B)
    rng = stream(seed, "submodularity", U.name)
    bits = [1 << i for i in range(len(U)) if b >> i & 1]
    base = U.close_mask(0)

    def sample():
        p, m = rng.random(), 0
        for bit in bits:
            if rng.random() < p:
                m |= bit
        return U.close_mask(m | base)

    violations = []
    for _ in range(trials):
        a1, a2 = sample(), sample()
        join, meet = U.close_mask(a1 | a2), a1 & a2
        lhs = delta_mask(U, join) + delta_mask(U, meet)
        rhs = delta_mask(U, a1) + delta_mask(U, a2)
        if lhs > rhs:
            violations.append({"A1": sorted(U.ids_of(a1)), "A2": sorted(U.ids_of(a2)),
                               "lhs": lhs, "rhs": rhs})
    return SubmodularityReport(trials, violations)


def constants(U):
    return Substructure(U, U.ids_of(U.close_mask(0)))
