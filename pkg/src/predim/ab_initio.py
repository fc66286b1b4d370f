"""Hrushovski's ab initio class: ternary structures with delta = |A| - |R(A)|.

Besides the direct formula this module carries the free amalgam, canonical
forms of small structures, and a fair builder that approximates the generic
model over a fixed finite horizon.
"""
import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .errors import PredimError
from .rng import stream
from .universe import ClassId, Point, Universe


@dataclass(frozen=True)
class TernaryStructure:
    elements: frozenset
    relations: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "elements", frozenset(self.elements))
        rels = frozenset(tuple(r) for r in self.relations)
        object.__setattr__(self, "relations", rels)
        for r in rels:
            if len(r) != 3 or any(a not in self.elements for a in r):
                raise PredimError("MALFORMED_TRIPLE", f"triple {r} is not over the elements")

    def induced(self, subset):
        subset = frozenset(subset)
        return TernaryStructure(subset, frozenset(r for r in self.relations if set(r) <= subset))

    def as_universe(self, name="ab"):
        return Universe(ClassId.AB_INITIO, [Point(str(a)) for a in sorted(self.elements)],
                        relations=sorted(self.relations), name=name)

    @classmethod
    def from_universe(cls, U):
        if U.class_id != ClassId.AB_INITIO:
            raise PredimError("BAD_INPUT", "not an ab initio universe")
        return cls(frozenset(U.ids), frozenset(U.relations))

    def __len__(self):
        return len(self.elements)


def delta_ab(A):
    return len(A.elements) - len(A.relations)


def subset_delta(A, subset):
    subset = set(subset)
    return len(subset) - sum(1 for r in A.relations if set(r) <= subset)


# -- strongness: exhaustive and min-cut

def is_strong_exhaustive(A, sub):
    """Least-size violating superset of `sub` in A, or None when sub <= A."""
    sub = frozenset(sub)
    rest = sorted(A.elements - sub)
    base = subset_delta(A, sub)
    for k in range(1, len(rest) + 1):
        for extra in itertools.combinations(rest, k):
            if subset_delta(A, sub.union(extra)) < base:
                return sub.union(extra)
    return None


class FlowOracle:
    """min { delta(Y) : base <= Y <= A } by a project-selection min cut.

    Nodes: source, sink, one per element, one per triple.  A triple pays 1 if
    dropped, an element costs 1 if kept, and a kept triple forces its
    elements.  The source side of a minimum cut is the least minimizer.
    """

    def __init__(self, elements, relations):
        self.elements = sorted(elements)
        self.pos = {a: i + 2 for i, a in enumerate(self.elements)}
        self.relations = sorted(set(relations))
        n, m = len(self.elements), len(self.relations)
        self.n_nodes = 2 + n + m
        self.big = n + m + 1
        rows, cols, caps = [], [], []
        for k, r in enumerate(self.relations):
            t = 2 + n + k
            rows.append(0), cols.append(t), caps.append(1)
            for a in set(r):
                rows.append(t), cols.append(self.pos[a]), caps.append(self.big)
        for a in self.elements:
            rows.append(self.pos[a]), cols.append(1), caps.append(1)
        self.rows, self.cols, self.caps = rows, cols, caps

    def minimize(self, base=()):
        rows, cols, caps = list(self.rows), list(self.cols), list(self.caps)
        for a in set(base):
            rows.append(0), cols.append(self.pos[a]), caps.append(self.big)
        C = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)),
                       shape=(self.n_nodes, self.n_nodes))
        res = maximum_flow(C, 0, 1)
        residual = (C - res.flow).tocsr()
        seen = {0}
        todo = [0]
        while todo:
            u = todo.pop()
            lo, hi = residual.indptr[u], residual.indptr[u + 1]
            for v, c in zip(residual.indices[lo:hi], residual.data[lo:hi]):
                if c > 0 and v not in seen:
                    seen.add(int(v))
                    todo.append(int(v))
        Y = frozenset(a for a in self.elements if self.pos[a] in seen)
        return int(res.flow_value) - len(self.relations), Y


def min_delta_superset(A, base=()):
    return FlowOracle(A.elements, A.relations).minimize(base)


def is_strong_flow(A, sub):
    value, _ = min_delta_superset(A, sub)
    return bool(value >= subset_delta(A, sub))


def in_k0(A):
    """Hereditarily non-negative predimension."""
    return bool(min_delta_superset(A)[0] >= 0)


def closure_ab(A, X):
    """Self-sufficient closure of X in A via min cut."""
    return min_delta_superset(A, X)[1]


# -- free amalgam

@dataclass(frozen=True)
class AbAmalgam:
    structure: TernaryStructure
    embed1: dict
    embed2: dict
    b1_strong: bool
    b2_strong: bool


def _check_embedding(A0, Ai, e, label):
    if set(e) != set(A0.elements):
        raise PredimError("BAD_EMBEDDING", f"{label} is not defined on all of A0")
    if len(set(e.values())) != len(e) or not set(e.values()) <= Ai.elements:
        raise PredimError("BAD_EMBEDDING", f"{label} is not injective into its target")
    image = {tuple(e[a] for a in r) for r in A0.relations}
    if image != set(Ai.induced(e.values()).relations):
        raise PredimError("BAD_EMBEDDING", f"{label} does not preserve the relation")


def _strong_in(Ai, sub):
    if len(Ai) <= 16:
        return is_strong_exhaustive(Ai, sub) is None
    return is_strong_flow(Ai, sub)


def free_amalgam_ab(A0, A1, A2, e1, e2):
    """A1 and A2 glued along the images of A0, no new triples."""
    _check_embedding(A0, A1, e1, "e1")
    _check_embedding(A0, A2, e2, "e2")
    for Ai, e, label in ((A1, e1, "e1"), (A2, e2, "e2")):
        if not _strong_in(Ai, e.values()):
            raise PredimError("NOT_STRONG", f"{label} is not a strong embedding")
    back = {e2[a]: e1[a] for a in A0.elements}
    f2 = {}
    used = set(A1.elements)
    for b in sorted(A2.elements, key=str):
        if b in back:
            f2[b] = back[b]
            continue
        name = b
        while name in used:
            name = f"{name}'"
        used.add(name)
        f2[b] = name
    rels = set(A1.relations) | {tuple(f2[a] for a in r) for r in A2.relations}
    B = TernaryStructure(frozenset(used), frozenset(rels))
    id1 = {a: a for a in A1.elements}
    return AbAmalgam(B, id1, f2, _strong_in(B, A1.elements), _strong_in(B, f2.values()))


# -- canonical forms

@lru_cache(maxsize=None)
def _canon(n, pinned, triples):
    best = None
    free = list(range(pinned, n))
    for perm in itertools.permutations(free):
        relabel = list(range(pinned)) + list(perm)
        code = tuple(sorted(tuple(relabel[a] for a in r) for r in triples))
        if best is None or code < best:
            best = code
    return best


def canonical_code(A, pinned=()):
    """Isomorphism code; elements in `pinned` keep their order as labels 0..k-1."""
    if len(A) > 8:
        raise PredimError("CAP_EXCEEDED", "canonical labeling is limited to 8 elements")
    pinned = list(pinned)
    rest = sorted(A.elements - set(pinned), key=str)
    label = {a: i for i, a in enumerate(pinned + rest)}
    triples = tuple(sorted(tuple(label[a] for a in r) for r in A.relations))
    return (len(A), _canon(len(A), len(pinned), triples))


def isomorphic(A, B):
    return canonical_code(A) == canonical_code(B)


@dataclass(frozen=True)
class ExtensionType:
    """Isomorphism type of B over an ordered base A: labels 0..k-1 are A."""
    base_size: int
    size: int
    triples: tuple

    @property
    def new(self):
        return self.size - self.base_size


def _labeled_delta(triples, subset):
    return len(subset) - sum(1 for r in triples if set(r) <= subset)


@lru_cache(maxsize=None)
def extension_types(base_triples, base_size, size_cap):
    """All strong extensions A <= B in K0 with |B| <= size_cap, up to isomorphism over A."""
    out = []
    for size in range(base_size + 1, size_cap + 1):
        labels = range(size)
        cands = [r for r in itertools.product(labels, repeat=3) if max(r) >= base_size]
        new = size - base_size
        seen = set()
        for k in range(new + 1):
            for extra in itertools.combinations(cands, k):
                triples = tuple(sorted(base_triples + extra))
                code = _canon(size, base_size, triples)
                if code in seen:
                    continue
                seen.add(code)
                if _is_strong_labeled(code, base_size, size) and _in_k0_labeled(code, size):
                    out.append(ExtensionType(base_size, size, code))
    return tuple(sorted(out, key=lambda t: (t.size, t.triples)))


def _is_strong_labeled(triples, base_size, size):
    base = set(range(base_size))
    d0 = _labeled_delta(triples, base)
    rest = range(base_size, size)
    for k in range(1, len(rest) + 1):
        for extra in itertools.combinations(rest, k):
            if _labeled_delta(triples, base | set(extra)) < d0:
                return False
    return True


def _in_k0_labeled(triples, size):
    for k in range(1, size + 1):
        for sub in itertools.combinations(range(size), k):
            if _labeled_delta(triples, set(sub)) < 0:
                return False
    return True


def base_triples(structure, base):
    label = {a: i for i, a in enumerate(base)}
    return tuple(sorted(tuple(label[a] for a in r) for r in structure.relations
                        if set(r) <= set(base)))


# -- generic model approximation

@dataclass
class BuilderAudit:
    size_cap: int
    rounds: int
    model_size: int
    relation_count: int
    realized: int
    pending: list
    pending_by_level: dict
    history: list
    k0: bool

    def to_json(self):
        return {"size_cap": self.size_cap, "rounds": self.rounds,
                "model_size": self.model_size, "relation_count": self.relation_count,
                "realized": self.realized, "pending": len(self.pending),
                "pending_by_level": self.pending_by_level,
                "pending_sample": [{"base": list(b), "type": list(map(list, t.triples)), "size": t.size}
                                   for b, t in self.pending[:10]],
                "history": self.history, "k0": self.k0}


class GenericModelBuilder:
    """Fair accretion of strong extensions over a fixed horizon.

    The horizon is a small seeded core H.  An obligation is a strong subset A
    of H with |A| < size_cap together with an extension type A <= B,
    |B| <= size_cap; it is discharged by freely amalgamating a copy of B
    over A.  Since every step is a free amalgam over a strong base, the core
    stays strong in the model and realized copies stay strong forever.
    """

    def __init__(self, size_cap, seed=0, core_size=4, core_relations=2,
                 per_round=256, max_elements=100_000):
        if size_cap < 1:
            raise PredimError("BAD_INPUT", "size_cap must be at least 1")
        self.size_cap = size_cap
        self.per_round = per_round
        self.max_elements = max_elements
        self.seed = seed
        self.elements = []
        self.relations = set()
        self.records = {}
        self.history = []
        self.rounds_run = 0
        self.core = self._seed_core(core_size, core_relations)
        core_struct = self.structure().induced(self.core)
        self.bases = [A for k in range(size_cap)
                      for A in itertools.combinations(self.core, k)
                      if is_strong_exhaustive(core_struct, A) is None]
        self.obligations = sorted(
            ((A, t) for A in self.bases
             for t in extension_types(base_triples(core_struct, A), len(A), size_cap)),
            key=lambda o: (len(o[0]), o[0], o[1].size, o[1].triples))

    def _seed_core(self, n, k):
        rng = stream(self.seed, "core")
        core = tuple(f"c{i}" for i in range(n))
        self.elements.extend(core)
        cands = list(itertools.product(core, repeat=3))
        rng.shuffle(cands)
        for r in cands:
            if len(self.relations) >= k:
                break
            trial = TernaryStructure(frozenset(core), frozenset(self.relations | {r}))
            if _in_k0_labeled(base_triples(trial, core), n):
                self.relations.add(r)
        return core

    def structure(self):
        return TernaryStructure(frozenset(self.elements), frozenset(self.relations))

    def pending(self, level=None):
        level = self.size_cap if level is None else level
        return [o for o in self.obligations if o not in self.records and o[1].size <= level]

    def _realize(self, base, t):
        if len(self.elements) + t.new > self.max_elements:
            raise PredimError("CAP_EXCEEDED", f"model would exceed {self.max_elements} elements")
        names = list(base)
        for _ in range(t.new):
            names.append(f"m{len(self.elements)}")
            self.elements.append(names[-1])
        for r in t.triples:
            if max(r) >= t.base_size:
                self.relations.add(tuple(names[a] for a in r))
        self.records[(base, t)] = tuple(names[t.base_size:])

    def run_round(self):
        todo = self.pending()[: self.per_round]
        for base, t in todo:
            self._realize(base, t)
        self.rounds_run += 1
        self.history.append(len(self.pending()))
        return len(todo)

    def build(self, rounds):
        for _ in range(rounds):
            if not self.pending():
                self.history.append(0)
                self.rounds_run += 1
                continue
            self.run_round()
        return self

    def audit(self, check_k0=True):
        by_level = {lvl: len(self.pending(lvl)) for lvl in range(1, self.size_cap + 1)}
        k0 = in_k0(self.structure()) if check_k0 else None
        return BuilderAudit(self.size_cap, self.rounds_run, len(self.elements),
                            len(self.relations), len(self.records), self.pending(),
                            by_level, list(self.history), k0)

    # -- verification against the model itself
    def oracle(self):
        return FlowOracle(self.elements, self.relations)

    def verify_records(self, sample=None, seed=0):
        """Re-check strongness of realized copies by min cut in the current model."""
        oracle = self.oracle()
        model = self.structure()
        keys = sorted(self.records, key=lambda o: (len(o[0]), o[0], o[1].size, o[1].triples))
        if sample is not None and sample < len(keys):
            keys = stream(seed, "verify").sample(keys, sample)
        bad = []
        for base, t in keys:
            B = set(base) | set(self.records[(base, t)])
            if oracle.minimize(B)[0] < subset_delta(model, B):
                bad.append((base, t))
        return bad

    def homogeneity_check(self):
        """Isomorphic strong pairs of the core have the same realized strong one-point types."""
        model = self.structure()
        oracle = self.oracle()
        incident = {}
        for r in self.relations:
            for a in set(r):
                incident.setdefault(a, set()).add(r)
        pairs = [A for A in self.bases if len(A) == 2]
        ordered = [p for A in pairs for p in (A, A[::-1])]
        checks, failures = 0, []
        cache = {}
        for A1 in ordered:
            for A2 in ordered:
                if A1 >= A2 or base_triples(model, A1) != base_triples(model, A2):
                    continue
                for A in (A1, A2):
                    if A not in cache:
                        cache[A] = self._realized_types(A, model, oracle, incident)
                t1, t2 = cache[A1], cache[A2]
                checks += 1
                if t1 != t2:
                    failures.append({"A1": list(A1), "A2": list(A2),
                                     "only_first": len(t1 - t2), "only_second": len(t2 - t1)})
        return {"pairs_checked": checks, "failures": failures, "ok": not failures}

    def _realized_types(self, A, model, oracle, incident):
        groups = {}
        for c in self.elements:
            if c in A:
                continue
            local = [r for r in incident.get(c, ()) if set(r) <= set(A) | {c}]
            sub = TernaryStructure(frozenset(A) | {c}, frozenset(local) | model.induced(A).relations)
            groups.setdefault(canonical_code(sub, A), []).append(c)
        recorded = {cs[0] for (base, t), cs in self.records.items()
                    if set(base) == set(A) and t.new == 1}
        order = {c: i for i, c in enumerate(self.elements)}
        found = set()
        for code, cands in groups.items():
            n_new = sum(1 for r in code[1] if 2 in r)
            if n_new > 1:
                continue  # delta drops below delta(A): never strong
            cands.sort(key=lambda c: (c not in recorded, order[c]))
            for c in cands:
                B = set(A) | {c}
                if oracle.minimize(B)[0] >= subset_delta(model, B):
                    found.add(code)
                    break
        return found


def generic_model_builder(size_cap, rounds, seed=0, **kwargs):
    b = GenericModelBuilder(size_cap, seed=seed, **kwargs).build(rounds)
    return b.structure(), b.audit(), b
