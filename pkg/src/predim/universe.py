"""Finite universes: points with transcendence vectors, orbit labels and E-data.

Structures inside a universe are subsets closed under the class's generation
operator.  For the field surrogates that is linear span (constants carry the
zero vector, so they lie in every structure); for ab initio structures every
subset is closed.
"""
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import PredimError
from .linalg import Span, fraction_str, to_fraction

SCHEMA_VERSION = 1


class ClassId(str, Enum):
    AB_INITIO = "AB_INITIO"
    EXP_TOY = "EXP_TOY"
    EJ_TOY = "EJ_TOY"
    EJ_DERIV_TOY = "EJ_DERIV_TOY"


@dataclass(frozen=True)
class StructureClass:
    class_id: ClassId
    sigma_weight: int

    def __post_init__(self):
        if (self.sigma_weight == 3) != (self.class_id == ClassId.EJ_DERIV_TOY):
            raise PredimError("BAD_CLASS", "sigma_weight is 3 exactly for EJ_DERIV_TOY")

    @classmethod
    def of(cls, class_id):
        class_id = ClassId(class_id)
        return cls(class_id, 3 if class_id == ClassId.EJ_DERIV_TOY else 1)


@dataclass(frozen=True)
class Point:
    id: str
    td: tuple = ()
    lin: tuple = None
    hecke: str = None
    sl2: str = None
    constant: bool = False


@dataclass(frozen=True)
class Parts:
    td: int
    sigma: int
    basis: tuple


def _pad(vec, n):
    vec = tuple(to_fraction(x) for x in vec)
    if len(vec) > n:
        raise PredimError("MALFORMED_UNIVERSE", "vector longer than ambient dimension")
    return vec + (Fraction(0),) * (n - len(vec))


class Universe:
    """An immutable finite ambient set.  Closures and predimension parts are cached."""

    def __init__(self, class_id, points, epairs=(), relations=(), name="U"):
        self.klass = StructureClass.of(class_id)
        self.class_id = self.klass.class_id
        self.name = name
        points = list(points)
        ids = [p.id for p in points]
        if len(set(ids)) != len(ids):
            raise PredimError("MALFORMED_UNIVERSE", "duplicate point id")
        self.dim = max((len(p.td) for p in points), default=0)
        lin_points = [p for p in points if p.lin is not None]
        self.lin_dim = max((len(p.lin) for p in lin_points), default=0)
        self.points = {}
        for p in points:
            td = _pad(p.td, self.dim)
            lin = None if p.lin is None else _pad(p.lin, self.lin_dim)
            if p.constant and any(td):
                raise PredimError("MALFORMED_UNIVERSE", f"constant {p.id} has nonzero vector")
            self.points[p.id] = Point(p.id, td, lin, p.hecke, p.sl2, p.constant)
        self.ids = tuple(ids)
        self.index = {pid: i for i, pid in enumerate(ids)}
        self.full_mask = (1 << len(ids)) - 1
        self.epairs = tuple(tuple(e) for e in epairs)
        self.relations = tuple(tuple(r) for r in relations)
        self._check_shape()
        self._closure_cache = {}
        self._parts_cache = {}
        self._prepare()

    def _check_shape(self):
        arity = 4 if self.class_id == ClassId.EJ_DERIV_TOY else 2
        if self.class_id == ClassId.AB_INITIO:
            if self.epairs:
                raise PredimError("MALFORMED_UNIVERSE", "ab initio universes carry no E-pairs")
        elif self.relations:
            raise PredimError("MALFORMED_UNIVERSE", "field surrogates carry no ternary relations")
        for e in self.epairs:
            if len(e) != arity:
                raise PredimError("MALFORMED_UNIVERSE", f"E-point {e} should have {arity} coordinates")
            for pid in e:
                if pid not in self.index:
                    raise PredimError("MALFORMED_UNIVERSE", f"E-point mentions unknown {pid}")
        for r in self.relations:
            if len(r) != 3 or any(a not in self.index for a in r):
                raise PredimError("MALFORMED_TRIPLE", f"bad triple {r}")
        if self.class_id == ClassId.EXP_TOY:
            for x, _ in self.epairs:
                if self.points[x].lin is None:
                    raise PredimError("MALFORMED_UNIVERSE", f"x-side {x} lacks a lin vector")

    def _prepare(self):
        self.relation_masks = [self.mask(r) for r in sorted(set(self.relations))]
        self.epoint_masks = [self.mask(e) for e in self.epairs]
        self.constants_mask = 0
        if self.class_id != ClassId.AB_INITIO:
            for pid, p in self.points.items():
                if not any(p.td):
                    self.constants_mask |= 1 << self.index[pid]

    # -- masks and ids
    def mask(self, ids):
        m = 0
        for pid in ids:
            try:
                m |= 1 << self.index[pid]
            except KeyError:
                raise PredimError("UNKNOWN_POINT", f"no point {pid!r} in {self.name}") from None
        return m

    def ids_of(self, mask):
        return frozenset(pid for i, pid in enumerate(self.ids) if mask >> i & 1)

    def __len__(self):
        return len(self.ids)

    def is_field(self):
        return self.class_id != ClassId.AB_INITIO

    # -- generation
    def close_mask(self, mask):
        if self.class_id == ClassId.AB_INITIO:
            return mask
        hit = self._closure_cache.get(mask)
        if hit is not None:
            return hit
        span = Span(self.points[pid].td for pid in self.ids_of(mask))
        out = self.constants_mask | mask
        for i, pid in enumerate(self.ids):
            if not out >> i & 1 and span.contains(self.points[pid].td):
                out |= 1 << i
        self._closure_cache[mask] = out
        return out

    def closure(self, ids):
        return self.ids_of(self.close_mask(self.mask(ids)))

    def is_closed_mask(self, mask):
        return self.close_mask(mask) == mask

    def td_rank(self, mask):
        if self.class_id == ClassId.AB_INITIO:
            return bin(mask).count("1")
        return Span(self.points[pid].td for pid in self.ids_of(mask)).rank

    # -- predimension parts
    def parts(self, mask):
        hit = self._parts_cache.get(mask)
        if hit is not None:
            return hit
        if self.class_id == ClassId.AB_INITIO:
            inside = [r for r, m in zip(sorted(set(self.relations)), self.relation_masks) if m & mask == m]
            out = Parts(bin(mask).count("1"), len(inside), tuple(inside))
        elif self.class_id == ClassId.EXP_TOY:
            out = self._exp_parts(mask)
        else:
            out = self._ej_parts(mask)
        self._parts_cache[mask] = out
        return out

    def live_epoints(self, mask):
        """E-points inside `mask` whose j-side (x-side for EXP_TOY) is non-constant."""
        out = []
        for e, m in zip(self.epairs, self.epoint_masks):
            if m & mask != m:
                continue
            if self.class_id == ClassId.EXP_TOY:
                if any(self.points[e[0]].lin):
                    out.append(e)
            elif any(self.points[e[1]].td):
                out.append(e)
        return sorted(out)

    def hecke_key(self, j):
        p = self.points[j]
        return p.hecke if p.hecke is not None else "#" + j

    def _ej_parts(self, mask):
        chosen = {}
        for e in self.live_epoints(mask):
            chosen.setdefault(self.hecke_key(e[1]), e)
        basis = tuple(sorted(chosen.values()))
        return Parts(self.td_rank(mask), len(basis), basis)

    def _exp_parts(self, mask):
        span = Span()
        basis = []
        for e in self.live_epoints(mask):
            if span.add(self.points[e[0]].lin):
                basis.append(e)
        return Parts(self.td_rank(mask), len(basis), tuple(basis))

    # -- serialization
    def to_json(self):
        pts = []
        for pid in self.ids:
            p = self.points[pid]
            d = {"id": pid}
            if self.is_field():
                d["td"] = [fraction_str(x) for x in p.td]
                if p.lin is not None:
                    d["lin"] = [fraction_str(x) for x in p.lin]
                if p.hecke is not None:
                    d["hecke"] = p.hecke
                if p.sl2 is not None:
                    d["sl2"] = p.sl2
                if p.constant:
                    d["constant"] = True
            pts.append(d)
        out = {"schema_version": SCHEMA_VERSION, "class_id": self.class_id.value,
               "name": self.name, "points": pts}
        if self.is_field():
            out["epairs"] = [list(e) for e in self.epairs]
        else:
            out["relations"] = [list(r) for r in self.relations]
        return out

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict):
            raise PredimError("BAD_INPUT", "universe JSON must be an object")
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise PredimError("BAD_INPUT", f"unsupported schema_version {version}")
        try:
            class_id = ClassId(data["class_id"])
        except (KeyError, ValueError):
            raise PredimError("BAD_INPUT", "missing or unknown class_id") from None
        pts = []
        for d in data.get("points", []):
            if isinstance(d, str):
                d = {"id": d}
            lin = d.get("lin")
            pts.append(Point(str(d["id"]), tuple(to_fraction(x) for x in d.get("td", [])),
                             None if lin is None else tuple(to_fraction(x) for x in lin),
                             d.get("hecke"), d.get("sl2"), bool(d.get("constant", False))))
        return cls(class_id, pts, data.get("epairs", []), data.get("relations", []),
                   data.get("name", "U"))

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))

    def replace(self, points=None, epairs=None, relations=None, name=None):
        """A new universe sharing unchanged fields with this one."""
        return Universe(self.class_id,
                        [self.points[i] for i in self.ids] if points is None else points,
                        self.epairs if epairs is None else epairs,
                        self.relations if relations is None else relations,
                        self.name if name is None else name)

    def __repr__(self):
        return f"Universe({self.class_id.value}, {len(self)} points, {self.name!r})"


@dataclass(frozen=True)
class Substructure:
    universe: Universe
    members: frozenset = field(default_factory=frozenset)

    @property
    def mask(self):
        return self.universe.mask(self.members)

    def __len__(self):
        return len(self.members)

    def __le__(self, other):
        return self.members <= other.members

    def sorted(self):
        return sorted(self.members)


def generate(universe, ids=()):
    """The structure generated by `ids`."""
    return Substructure(universe, universe.closure(ids))


def whole(universe):
    return Substructure(universe, frozenset(universe.ids))
