"""Parametric varieties over Q: dimension by generic Jacobian rank.

A variety is the closure of the image of a rational map t -> (phi_1(t), ...,
phi_m(t)), optionally cut by hyperplane constraints h(t) = 0 written in the
parameters.  For a constrained variety the generic points are stored base
points lying on every constraint, and ranks are taken on the tangent space
of the constraint locus.

Pairs: the i-th X coordinate, the i-th Y coordinate (and in derivative mode
the i-th Y1 and Y2 coordinates) form pair i; indices are 0-based.
"""
import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction

from . import expr as E
from .errors import PredimError
from .linalg import Span, kernel, rref
from .rng import stream

RANGES = (100, 300, 1000, 3000, 10_000)


class Role(str, Enum):
    X = "X"
    Y = "Y"
    Y1 = "Y1"
    Y2 = "Y2"


class Mode(str, Enum):
    PLAIN = "PLAIN"
    DERIV = "DERIV"


@dataclass(frozen=True)
class ParametricVariety:
    params: tuple
    components: tuple
    roles: tuple
    constraints: tuple = ()
    base_points: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        comps = tuple(E.parse(c) if isinstance(c, str) else c for c in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "roles", tuple(Role(r) for r in self.roles))
        object.__setattr__(self, "constraints", tuple(
            E.parse(c) if isinstance(c, str) else c for c in self.constraints))
        if len(self.roles) != len(comps):
            raise PredimError("BAD_VARIETY", "one role per component")
        known = set(self.params)
        for c in comps + self.constraints:
            extra = E.variables(c) - known
            if extra:
                raise PredimError("BAD_VARIETY", f"unknown symbols {sorted(extra)}")
        counts = {r: self.roles.count(r) for r in Role}
        n = counts[Role.X]
        if counts[Role.Y] != n or counts[Role.Y1] not in (0, n) or counts[Role.Y1] != counts[Role.Y2]:
            raise PredimError("BAD_VARIETY", "roles must come in complete pairs")

    @property
    def d(self):
        return len(self.params)

    @property
    def m(self):
        return len(self.components)

    @property
    def n(self):
        return self.roles.count(Role.X)

    @property
    def deriv(self):
        return Role.Y1 in self.roles

    def coords(self, role):
        return [i for i, r in enumerate(self.roles) if r == role]

    def pair_coords(self, i):
        """Coordinate positions of pair i, in role order X, Y, Y1, Y2."""
        roles = (Role.X, Role.Y, Role.Y1, Role.Y2) if self.deriv else (Role.X, Role.Y)
        return [self.coords(r)[i] for r in roles]

    def to_json(self):
        out = {"params": list(self.params), "components": [E.to_str(c) for c in self.components],
               "roles": [r.value for r in self.roles]}
        if self.constraints:
            out["constraints"] = [E.to_str(c) for c in self.constraints]
            out["base_points"] = [[str(v) for v in p] for p in self.base_points]
        return out

    @classmethod
    def from_json(cls, data):
        try:
            return cls(tuple(data["params"]), tuple(data["components"]), tuple(data["roles"]),
                       tuple(data.get("constraints", ())),
                       tuple(tuple(Fraction(v) for v in p) for p in data.get("base_points", ())))
        except KeyError as err:
            raise PredimError("BAD_VARIETY", f"missing field {err}") from None


def variety(params, components, roles):
    return ParametricVariety(tuple(params), tuple(components), tuple(roles))


def pairs_variety(params, xs, ys, y1s=(), y2s=()):
    """Convenience constructor from per-role component lists."""
    comps = list(xs) + list(ys) + list(y1s) + list(y2s)
    roles = ["X"] * len(xs) + ["Y"] * len(ys) + ["Y1"] * len(y1s) + ["Y2"] * len(y2s)
    return variety(params, comps, roles)


# -- sampling

def _random_point(V, rng, bound):
    return tuple(Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for _ in V.params)


def jacobian(V, point):
    """(values, Jacobian rows) of the components at a parameter point."""
    values = dict(zip(V.params, point))
    vals, rows = [], []
    for c in V.components:
        v, g = E.evaluate_grad(c, values, V.params)
        vals.append(v)
        rows.append(g)
    return vals, rows


def _tangent(V, point):
    """Basis of the constraint locus tangent space at `point` (all of Q^d if none)."""
    if not V.constraints:
        return None
    values = dict(zip(V.params, point))
    grads = []
    for h in V.constraints:
        v, g = E.evaluate_grad(h, values, V.params)
        if v != 0:
            raise PredimError("DEGENERATE_SAMPLE", "base point is off a constraint")
        grads.append(g)
    return kernel(grads, V.d)


@dataclass(frozen=True)
class Sample:
    point: tuple
    values: tuple
    rows: tuple  # Jacobian rows restricted to the tangent space


def samples(V, seed=0, trials=5, tag="dim"):
    """Generic sample points: growing coordinate ranges, or the stored base points."""
    out = []
    if V.constraints:
        for p in V.base_points[:trials]:
            out.append(_sample_at(V, p))
        if not out:
            raise PredimError("DEGENERATE_SAMPLE", "constrained variety without base points")
        return out
    rng = stream(seed, tag, *(E.to_str(c) for c in V.components))
    for t in range(trials):
        bound = RANGES[min(t, len(RANGES) - 1)]
        for _ in range(60):
            p = _random_point(V, rng, bound)
            try:
                out.append(_sample_at(V, p))
                break
            except ZeroDivisionError:
                continue
        else:
            raise PredimError("SINGULAR_SAMPLE_EXHAUSTED", "every sample hit a pole")
    return out


def _sample_at(V, p):
    vals, rows = jacobian(V, p)
    K = _tangent(V, p)
    if K is not None:
        rows = [tuple(sum(r[i] * k[i] for i in range(V.d)) for k in K) for r in rows]
    return Sample(tuple(p), tuple(vals), tuple(tuple(r) for r in rows))


def _rank_rows(rows):
    return Span(rows).rank


@dataclass(frozen=True)
class DimensionReport:
    dim: int
    trial_ranks: tuple

    @property
    def stable(self):
        return len(set(self.trial_ranks)) == 1


def dimension_report(V, seed=0, trials=5, coords=None):
    ss = samples(V, seed, trials)
    ranks = tuple(_rank_rows([s.rows[i] for i in (range(V.m) if coords is None else coords)])
                  for s in ss)
    return DimensionReport(max(ranks), ranks)


def dim_variety(V, seed=0, trials=5):
    return dimension_report(V, seed, trials).dim


# -- derived varieties

def project(V, indices):
    idx = tuple(indices)
    if any(b <= a for a, b in zip(idx, idx[1:])) or any(not 0 <= i < V.n for i in idx) or not idx:
        raise PredimError("BAD_INDEX", f"indices {idx} must be strictly increasing within 0..{V.n - 1}")
    keep = []
    roles = (Role.X, Role.Y, Role.Y1, Role.Y2) if V.deriv else (Role.X, Role.Y)
    for r in roles:
        cs = V.coords(r)
        keep.extend(cs[i] for i in idx)
    return replace(V, components=tuple(V.components[c] for c in keep),
                   roles=tuple(V.roles[c] for c in keep))


def _y_identically_zero(V, c, seed):
    for s in samples(V, seed, 3, tag="zero"):
        if s.values[c] != 0:
            return False
    return True


def m_image(V, M, seed=0):
    """[M](V): x -> M x additively, y -> y^M monomially."""
    M = [list(map(int, row)) for row in M]
    n = V.n
    if V.deriv:
        raise PredimError("BAD_VARIETY", "[M] acts on plain pair varieties")
    if any(len(row) != n for row in M):
        raise PredimError("BAD_MATRIX", f"matrix must have {n} columns")
    xs, ys = V.coords(Role.X), V.coords(Role.Y)
    for c in ys:
        if _y_identically_zero(V, c, seed):
            raise PredimError("NEGATIVE_BASE", "a y-component vanishes identically")
    us, vs = [], []
    for row in M:
        terms = [E.mul(E.num(a), V.components[xs[j]]) for j, a in enumerate(row) if a]
        us.append(E.add(*terms) if terms else E.num(0))
        facs = [E.power(V.components[ys[j]], a) for j, a in enumerate(row) if a]
        vs.append(E.mul(*facs) if facs else E.num(1))
    return replace(V, components=tuple(us + vs), roles=tuple([Role.X] * len(M) + [Role.Y] * len(M)))


def m_image_rank(sample, V, M):
    """Rank of the [M]-image at one sample via logarithmic derivatives.

    d(Mx) = M dx and d log(y^M) = M diag(1/y) dy, so the image tangent space
    is spanned by the rows of [M J_x ; M diag(1/y) J_y].
    """
    xs, ys = V.coords(Role.X), V.coords(Role.Y)
    rows = []
    for row in M:
        rows.append(tuple(sum(a * sample.rows[xs[j]][c] for j, a in enumerate(row))
                          for c in range(len(sample.rows[0]) if sample.rows else 0)))
    for row in M:
        rows.append(tuple(sum(a * sample.rows[ys[j]][c] / sample.values[ys[j]]
                              for j, a in enumerate(row) if a)
                          for c in range(len(sample.rows[0]) if sample.rows else 0)))
    return _rank_rows(rows)


def row_spaces(n, k, bound):
    """All k-dimensional row spaces spanned by integer vectors with entries in [-bound, bound]."""
    if k == n:
        return [tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))]
    vecs = []
    for v in itertools.product(range(-bound, bound + 1), repeat=n):
        if any(v):
            vecs.append(tuple(Fraction(x) for x in v))
    lines = {}
    for v in vecs:
        key = tuple(rref([v])[0])
        lines.setdefault(key, v)
    level = {key: [v] for key, v in lines.items()}
    for _ in range(k - 1):
        nxt = {}
        for gens in level.values():
            span = Span(gens)
            for v in lines.values():
                if span.contains(v):
                    continue
                key = tuple(rref(gens + [v])[0])
                if key not in nxt:
                    nxt[key] = gens + [v]
        level = nxt
    return [tuple(key) for key in level]


def _integer_rows(space):
    out = []
    for row in space:
        den = 1
        for x in row:
            den = den * x.denominator // _gcd(den, x.denominator)
        out.append(tuple(int(x * den) for x in row))
    return out


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@dataclass
class RotundityVerdict:
    verdict: str
    bound: int
    k_max: int
    witness: tuple = None
    margin: int = None
    checked: int = 0

    def to_json(self):
        return {"verdict": self.verdict, "bound": self.bound, "k_max": self.k_max,
                "witness": None if self.witness is None else [list(r) for r in self.witness],
                "margin": self.margin, "checked": self.checked,
                "note": f"rotundity checked for integer matrices with entries in [-{self.bound}, {self.bound}]"}


def is_rotund(V, bound=3, k_max=None, seed=0, trials=2):
    """ROTUND / STRONGLY_ROTUND / FAIL up to the entry bound; witness is the worst matrix."""
    n = V.n
    k_max = n if k_max is None else k_max
    if not 1 <= k_max <= n:
        raise PredimError("BAD_INPUT", f"k_max must lie in 1..{n}")
    ss = samples(V, seed, trials, tag="rotund")
    worst, worst_margin, checked = None, None, 0
    for k in range(1, k_max + 1):
        for space in row_spaces(n, k, bound):
            M = _integer_rows(space)
            dim = max(m_image_rank(s, V, M) for s in ss)
            checked += 1
            margin = dim - k
            if worst_margin is None or margin < worst_margin:
                worst, worst_margin = tuple(tuple(r) for r in M), margin
    if worst_margin is None:
        verdict = "STRONGLY_ROTUND"
    elif worst_margin < 0:
        verdict = "FAIL"
    elif worst_margin == 0:
        verdict = "ROTUND"
    else:
        verdict = "STRONGLY_ROTUND"
    return RotundityVerdict(verdict, bound, k_max, worst, worst_margin, checked)


@dataclass
class NormalityVerdict:
    verdict: str
    mode: str
    worst: tuple
    margin: int
    strong_failures: list = field(default_factory=list)
    dims: dict = field(default_factory=dict)

    def to_json(self):
        return {"verdict": self.verdict, "mode": self.mode, "worst": list(self.worst),
                "margin": self.margin, "strong_failures": [list(i) for i in self.strong_failures],
                "projection_dims": {",".join(map(str, k)): v for k, v in self.dims.items()}}


def projection_dims(V, seed=0, trials=5):
    """dim pr_i V for every nonempty index tuple i."""
    ss = samples(V, seed, trials, tag="normal")
    out = {}
    for k in range(1, V.n + 1):
        for idx in itertools.combinations(range(V.n), k):
            cs = [c for i in idx for c in V.pair_coords(i)]
            out[idx] = max(_rank_rows([s.rows[c] for c in cs]) for s in ss)
    return out


def is_normal(V, mode=Mode.PLAIN, seed=0, trials=5):
    mode = Mode(mode)
    if (mode == Mode.DERIV) != V.deriv:
        raise PredimError("BAD_VARIETY", f"{mode.value} mode needs {'4n' if mode == Mode.DERIV else '2n'} coordinates")
    w = 3 if mode == Mode.DERIV else 1
    dims = projection_dims(V, seed, trials)
    margins = {idx: dims[idx] - w * len(idx) for idx in dims}
    worst = min(margins, key=lambda idx: (margins[idx], len(idx), idx))
    strong_fail = [idx for idx in sorted(margins, key=lambda i: (len(i), i)) if margins[idx] <= 0]
    if margins[worst] < 0:
        verdict = "FAIL"
    elif strong_fail:
        verdict = "NORMAL"
    else:
        verdict = "STRONGLY_NORMAL"
    return NormalityVerdict(verdict, mode.value, worst, margins[worst], strong_fail, dims)


@dataclass
class FreeVerdict:
    verdict: str
    reason: str = None
    N: int = None
    pair: tuple = None

    def to_json(self):
        return {"verdict": self.verdict, "reason": self.reason, "N": self.N,
                "pair": None if self.pair is None else list(self.pair)}


def is_free(V, modular_bound=2, samples_count=8, seed=0, a_level=()):
    """Sampling test against Phi_N(y_i, y_k) = 0 and against fibres y_i = a."""
    from .modular import modular_polynomial
    ys = V.coords(Role.Y)
    ss = samples(V, seed, samples_count, tag="free")
    a_level = [Fraction(a) for a in a_level]
    for i, c in enumerate(ys):
        if all(not any(s.rows[c]) for s in ss):
            vals = {s.values[c] for s in ss}
            if len(vals) == 1 and vals.pop() in a_level:
                return FreeVerdict("NOT_FREE", "FIBRE", None, (i,))
    for N in range(1, modular_bound + 1):
        P = modular_polynomial(N)
        for i, k in itertools.combinations(range(len(ys)), 2):
            if all(P(s.values[ys[i]], s.values[ys[k]]) == 0 for s in ss):
                return FreeVerdict("NOT_FREE", "MODULAR", N, (i, k))
    return FreeVerdict("FREE")


# -- hyperplanes and the Rabinovich transform

def intersect_generic_hyperplane(V, seed=0, n_base=None):
    """V' = V cut by sum p_i w_i = 1 for a generic p through sampled points of V.

    Returns (V', p).  The first base point fixes the last coefficient; the
    other coefficients are random, except that the hyperplane is also forced
    through up to four more base points so that every rank query has five
    independent generic witnesses.
    """
    rng = stream(seed, "hyperplane", len(V.constraints), *(E.to_str(c) for c in V.components))
    if V.constraints:
        base = list(V.base_points)
    else:
        n_base = min(5, max(1, V.m - 1)) if n_base is None else n_base
        base = [s.point for s in samples(V, seed, n_base, tag="base")]
    base = base[: max(1, min(len(base), V.m - 1))]
    before = dim_variety(V, seed)
    for _ in range(30):
        vals = [jacobian(V, p)[0] for p in base]
        k = len(base)
        free = [Fraction(rng.randint(-99, 99), rng.randint(1, 99)) for _ in range(V.m - k)]
        # solve for the last k coefficients: sum_i p_i w_i(b) = 1 for every base point b
        rows = []
        for w in vals:
            rhs = 1 - sum(f * x for f, x in zip(free, w[: V.m - k]))
            rows.append(list(w[V.m - k:]) + [rhs])
        red, piv = rref(rows)
        if k in piv or len(piv) < k:
            continue
        last = [Fraction(0)] * k
        for r, pv in zip(red, piv):
            last[pv] = r[k]
        p = free + last
        h = E.sub(E.add(*[E.mul(E.num(c), comp) for c, comp in zip(p, V.components)]), E.num(1))
        W = replace(V, constraints=V.constraints + (h,), base_points=tuple(base))
        try:
            if dim_variety(W, seed) == before - 1:
                return W, tuple(p)
        except PredimError as err:
            if err.code != "DEGENERATE_SAMPLE":
                raise
    raise PredimError("DEGENERATE_SAMPLE", "no hyperplane through the base points cut the dimension")


def cut_to_dimension(V, target, seed=0):
    out, coeffs = V, []
    while dim_variety(out, seed) > target:
        out, p = intersect_generic_hyperplane(out, seed + len(coeffs))
        coeffs.append(p)
    return out, coeffs


def coordinate_names(V):
    names = []
    counters = {}
    for r in V.roles:
        i = counters.get(r, 0)
        counters[r] = i + 1
        names.append(f"{r.value.lower()}{i}")
    return names


def rabinovich_transform(V, f, seed=0):
    """Append a pair (1/f, u) with u a fresh parameter; f is in coordinates x0.., y0.."""
    f = E.parse(f) if isinstance(f, str) else f
    names = coordinate_names(V)
    extra = E.variables(f) - set(names)
    if extra:
        raise PredimError("BAD_EXPRESSION", f"f mentions {sorted(extra)}; use {names}")
    f_t = E.substitute(f, dict(zip(names, V.components)))
    ss = samples(V, seed, 5, tag="rabinovich")
    if all(E.evaluate(f_t, dict(zip(V.params, s.point))) == 0 for s in ss):
        raise PredimError("F_VANISHES", "f vanishes on every sampled point of V")
    u = "u"
    while any(p.startswith(u) for p in V.params):
        u += "_"
    rng = stream(seed, "rabinovich-base")
    blocks = (Role.X, Role.Y, Role.Y1, Role.Y2) if V.deriv else (Role.X, Role.Y)
    new = {Role.X: E.div(E.num(1), f_t), Role.Y: E.var(u),
           Role.Y1: E.var(u + "1"), Role.Y2: E.var(u + "2")}
    comps, roles = [], []
    for r in blocks:
        comps.extend(V.components[c] for c in V.coords(r))
        comps.append(new[r])
        roles.extend([r] * (V.n + 1))
    params = V.params + (u,) + ((u + "1", u + "2") if V.deriv else ())
    base = tuple(p + tuple(Fraction(rng.randint(1, 999), rng.randint(1, 99))
                           for _ in range(len(params) - len(p)))
                 for p in V.base_points
                 if E.evaluate(f_t, dict(zip(V.params, p))) != 0)
    if V.constraints and not base:
        raise PredimError("F_VANISHES", "f vanishes at every base point")
    return ParametricVariety(params, tuple(comps), tuple(roles), V.constraints, base)


def fibre_slice(V, fixed):
    """Substitute rational values for some parameters."""
    mapping = {name: E.num(v) for name, v in fixed.items()}
    params = tuple(p for p in V.params if p not in fixed)
    comps = tuple(E.substitute(c, mapping) for c in V.components)
    return ParametricVariety(params, comps, V.roles)
