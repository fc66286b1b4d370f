"""Command-line front end.  Every report is JSON with a schema_version field.

Flags fall back to PREDIM_<FLAG> environment variables (PREDIM_SEED,
PREDIM_OUT, PREDIM_CAP, PREDIM_ORDER, PREDIM_BOUND).
Exit codes: 0 success, 1 a verdict failed, 2 bad input.
"""
import argparse
import json
import os
import sys

from . import core
from .errors import PredimError
from .universe import Substructure, Universe, generate, whole

SCHEMA_VERSION = 1
ENV_PREFIX = "PREDIM_"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env(name, default, cast=str):
    v = os.environ.get(ENV_PREFIX + name.upper())
    return default if v is None else cast(v)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as err:
        raise PredimError("BAD_INPUT", f"cannot read {path}: {err.strerror}")
    except json.JSONDecodeError as err:
        raise PredimError("BAD_INPUT", f"{path} is not JSON: {err.msg}")


def _universe(path):
    return Universe.from_json(_load_json(path))


def _ids(text):
    return [s for s in text.split(",") if s] if text else []


def _structure(U, spec):
    if spec in (None, "all"):
        return whole(U)
    ids = _ids(spec)
    unknown = [i for i in ids if i not in U.points]
    if unknown:
        raise PredimError("BAD_INPUT", f"unknown points {unknown}")
    return Substructure(U, frozenset(ids))


def _generated(U, spec):
    if spec in (None, "all"):
        return whole(U)
    return generate(U, _ids(spec))


def _variety(path):
    from .varieties import ParametricVariety
    return ParametricVariety.from_json(_load_json(path))


# -- commands; each returns (report, exit code)

def cmd_delta(a):
    U = _universe(a.inp)
    return core.delta(_structure(U, a.structure)).to_json(), 0


def cmd_closure(a):
    U = _universe(a.inp)
    B = _structure(U, a.within)
    X = _ids(a.points)
    cl = core.self_sufficient_closure(X, B, a.cap)
    return {"points": X, "closure": sorted(cl.members), "d": core.dimension_d(X, B, a.cap),
            "delta": core.delta(cl).to_json(),
            "pregeometry_closure": sorted(core.pregeometry_closure(X, B, a.cap))}, 0


def cmd_audit(a):
    from .toy_fields import axiom_audit, positivity_audit
    U = _universe(a.inp)
    rep = axiom_audit(U, modular_bound=a.bound)
    out = {"axioms": rep.to_json(),
           "submodularity": core.submodularity_audit(whole(U), a.trials, a.seed).to_json()}
    ok = rep.ok and out["submodularity"]["ok"]
    if len(U) <= a.cap and U.is_field():
        bad = positivity_audit(U, a.cap)
        out["positivity_failures"] = bad
        ok &= not bad
    out["ok"] = ok
    return out, 0 if ok else 1


def cmd_amalgamate(a):
    U1, U2 = _universe(a.in1), _universe(a.in2)
    if not U1.is_field():
        from .ab_initio import TernaryStructure, free_amalgam_ab
        A1, A2 = TernaryStructure.from_universe(U1), TernaryStructure.from_universe(U2)
        base = _ids(a.base)
        A0 = A1.induced(base)
        e = {x: x for x in base}
        am = free_amalgam_ab(A0, A1, A2, e, e)
        B = am.structure.as_universe("amalgam")
        ok = am.b1_strong and am.b2_strong
        return {"universe": B.to_json(), "b1_strong": am.b1_strong, "b2_strong": am.b2_strong,
                "renamed": {k: v for k, v in am.embed2.items() if k != v}}, 0 if ok else 1
    from .toy_fields import free_amalgam_toy
    A = _generated(U1, a.base)
    am = free_amalgam_toy(A, whole(U1), whole(U2), a.cap)
    ok = am.b1_strong.strong and am.b2_strong.strong and am.audit.ok
    return am.to_json(), 0 if ok else 1


def cmd_fullify(a):
    from .toy_fields import full_extension
    U = _universe(a.inp)
    ext = full_extension(U, _generated(U, a.structure), a.cap)
    return ext.to_json(), 0 if ext.strong and ext.audit.ok else 1


def cmd_gsec(a):
    from .toy_fields import gsec_witness
    U = _universe(a.inp)
    V = _variety(a.variety)
    bind = {}
    for item in a.bind or ():
        t, _, pid = item.partition("=")
        if not pid:
            raise PredimError("BAD_INPUT", f"binding {item!r} must look like param=point")
        bind[t] = pid
    ext = gsec_witness(U, _generated(U, a.structure), V, bind, a.bound, a.seed, a.cap)
    return ext.to_json(), 0 if ext.strong and ext.audit.ok else 1


def cmd_limit(a):
    from .ab_initio import generic_model_builder
    _, audit, builder = generic_model_builder(a.cap, a.rounds, seed=a.seed)
    out = {"audit": audit.to_json()}
    if not a.skip_homogeneity:
        out["homogeneity"] = builder.homogeneity_check()
    ok = not audit.pending and audit.k0 and out.get("homogeneity", {"ok": True})["ok"]
    return out, 0 if ok else 1


def cmd_check_variety(a):
    from . import varieties as vr
    V = _variety(a.variety)
    checks = a.check.split(",") if a.check else [f for f in ("dim", "rotund", "normal", "free") if getattr(a, f)]
    checks = checks or ["dim", "rotund", "normal", "free"]
    if a.deriv and not V.deriv:
        raise PredimError("BAD_VARIETY", "--deriv needs Y1 and Y2 coordinates")
    if V.deriv and "rotund" in checks:
        checks.remove("rotund")
    out = {"variety": V.to_json()}
    mode = vr.Mode.DERIV if V.deriv else vr.Mode.PLAIN
    if "dim" in checks:
        rep = vr.dimension_report(V, a.seed)
        out["dimension"] = {"dim": rep.dim, "trial_ranks": list(rep.trial_ranks), "stable": rep.stable}
    if "rotund" in checks:
        out["rotundity"] = vr.is_rotund(V, a.bound, seed=a.seed).to_json()
    if "normal" in checks:
        out["normality"] = vr.is_normal(V, mode, a.seed).to_json()
    if "free" in checks:
        out["freeness"] = vr.is_free(V, a.order, seed=a.seed).to_json()
    code = 0
    if a.expect:
        got = {"free": out.get("freeness", {}).get("verdict") == "FREE",
               "normal": out.get("normality", {}).get("verdict") in ("NORMAL", "STRONGLY_NORMAL"),
               "strongly-normal": out.get("normality", {}).get("verdict") == "STRONGLY_NORMAL",
               "rotund": out.get("rotundity", {}).get("verdict") in ("ROTUND", "STRONGLY_ROTUND"),
               "strongly-rotund": out.get("rotundity", {}).get("verdict") == "STRONGLY_ROTUND"}
        if a.expect not in got:
            raise PredimError("BAD_INPUT", f"unknown expectation {a.expect}")
        out["expectation"] = {"expected": a.expect, "met": got[a.expect]}
        code = 0 if got[a.expect] else 1
    return out, code


def cmd_modular_poly(a):
    from .modular import modular_polynomial, verify_modular_relation
    level = a.level if a.level is not None else a.level_pos
    if level is None:
        raise PredimError("BAD_INPUT", "give the level N")
    P = modular_polynomial(level, a.order)
    out = P.to_json()
    out["symmetric"] = P.is_symmetric()
    if a.verify:
        out["vanishes_to"] = a.verify
        out["verified"] = verify_modular_relation(P, a.verify)
        return out, 0 if out["verified"] else 1
    return out, 0


def cmd_verify_identities(a):
    from .diffalg import DISPLAYED, IDENTITIES, verify_identity
    names = _ids(a.only) or list(DISPLAYED)
    reps = [verify_identity(n, a.jet_checks, a.seed).to_json() for n in names]
    ok = all(r["holds"] and r["jets_agree"] for r in reps)
    return {"identities": reps, "all_hold": ok,
            "available": sorted(IDENTITIES)}, 0 if ok else 1


def cmd_acceptance(a):
    from .acceptance import run_all
    only = {int(x) for x in _ids(a.only)} or None
    results = run_all(a.seed, a.scale, only)
    for r in results:
        print(r.line(), file=sys.stderr)
    ok = all(r.passed for r in results)
    return {"criteria": [r.to_json() for r in results], "all_passed": ok}, 0 if ok else 1


def _common(default):
    c = argparse.ArgumentParser(add_help=False)
    d = (lambda v: v) if default else (lambda v: argparse.SUPPRESS)
    c.add_argument("--seed", type=int, default=d(_env("seed", 0, int)))
    c.add_argument("--out", default=d(_env("out", None)))
    c.add_argument("--cap", type=int, default=d(_env("cap", None, int)))
    c.add_argument("--order", type=int, default=d(_env("order", None, int)))
    c.add_argument("--bound", type=int, default=d(_env("bound", None, int)))
    c.add_argument("--timings", action="store_true", default=d(False),
                   help="keep wall-clock fields in reports")
    return c


def build_parser():
    # shared flags are accepted before or after the subcommand
    p = _Parser(prog="predim", description=__doc__.splitlines()[0], parents=[_common(True)])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common(False)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    s = sub.add_parser("delta", help="predimension of a structure")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--structure", default="all", help="'all' or comma-separated point ids")
    s.set_defaults(fn=cmd_delta)

    s = sub.add_parser("closure", help="self-sufficient closure, d and cl of a point set")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--points", default="")
    s.add_argument("--within", default="all")
    s.set_defaults(fn=cmd_closure)

    s = sub.add_parser("audit", help="axioms, positivity and sampled submodularity")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--trials", type=int, default=1000)
    s.set_defaults(fn=cmd_audit)

    s = sub.add_parser("amalgamate", help="free amalgam of two universes over shared points")
    s.add_argument("--in1", required=True)
    s.add_argument("--in2", required=True)
    s.add_argument("--base", default="", help="comma-separated ids of the common part")
    s.set_defaults(fn=cmd_amalgamate)

    s = sub.add_parser("fullify", help="strong full extension")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--structure", default="all")
    s.set_defaults(fn=cmd_fullify)

    s = sub.add_parser("gsec", help="adjoin a generic E-point of a variety")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--variety", required=True)
    s.add_argument("--structure", default="all")
    s.add_argument("--bind", action="append", help="param=point_id, repeatable")
    s.set_defaults(fn=cmd_gsec)

    s = sub.add_parser("limit", help="ab initio generic model approximation")
    s.add_argument("--rounds", type=int, default=8)
    s.add_argument("--skip-homogeneity", action="store_true")
    s.set_defaults(fn=cmd_limit)

    s = sub.add_parser("check-variety", help="dimension, rotundity, normality, freeness")
    s.add_argument("--variety", required=True)
    s.add_argument("--check", default=None, help="comma list of dim, rotund, normal, free")
    for flag in ("dim", "rotund", "normal", "free"):
        s.add_argument(f"--{flag}", action="store_true")
    s.add_argument("--deriv", action="store_true", help="require a 4n-coordinate variety")
    s.add_argument("--expect", default=None,
                   help="free | normal | strongly-normal | rotund | strongly-rotund")
    s.set_defaults(fn=cmd_check_variety)

    s = sub.add_parser("modular-poly", help="classical modular polynomial Phi_N")
    s.add_argument("level_pos", nargs="?", type=int, metavar="N")
    s.add_argument("--level", type=int, default=None)
    s.add_argument("--verify", type=int, default=0, help="check vanishing through this q-order")
    s.set_defaults(fn=cmd_modular_poly)

    s = sub.add_parser("verify-identities", help="differential identity battery")
    s.add_argument("--only", default=None)
    s.add_argument("--jet-checks", type=int, default=5)
    s.set_defaults(fn=cmd_verify_identities)

    s = sub.add_parser("acceptance", help="run the acceptance suite")
    s.add_argument("--only", default="", help="comma-separated criterion numbers")
    s.add_argument("--scale", type=float, default=1.0)
    s.set_defaults(fn=cmd_acceptance)
    return p


def _finish(args):
    # per-command defaults for the shared numeric flags
    if args.cap is None:
        args.cap = 3 if args.command == "limit" else core.DEFAULT_CAP
    if args.order is None:
        args.order = {"check-variety": 2}.get(args.command, 8)
    if args.bound is None:
        args.bound = {"check-variety": 3, "gsec": 2}.get(args.command)


def _strip(obj, keys):
    if isinstance(obj, dict):
        return {k: _strip(v, keys) for k, v in obj.items() if k not in keys}
    if isinstance(obj, list):
        return [_strip(v, keys) for v in obj]
    return obj


def _emit(report, out):
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        _emit({"schema_version": SCHEMA_VERSION, "error": "USAGE", "message": str(err)}, None)
        return 2
    _finish(args)
    try:
        report, code = args.fn(args)
    except PredimError as err:
        _emit({"schema_version": SCHEMA_VERSION, "command": args.command, **err.to_json()}, args.out)
        return 2
    if not args.timings:
        report = _strip(report, {"seconds"})
    _emit({"schema_version": SCHEMA_VERSION, "command": args.command, "report": report}, args.out)
    return code
