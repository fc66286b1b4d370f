import json

import pytest

from predim.cli import main
from predim.generators import constants_universe
from predim.toy_fields import adjoin_transcendentals
from predim.universe import ClassId
from predim.varieties import pairs_variety


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, json.loads(out.read_text())


@pytest.fixture
def universe(tmp_path):
    U = adjoin_transcendentals(constants_universe(ClassId.EJ_TOY), 1, paired=True).universe
    p = tmp_path / "u.json"
    p.write_text(U.dumps())
    return str(p)


@pytest.fixture
def open_universe(tmp_path):
    U = adjoin_transcendentals(constants_universe(ClassId.EJ_TOY), 1).universe
    p = tmp_path / "open.json"
    p.write_text(U.dumps())
    return str(p)


def test_delta(universe, tmp_path):
    code, out = run(["delta", "--in", universe], tmp_path)
    assert code == 0 and out["schema_version"] == 1
    assert out["report"]["delta"] == 1 and out["report"]["sigma"] == 1


def test_closure(universe, tmp_path):
    code, out = run(["closure", "--in", universe, "--points", "tj0"], tmp_path)
    assert code == 0
    assert "tj0" in json.dumps(out["report"])


def test_audit(universe, tmp_path):
    code, out = run(["audit", "--in", universe, "--trials", "50"], tmp_path)
    assert code == 0


def test_fullify(open_universe, tmp_path):
    code, out = run(["fullify", "--in", open_universe], tmp_path)
    assert code == 0 and len(out["report"]["added"]) == 1


def test_amalgamate(universe, tmp_path):
    code, out = run(["amalgamate", "--in1", universe, "--in2", universe, "--base", "c0"], tmp_path)
    assert code == 0
    assert out["report"]["audit"]["ok"]


def test_gsec(universe, tmp_path):
    v = tmp_path / "v.json"
    v.write_text(json.dumps(pairs_variety(["t", "a"], ["(+ t a)"], ["(* t a)"]).to_json()))
    code, out = run(["gsec", "--in", universe, "--variety", str(v), "--bind", "a=tj0"], tmp_path)
    assert code == 0 and out["report"]["relative_delta"] == 0


def test_check_variety(tmp_path):
    v = tmp_path / "v.json"
    v.write_text(json.dumps(pairs_variety(["t"], ["t"], ["(* t t)"]).to_json()))
    code, out = run(["check-variety", "--variety", str(v), "--normal", "--expect", "normal"], tmp_path)
    assert code == 0
    code, _ = run(["check-variety", "--variety", str(v), "--normal", "--expect", "strongly-normal"],
                  tmp_path, "b.json")
    assert code == 1


def test_modular_poly(tmp_path):
    code, out = run(["modular-poly", "2", "--verify", "20"], tmp_path)
    assert code == 0
    assert "40773375" in json.dumps(out)


def test_limit(tmp_path):
    code, out = run(["limit", "--cap", "2", "--rounds", "3"], tmp_path)
    assert code == 0


def test_verify_identities(tmp_path):
    code, _ = run(["verify-identities", "--only", "FIBRE,A3_PRIME_1"], tmp_path)
    assert code == 0
    code, out = run(["verify-identities", "--only", "A3_PRIME_2", "--jet-checks", "2"], tmp_path, "b.json")
    assert code == 1


def test_reruns_are_byte_identical(universe, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["audit", "--in", universe, "--seed", "4", "--out", str(a)])
    main(["--seed", "4", "audit", "--in", universe, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_error_exits(tmp_path, capsys):
    code, out = run(["delta", "--in", str(tmp_path / "missing.json")], tmp_path)
    assert code == 2 and "error" in out
    assert main(["no-such-command"]) == 2
    assert json.loads(capsys.readouterr().out)["error"] == "USAGE"


def test_env_defaults(monkeypatch, tmp_path):
    monkeypatch.setenv("PREDIM_SEED", "9")
    code, out = run(["modular-poly", "--level", "1"], tmp_path)
    assert code == 0
