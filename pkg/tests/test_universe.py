import pytest

from helpers import ej, exp
from predim.errors import PredimError
from predim.universe import ClassId, Point, Substructure, Universe, generate, whole


def pair_universe():
    return ej([("c", [0, 0]), ("z", [1, 0], None, "s"), ("j", [0, 1], "h")], [("z", "j")])


def test_json_round_trip_is_exact():
    U = ej([("a", ["1/3", 2]), ("b", [0, "-5/7"], "h")])
    V = Universe.loads(U.dumps())
    assert V.dumps() == U.dumps()
    assert V.points["a"].td == U.points["a"].td


def test_exp_json_keeps_lin_vectors():
    U = exp([("x", [1, 0], [1]), ("y", [0, 1], None)], [("x", "y")])
    assert Universe.loads(U.dumps()).points["x"].lin == U.points["x"].lin


def test_closure_adds_constants_and_span():
    U = ej([("c", [0, 0]), ("a", [1, 0]), ("b", [2, 0]), ("d", [0, 1])])
    assert U.closure(["a"]) == frozenset({"a", "b", "c"})
    assert generate(U).members == frozenset({"c"})


def test_shape_errors():
    with pytest.raises(PredimError) as e:
        ej([("z", [1])], [("z", "q")])
    assert e.value.code == "MALFORMED_UNIVERSE"
    with pytest.raises(PredimError) as e:
        Universe(ClassId.AB_INITIO, [Point("a")], relations=[("a", "a")])
    assert e.value.code == "MALFORMED_TRIPLE"
    with pytest.raises(PredimError) as e:
        Universe(ClassId.EXP_TOY, [Point("x", (1,)), Point("y", (0, 1))], [("x", "y")])
    assert e.value.code == "MALFORMED_UNIVERSE"


def test_bad_json_inputs():
    with pytest.raises(PredimError):
        Universe.from_json({"class_id": "NOPE"})
    with pytest.raises(PredimError):
        Universe.from_json({"class_id": "EJ_TOY", "schema_version": 99})


def test_unknown_point():
    U = pair_universe()
    with pytest.raises(PredimError) as e:
        U.mask(["nope"])
    assert e.value.code == "UNKNOWN_POINT"


def test_substructure_order():
    U = pair_universe()
    assert generate(U) <= whole(U)
