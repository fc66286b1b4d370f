"""Every acceptance criterion at full size; one pass/fail line per criterion."""
import pytest

from predim.acceptance import CRITERIA, run_all


@pytest.mark.parametrize("number", [c.number for c in CRITERIA],
                         ids=[f"c{c.number:02d}-{c.criterion.replace(' ', '-')}" for c in CRITERIA])
def test_criterion(number, capsys):
    (result,) = run_all(seed=0, scale=1.0, only={number})
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail


if __name__ == "__main__":
    for r in run_all(seed=0, scale=1.0):
        print(r.line())
