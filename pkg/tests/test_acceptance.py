"""The ten acceptance criteria at their stated tolerances; one pass/fail line each."""

import pytest

from gibbsldp.acceptance import CRITERIA


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"C{c.number}-{c.name}" for c in CRITERIA])
def test_criterion(crit, capsys):
    res = crit.run()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.ok, res.line()
