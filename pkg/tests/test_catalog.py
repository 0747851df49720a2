import random

import pytest

from resolv import catalog

ALL = catalog.keys()


def test_thirteen_entries():
    assert len(ALL) == 13
    assert {e["key"] for e in catalog.listing()} == set(ALL)


@pytest.mark.parametrize("key", ALL)
def test_expectations_hold(key):
    for r in catalog.check_entry(key, seed=3):
        assert r["ok"], r


def test_unknown_key():
    with pytest.raises(catalog.UnknownKey):
        catalog.get("nope")


def test_arity_errors():
    with pytest.raises(catalog.BadArity):
        catalog.get("R1_m0_1", t=2)
    with pytest.raises(catalog.BadArity):
        catalog.get("Oprime")
    with pytest.raises(catalog.BadArity):
        catalog.get("Oprime", n=2)


def test_tail_length_sets_parameters():
    assert catalog.get("R1_m0_1", t=6).param_names == ("beta3", "beta4", "beta5", "beta6")
    assert catalog.get("R_F_2", t=3).param_names == ("beta2", "beta3")


def test_draws_are_seeded_and_bounded():
    p = catalog.get("R2_m0_1")
    a = catalog.draw_bindings(p, random.Random(5), nonzero=True)
    b = catalog.draw_bindings(p, random.Random(5), nonzero=True)
    assert a == b
    for v in a.values():
        assert v != 0
        assert abs(v.numerator) <= 9 and v.denominator <= 9
    c = catalog.draw_bindings(p, random.Random(5), fix={"alpha2": 1}, avoid={"beta2": 1})
    assert c["alpha2"] == 1 and c["beta2"] != 1
