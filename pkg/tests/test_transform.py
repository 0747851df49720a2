import random

import pytest

from resolv import catalog
from resolv.acceptance import random_change
from resolv.cohomology import h2_report
from resolv.derivations import inner_and_h1
from resolv.presentation import Element, bind_params
from resolv.quotient import truncate
from resolv.transform import (
    BasisChange,
    NotInvertible,
    ShapeMismatch,
    apply_change,
    compare_presentations,
    diff_tables,
    parse_change,
    symbolic_change,
)

from conftest import table


def test_identity_change_is_equal(rng):
    T = table("R1_m0_1", 6, rng)
    assert diff_tables(apply_change(T, BasisChange({})), T) == "Equal"


def test_change_and_inverse_roundtrip(rng):
    T = table("R3_F_1", 6, rng)
    ch = random_change(T, rng)
    T2 = apply_change(T, ch)
    assert diff_tables(apply_change(T2, ch.inverse(T)), T) == "Equal"


def test_singular_change_rejected():
    T = truncate(catalog.get("m0"), 4)
    ch = BasisChange({1: Element({2: 1}), 2: Element({2: 1})})
    with pytest.raises(NotInvertible):
        ch.inverse(T)


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        diff_tables(truncate(catalog.get("m0"), 4), truncate(catalog.get("m0"), 5))


def test_diff_reports_pairs():
    A = truncate(catalog.get("m0"), 5)
    B = apply_change(A, BasisChange({1: Element({1: 2})}))
    d = diff_tables(A, B)
    assert d != "Equal"
    assert any(pair == ("e2", "e1") for pair, _, _ in d)


@pytest.mark.parametrize("key", ["R1_m0_1", "R2_F_1", "Oprime"])
def test_invariants_survive_changes(key, rng):
    T = table(key, 5, rng)
    base = (inner_and_h1(T).h1_dim, h2_report(T).h2_dim)
    for _ in range(2):
        T2 = apply_change(T, random_change(T, rng))
        assert (inner_and_h1(T2).h1_dim, h2_report(T2).h2_dim) == base


def test_symbolic_scaling_of_x():
    p = catalog.get("R1_m0_1")
    ch = parse_change(["x' = 2*x"], p)
    q = symbolic_change(p, ch)
    b = catalog.draw_bindings(p, random.Random(0), nonzero=True)
    T = apply_change(truncate(bind_params(p, b), 7), parse_change(["x' = 2*x"], p, numeric=b))
    assert diff_tables(truncate(bind_params(q, b), 7), T) == "Equal"
    assert compare_presentations(q, p).status == "Refuted"
    assert compare_presentations(p, p).status == "Proved"


def test_parse_change_family_lines():
    p = catalog.get("F")
    ch = parse_change(["e(k)' = 3*e(k) for k in 2..4"], p)
    assert set(ch.modified()) == {2, 3, 4}
