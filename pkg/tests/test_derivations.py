import pytest

from resolv import catalog
from resolv.acceptance import DER_F, DER_M0
from resolv.derivations import (
    NotADerivation,
    derivation_space,
    family_members,
    inner_and_h1,
    inner_space,
    is_complete,
    is_derivation,
    is_inner,
    parse_family,
    right_multiplication,
    verify_family,
)
from resolv.exactla import SubspaceBasis
from resolv.quotient import truncate

from conftest import bound, table


def test_right_multiplications_are_derivations(rng):
    T = table("R_F_2", 6, rng)
    for a in range(T.dim):
        assert is_derivation(T, right_multiplication(T, a))


@pytest.mark.parametrize("key,text", [("m0", DER_M0), ("F", DER_F)])
def test_symbolic_families_verify(key, text):
    p = catalog.get(key)
    assert verify_family(p, parse_family(text, p)).status == "Proved"


@pytest.mark.parametrize("key,text", [("m0", DER_M0), ("F", DER_F)])
def test_families_embed(key, text):
    p = catalog.get(key)
    fam = parse_family(text, p)
    for n in (5, 9):
        T = truncate(p, n)
        D = SubspaceBasis.span(T.dim**2, [d.vector() for d in derivation_space(T)])
        assert all(D.contains(m.vector()) for m in family_members(fam, T))


def test_broken_family_refuted():
    p = catalog.get("F")
    fam = parse_family("map e(1) -> e(2)", p)  # fails on [e1, e1] = 0
    assert verify_family(p, fam).status == "Refuted"


def test_shift_by_two_not_a_derivation_of_second_form(rng):
    p = bound("R2_F_1", rng)
    T = truncate(p, 8)
    d = parse_family("map e(i) -> e(i+2) for i >= 2", catalog.get("R2_F_1")).member(T, {})
    assert not is_derivation(T, d)
    with pytest.raises(NotADerivation):
        is_inner(T, d)


@pytest.mark.parametrize("key,map_name", [("R1_m0_1", "identity_tail"), ("R3_F_1", "shift2_tail")])
def test_outer_maps(key, map_name, rng):
    p = catalog.get(key)
    T = table(key, 8, rng)
    fam = parse_family(catalog.derivation_map(map_name), p, numeric=dict(T.params))
    d = fam.member(T, {})
    assert is_derivation(T, d)
    assert is_inner(T, d) is None
    assert inner_and_h1(T).h1_dim >= 1


def test_inner_witness_reconstructs(rng):
    T = table("R_m0_2", 6, rng)
    d = right_multiplication(T, {0: 2, T.dim - 1: -1})
    a = is_inner(T, d)
    assert a is not None
    assert right_multiplication(T, a).vector() == d.vector()


@pytest.mark.parametrize("key", ["R_m0_2", "R_F_2", "R2_F_1"])
def test_complete(key, rng):
    T = table(key, 7, rng)
    r = is_complete(T)
    assert r["complete"], r


def test_h1_counts(rng):
    T = table("R1_m0_1", 8, rng)
    h = inner_and_h1(T)
    assert h.der_dim == h.inner_dim + h.h1_dim
    assert h.inner_dim == inner_space(T).dim
