"""Frozen values from the dense brute-force oracle, cross-checked against the sparse solvers."""

import pytest

from resolv import catalog
from resolv.cohomology import h2_report
from resolv.derivations import derivation_space, inner_space
from resolv.oracle import derivation_dim, h2_dims, inner_dim
from resolv.quotient import truncate

DER_M0 = {4: 7, 5: 9, 6: 11, 7: 13, 8: 15, 9: 17, 10: 19}


@pytest.mark.parametrize("n", sorted(DER_M0))
def test_der_m0_frozen(n):
    T = truncate(catalog.get("m0"), n)
    assert derivation_dim(T) == DER_M0[n]
    assert len(derivation_space(T)) == DER_M0[n]


@pytest.mark.parametrize("key,n", [("F", 5), ("R1_m0_1", 5), ("R3_F_1", 5), ("Oprime", 4)])
def test_solvers_agree_with_oracle(key, n, rng):
    from conftest import table

    T = table(key, n, rng)
    assert derivation_dim(T) == len(derivation_space(T))
    assert inner_dim(T) == inner_space(T).dim


def test_oprime_h2_frozen():
    T = truncate(catalog.get("Oprime", n=5), 5)
    z, b = h2_dims(T, alternating=False)
    assert (z, b) == (34, 34)
    r = h2_report(T)
    assert (r.z2_dim, r.b2_dim, r.h2_dim) == (34, 34, 0)


def test_m0_h2_alternating_matches(rng):
    T = truncate(catalog.get("m0"), 5)
    z, b = h2_dims(T, alternating=True)
    r = h2_report(T)
    assert (r.z2_dim, r.b2_dim) == (z, b)
