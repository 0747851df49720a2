import random

import pytest
from hypothesis import given, settings, strategies as st

from resolv import catalog, dsl
from resolv.identities import check_identities, leib_gens, numeric_check
from resolv.presentation import bind_params

SYMBOLIC = [k for k in catalog.keys() if not catalog.entry(k).needs_n]


@pytest.mark.parametrize("key", SYMBOLIC)
def test_catalog_entries_proved_symbolically(key):
    assert check_identities(catalog.get(key)).status == "Proved"


@pytest.mark.parametrize("n", [3, 5, 8])
def test_oprime_proved(n):
    assert check_identities(catalog.get("Oprime", n=n)).status == "Proved"


def test_refutation_carries_triple():
    src = catalog.entry("R1_m0_1").source().replace("[e(1), x] = e(1)", "[e(1), x] = 2*e(1)")
    v = check_identities(dsl.parse(src))
    assert v.status == "Refuted"
    a, b, c = v.triple
    p = bind_params(dsl.parse(src), {name: 1 for name in dsl.parse(src).param_names})
    assert leib_gens(p, a, b, c)


def test_shifting_the_diagonal_stays_valid():
    # (i-2) -> (i-3) adds the identity-on-tail derivation, so the result is still Lie
    src = catalog.entry("R1_m0_1").source().replace("(i-2)*e(i)", "(i-3)*e(i)")
    assert check_identities(dsl.parse(src)).status == "Proved"


def test_non_leibniz_table_refuted():
    text = (
        "algebra bad kind leibniz\nfamily e start 1\n"
        "rule [e(i), e(1)] = e(i+1) for i >= 2\n"
        "rule [e(1), e(i)] = e(i+1) for i >= 2\n"
    )
    assert check_identities(dsl.parse(text)).status == "Refuted"


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["R1_F_1", "R3_F_1", "R_F_2", "R2_m0_1", "R_m0_2"]), st.integers(0, 10**6))
def test_random_bindings_pass_window_check(key, seed):
    p = catalog.get(key)
    b = catalog.draw_bindings(p, random.Random(seed))
    assert numeric_check(bind_params(p, b), 7) is None
