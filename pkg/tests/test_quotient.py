import pytest

from resolv import catalog
from resolv.presentation import bind_params
from resolv.quotient import (
    QuotientNotDefined,
    center,
    derived_subalgebra,
    image_chain,
    right_annihilator,
    subspace_names,
    truncate,
)

from conftest import table


def test_m0_truncation():
    T = truncate(catalog.get("m0"), 6)
    assert T.dim == 6
    assert T.names() == ["e1", "e2", "e3", "e4", "e5", "e6"]
    assert subspace_names(T, center(T)) == ["e6"]
    assert derived_subalgebra(T).dim == 4


def test_tensor_json_is_deterministic(rng):
    T = table("R1_m0_1", 6, rng)
    assert T.dumps() == truncate(bind_params(catalog.get("R1_m0_1"), dict(T.params)), 6).dumps()


def test_unbound_parameters_rejected():
    with pytest.raises(Exception):
        truncate(catalog.get("R1_m0_1"), 5)


def test_tail_not_an_ideal():
    with pytest.raises(QuotientNotDefined):
        truncate(catalog.get("exam2"), 4)


def test_leibniz_right_annihilator():
    T = truncate(catalog.get("F"), 5)
    # [e1, e1] = 0 and e2..e5 never act on the right
    assert right_annihilator(T).dim == 4


@pytest.mark.parametrize("key,gen", [("R1_m0_1", "x"), ("R3_m0_1", "x"), ("R_m0_2", "y"), ("R3_F_1", "x")])
def test_image_chain_stabilizes_nonzero(key, gen, rng):
    T = table(key, 10, rng)
    chain = image_chain(T, gen)
    assert chain[-1] == chain[-2] > 0
