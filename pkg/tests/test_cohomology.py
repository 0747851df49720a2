import pytest

from resolv.cohomology import (
    ALTERNATING,
    BILINEAR,
    NotCoboundary,
    coboundary,
    coboundary_witness,
    h2_report,
    is_cocycle,
)
from resolv.derivations import LinearMap
from resolv.exactla import Q

from conftest import table


def _random_map(n, rng):
    return LinearMap.from_vector(n, {rng.randrange(n * n): Q(rng.randint(-3, 3)) for _ in range(6)})


@pytest.mark.parametrize("key", ["m0", "R1_m0_1", "F", "R3_F_1"])
def test_coboundaries_are_cocycles(key, rng):
    T = table(key, 5, rng)
    for _ in range(3):
        psi = coboundary(T, _random_map(T.dim, rng))
        assert is_cocycle(T, psi) is None


def test_witness_recovers_coboundary(rng):
    T = table("R_F_2", 5, rng)
    psi = coboundary(T, _random_map(T.dim, rng))
    f = coboundary_witness(T, psi)
    assert {k: dict(v) for k, v in coboundary(T, f).values.items()} == {k: dict(v) for k, v in psi.values.items()}


def test_m0_has_nontrivial_h2():
    from resolv import catalog
    from resolv.quotient import truncate

    T = truncate(catalog.get("m0"), 5)
    r = h2_report(T)
    assert r.flavor == ALTERNATING
    assert r.consistent
    assert r.h2_dim > 0
    phi = r.h2_reps[0]
    assert is_cocycle(T, phi) is None
    with pytest.raises(NotCoboundary):
        coboundary_witness(T, phi)


def test_alternating_restriction_matches_lie_flavor(rng):
    T = table("R_m0_2", 6, rng)
    a = h2_report(T, ALTERNATING)
    b = h2_report(T, BILINEAR, restrict_alternating=True)
    assert a.h2_dim == b.h2_dim == 0


@pytest.mark.parametrize("n", [5, 6])
def test_oprime_rigid(n):
    from resolv import catalog
    from resolv.quotient import truncate

    r = h2_report(truncate(catalog.get("Oprime", n=n), n))
    assert r.flavor == BILINEAR
    assert r.consistent and r.h2_dim == 0


def test_report_json_is_stable(rng):
    T = table("R_F_2", 5, rng)
    assert h2_report(T).dumps(T) == h2_report(T).dumps(T)
