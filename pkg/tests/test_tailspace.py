import random

import pytest

from resolv import catalog
from resolv.presentation import bind_params
from resolv.tailspace import DERIVED, LOWER_CENTRAL, residual_classify, series

FIELDS = ("residually_nilpotent", "residually_solvable", "pro_nilpotent", "pro_solvable",
          "potentially_nilpotent", "potentially_solvable")
P, R = "Proved", "Refuted"

EXPECTED = {
    "m0": [P, P, P, R, P, R],
    "F": [P, P, P, R, P, R],
    "exam1": [R, P, R, R, R, R],
    "exam2": [P, P, R, R, R, R],
    "Oprime": [R, P, R, P, R, P],
}
for key in ("R1_m0_1", "R2_m0_1", "R3_m0_1", "R_m0_2", "R1_F_1", "R2_F_1", "R3_F_1", "R_F_2"):
    EXPECTED[key] = [R, P, R, R, R, R]

def _bound(key, seed=1):
    e = catalog.entry(key)
    p = catalog.get(key, n=5 if e.needs_n else None)
    return bind_params(p, catalog.draw_bindings(p, random.Random(seed), nonzero=True))

@pytest.mark.parametrize("key", sorted(EXPECTED))
def test_classification(key):
    r = residual_classify(_bound(key))
    assert [r[f] for f in FIELDS] == EXPECTED[key]

def test_m0_codimensions():
    s = series(catalog.get("m0"), LOWER_CENTRAL, 10)
    assert s.codims()[1:] == list(range(2, 11))

@pytest.mark.parametrize("key", [k for k in catalog.keys()])
@pytest.mark.parametrize("which", [LOWER_CENTRAL, DERIVED])
def test_codims_are_partial_sums(key, which):
    s = series(_bound(key), which, 6)
    q = s.quotient_dims()
    c = s.codims()
    assert c[0] == 0
    for k, qk in enumerate(q):
        if None in q[: k + 1]:
            assert c[k + 1] is None
        else:
            assert c[k + 1] == sum(q[: k + 1])

def test_exam1_series_members():
    r = residual_classify(catalog.get("exam1"))
    assert r["lower_central"][-1] != "0"
    assert r["derived"][-1] == "0"
