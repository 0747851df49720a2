from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from resolv.exactla import (
    NoSolution,
    Q,
    SparseMatrix,
    SubspaceBasis,
    inverse,
    nullspace,
    qstr,
    rank,
    rref,
    solve_affine,
)

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


def dense(draw_rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=1, max_size=draw_rows)


def test_scalar_coercion():
    assert Q("3/6") == Q(1) / 2
    assert Q(Fraction(-2, 4)) == Q("-1/2")
    assert qstr(Q("4/2")) == "2"
    assert qstr(Q("-3/9")) == "-1/3"


def test_rref_small():
    m = SparseMatrix.from_dense([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    e, r, piv = rref(m)
    assert r == 2
    assert piv == [0, 1]
    assert e.to_dense()[0] == [1, 0, 1]


def test_solve_and_inconsistent():
    m = SparseMatrix.from_dense([[1, 1], [1, -1]])
    assert solve_affine(m, [3, 1]) == [2, 1]
    with pytest.raises(NoSolution):
        solve_affine(SparseMatrix.from_dense([[1, 1], [2, 2]]), [1, 3])


def test_inverse_roundtrip():
    m = SparseMatrix.from_dense([[2, 1, 0], [0, 1, 0], [1, 0, 1]])
    assert (m @ inverse(m)).to_dense() == SparseMatrix.identity(3).to_dense()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(lambda c: dense(6, c)))
def test_rank_nullity(rows):
    m = SparseMatrix.from_dense(rows)
    N = nullspace(m)
    assert rank(m) + N.dim == m.cols
    for v in N.vectors:
        assert all(x == 0 for x in m.matvec([v.get(c, 0) for c in range(m.cols)]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4).flatmap(lambda c: dense(5, c)))
def test_span_is_canonical(rows):
    a = SubspaceBasis.span(len(rows[0]), [dict(enumerate(r)) for r in rows])
    b = SubspaceBasis.span(len(rows[0]), [dict(enumerate(r)) for r in reversed(rows)])
    assert a == b
    for r in rows:
        assert a.contains(dict(enumerate(r)))


def test_tall_nullspace_matches_plain_elimination():
    # enough rows to take the modular row-selection path
    import random

    rng = random.Random(3)
    cols = 70
    base = [{c: Q(rng.randint(-3, 3)) for c in rng.sample(range(cols), 6)} for _ in range(40)]
    rows = []
    for _ in range(160):
        a, b = rng.sample(base, 2)
        f = Q(rng.randint(1, 4)) / rng.randint(1, 3)
        rows.append({c: a.get(c, 0) + f * b.get(c, 0) for c in set(a) | set(b)})
    m = SparseMatrix.from_rows(rows, cols)
    N = nullspace(m)
    assert N.dim == cols - rank(m)
    for v in N.vectors:
        assert all(x == 0 for x in m.matvec([v.get(c, 0) for c in range(cols)]))
