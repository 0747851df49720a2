"""Brute-force reference computations on dense sympy matrices.

These share nothing with the sparse elimination code except the structure
tensor, and serve as an independent cross-check.
"""

from __future__ import annotations

from itertools import product as iproduct

from sympy import QQ, Rational
from sympy.polys.matrices import DomainMatrix

from .quotient import TruncatedAlgebra


def _q(x) -> Rational:
    return Rational(str(x))


def dense_tensor(T: TruncatedAlgebra) -> list:
    n = T.dim
    C = [[[Rational(0)] * n for _ in range(n)] for _ in range(n)]
    for (a, b), w in T.tensor.items():
        for c, v in w.items():
            C[a][b][c] = _q(v)
    return C


def _rank(rows: list, ncols: int) -> int:
    if not rows:
        return 0
    M = DomainMatrix([[QQ(int(x.p), int(x.q)) for x in r] for r in rows], (len(rows), ncols), QQ)
    return M.rank()


def derivation_dim(T: TruncatedAlgebra) -> int:
    """``dim Der`` from the full system ``d[a,b] = [da,b] + [a,db]`` in ``n^2`` unknowns."""
    n = T.dim
    C = dense_tensor(T)
    rows = []
    # unknown D[c][a] (coefficient of e_c in d(e_a)) sits at column c*n + a
    for a, b, c in iproduct(range(n), repeat=3):
        row = [Rational(0)] * (n * n)
        for k in range(n):
            if C[a][b][k]:
                row[c * n + k] += C[a][b][k]
            if C[k][b][c]:
                row[k * n + a] -= C[k][b][c]
            if C[a][k][c]:
                row[k * n + b] -= C[a][k][c]
        if any(row):
            rows.append(row)
    return n * n - _rank(rows, n * n)


def inner_dim(T: TruncatedAlgebra) -> int:
    """Rank of the span of the right multiplications ``v -> [v, e_b]``."""
    n = T.dim
    C = dense_tensor(T)
    rows = [[C[a][b][c] for a in range(n) for c in range(n)] for b in range(n)]
    return _rank(rows, n * n)


def h2_dims(T: TruncatedAlgebra, alternating: bool) -> tuple[int, int]:
    """``(dim Z^2, dim B^2)`` from dense systems on all ``n^3`` cochain coordinates."""
    n = T.dim
    C = dense_tensor(T)
    N = n * n * n

    def col(x, y, k):
        return (x * n + y) * n + k

    rows = []
    for x, y, z, m in iproduct(range(n), repeat=4):
        row = [Rational(0)] * N
        # [x, phi(y,z)] - [phi(x,y), z] + [phi(x,z), y]
        for k in range(n):
            if C[x][k][m]:
                row[col(y, z, k)] += C[x][k][m]
            if C[k][z][m]:
                row[col(x, y, k)] -= C[k][z][m]
            if C[k][y][m]:
                row[col(x, z, k)] += C[k][y][m]
        # phi(x,[y,z]) - phi([x,y],z) + phi([x,z],y)
        for k in range(n):
            if C[y][z][k]:
                row[col(x, k, m)] += C[y][z][k]
            if C[x][y][k]:
                row[col(k, z, m)] -= C[x][y][k]
            if C[x][z][k]:
                row[col(k, y, m)] += C[x][z][k]
        if any(row):
            rows.append(row)
    if alternating:
        for x, y, m in iproduct(range(n), repeat=3):
            if x <= y:
                row = [Rational(0)] * N
                row[col(x, y, m)] += 1
                row[col(y, x, m)] += 1
                rows.append(row)
    z = N - _rank(rows, N)
    # coboundaries of all linear maps f: psi(x,y) = f([x,y]) - [f x, y] - [x, f y]
    gens = []
    for a, c in iproduct(range(n), repeat=2):  # f(e_a) = e_c
        v = [Rational(0)] * N
        for x, y in iproduct(range(n), repeat=2):
            w = C[x][y][a]
            if w:
                v[col(x, y, c)] += w
            if x == a:
                for m in range(n):
                    v[col(x, y, m)] -= C[c][y][m]
            if y == a:
                for m in range(n):
                    v[col(x, y, m)] -= C[x][c][m]
        gens.append(v)
    b = _rank(gens, N)
    return z, b
