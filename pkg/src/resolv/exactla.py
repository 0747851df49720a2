"""Exact rational scalars and sparse linear algebra.

Every solver in the package bottoms out here: structure constants, cochain
systems and basis changes are all expressed as sparse matrices over the
rationals and reduced exactly.  Scalars are :class:`gmpy2.mpq` values, which
are always kept in lowest terms with a positive denominator.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import gmpy2

Scalar = type(gmpy2.mpq())
ZERO = gmpy2.mpq(0)
ONE = gmpy2.mpq(1)

Row = dict  # column index -> Scalar, zeros omitted


class NoSolution(ValueError):
    """The right-hand side of an affine system is not in the column space."""


def Q(value) -> Scalar:
    """Coerce ``value`` (int, Fraction, mpq, or a ``"p/q"`` string) to a scalar."""
    if isinstance(value, Scalar):
        return value
    if isinstance(value, str):
        text = value.strip().replace(" ", "")
        if "/" in text:
            num, den = text.split("/")
            if int(den) == 0:
                raise ZeroDivisionError(f"zero denominator in {value!r}")
            return gmpy2.mpq(int(num), int(den))
        return gmpy2.mpq(int(text))
    if isinstance(value, Fraction):
        return gmpy2.mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        raise TypeError("floating-point values are not accepted; pass a rational")
    return gmpy2.mpq(value)


def qstr(x) -> str:
    """Render a scalar as ``"p/q"`` (or ``"p"`` when integral)."""
    x = Q(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _bits(x: Scalar) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


@dataclass(frozen=True)
class SparseMatrix:
    """Immutable sparse matrix; ``entries`` maps ``(row, col)`` to a nonzero scalar."""

    rows: int
    cols: int
    entries: Mapping[tuple[int, int], Scalar] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError(f"entry ({r}, {c}) outside {self.rows}x{self.cols}")
            v = Q(v)
            if v:
                clean[(r, c)] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[int, object]], cols: int) -> "SparseMatrix":
        entries = {}
        for r, row in enumerate(rows):
            for c, v in row.items():
                entries[(r, c)] = v
        return cls(len(rows), cols, entries)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[object]]) -> "SparseMatrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        entries = {(r, c): v for r, row in enumerate(data) for c, v in enumerate(row) if v}
        return cls(nrows, ncols, entries)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(i, i): ONE for i in range(n)})

    def row_dicts(self) -> list[Row]:
        out: list[Row] = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def to_dense(self) -> list[list[Scalar]]:
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self.entries.items()})

    @property
    def T(self) -> "SparseMatrix":
        return self.transpose()

    def matvec(self, x: Sequence[object]) -> list[Scalar]:
        if len(x) != self.cols:
            raise ValueError("dimension mismatch")
        out = [ZERO] * self.rows
        for (r, c), v in self.entries.items():
            if x[c]:
                out[r] += v * x[c]
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        right = other.row_dicts()
        acc: dict[tuple[int, int], Scalar] = defaultdict(lambda: ZERO)
        for (r, k), v in self.entries.items():
            for c, w in right[k].items():
                acc[(r, c)] += v * w
        return SparseMatrix(self.rows, other.cols, acc)


def _echelon(rows: list[Row], ncols: int, reduced: bool = True) -> list[tuple[int, Row]]:
    """Row-reduce ``rows`` in place; return ``(pivot_col, row)`` pairs sorted by pivot.

    Columns are processed left to right.  Among the rows that still carry the
    current column, the pivot is the entry of smallest bit size (ties broken
    by row length), which keeps coefficient growth and fill-in down.
    """
    rows = [r for r in rows if r]
    colrows: dict[int, set[int]] = defaultdict(set)
    for idx, row in enumerate(rows):
        for c in row:
            colrows[c].add(idx)

    pivots: list[tuple[int, Row]] = []
    for c in range(ncols):
        cand = colrows.get(c)
        if not cand:
            continue
        p = min(cand, key=lambda i: (_bits(rows[i][c]), len(rows[i]), i))
        prow = rows[p]
        inv = 1 / prow[c]
        if inv != 1:
            for k in prow:
                prow[k] *= inv
        for k in prow:
            colrows[k].discard(p)
        for i in list(cand):
            row = rows[i]
            f = row[c]
            for k, v in prow.items():
                new = row.get(k, ZERO) - f * v
                if new:
                    if k not in row:
                        colrows[k].add(i)
                    row[k] = new
                else:
                    row.pop(k, None)
                    colrows[k].discard(i)
        pivots.append((c, prow))

    if reduced:
        for i in range(len(pivots) - 1, -1, -1):
            c, prow = pivots[i]
            for j in range(i):
                row = pivots[j][1]
                f = row.get(c)
                if f:
                    for k, v in prow.items():
                        new = row.get(k, ZERO) - f * v
                        if new:
                            row[k] = new
                        else:
                            del row[k]
    return pivots


def _copy_rows(m: SparseMatrix | Sequence[Mapping[int, object]]) -> tuple[list[Row], int | None]:
    if isinstance(m, SparseMatrix):
        return m.row_dicts(), m.cols
    return [{c: Q(v) for c, v in r.items() if v} for r in m], None


def rref(m: SparseMatrix) -> tuple[SparseMatrix, int, list[int]]:
    """Reduced row-echelon form, rank and pivot columns of ``m``."""
    rows = m.row_dicts()
    pivots = _echelon(rows, m.cols)
    echelon = SparseMatrix.from_rows([row for _, row in pivots] + [{}] * (m.rows - len(pivots)), m.cols)
    return echelon, len(pivots), [c for c, _ in pivots]


def rank(m: SparseMatrix | Sequence[Mapping[int, object]], ncols: int | None = None) -> int:
    rows, cols = _copy_rows(m)
    cols = cols if cols is not None else ncols
    if cols is None:
        cols = 1 + max((c for r in rows for c in r), default=-1)
    return len(_echelon(rows, cols, reduced=False))


@dataclass(frozen=True)
class SubspaceBasis:
    """A subspace of ``Q^ambient_dim`` held as pivot-normalized RREF rows."""

    ambient_dim: int
    vectors: tuple[Row, ...] = ()

    @classmethod
    def span(cls, ambient_dim: int, vectors: Iterable[Mapping[int, object]]) -> "SubspaceBasis":
        rows = [{c: Q(v) for c, v in vec.items() if v} for vec in vectors]
        pivots = _echelon(rows, ambient_dim)
        return cls(ambient_dim, tuple(row for _, row in pivots))

    @classmethod
    def full(cls, ambient_dim: int) -> "SubspaceBasis":
        return cls(ambient_dim, tuple({i: ONE} for i in range(ambient_dim)))

    @property
    def dim(self) -> int:
        return len(self.vectors)

    @property
    def pivots(self) -> list[int]:
        return [min(v) for v in self.vectors]

    def reduce(self, vec: Mapping[int, object]) -> Row:
        """Remainder of ``vec`` after subtracting its component in this subspace."""
        out = {c: Q(v) for c, v in vec.items() if v}
        for row in self.vectors:
            p = min(row)
            f = out.get(p)
            if f:
                for k, v in row.items():
                    new = out.get(k, ZERO) - f * v
                    if new:
                        out[k] = new
                    else:
                        del out[k]
        return out

    def contains(self, vec: Mapping[int, object]) -> bool:
        return not self.reduce(vec)

    def contains_subspace(self, other: "SubspaceBasis") -> bool:
        return all(self.contains(v) for v in other.vectors)

    def dense(self) -> list[list[Scalar]]:
        return [[row.get(c, ZERO) for c in range(self.ambient_dim)] for row in self.vectors]

    def __eq__(self, other):
        if not isinstance(other, SubspaceBasis):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and list(self.vectors) == list(other.vectors)

    def __hash__(self):
        return hash((self.ambient_dim, tuple(tuple(sorted(v.items())) for v in self.vectors)))


_PRIME = 2**31 - 1


def _independent_rows(rows: list[Row], ncols: int):
    """Indices of rows independent modulo a large prime, or None if a denominator vanishes.

    Rows independent mod p are independent over Q, so the subsystem they form
    has the same rank as the full one whenever p is not unlucky.
    """
    import numpy as np

    p = _PRIME
    A = np.zeros((len(rows), ncols), dtype=np.int64)
    for i, row in enumerate(rows):
        for c, v in row.items():
            den = int(v.denominator) % p
            if not den:
                return None
            A[i, c] = int(v.numerator) % p * pow(den, -1, p) % p
    idx = np.arange(len(rows))
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        nz = np.flatnonzero(A[r:, c])
        if not len(nz):
            continue
        k = r + nz[0]
        if k != r:
            A[[r, k]] = A[[k, r]]
            idx[[r, k]] = idx[[k, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        below = r + 1 + np.flatnonzero(A[r + 1:, c])
        if len(below):
            A[below] = (A[below] - A[below, c][:, None] * A[r][None, :] % p) % p
        r += 1
    return sorted(int(i) for i in idx[:r])


def _kernel(rows: list[Row], ncols: int) -> list[Row]:
    pivots = _echelon(rows, ncols)
    pivot_cols = {c for c, _ in pivots}
    free = [c for c in range(ncols) if c not in pivot_cols]
    # column -> list of (pivot col, coefficient) for the pivot rows mentioning it
    uses: dict[int, list[tuple[int, Scalar]]] = defaultdict(list)
    for c, row in pivots:
        for k, v in row.items():
            if k != c:
                uses[k].append((c, v))
    vecs = []
    for f in free:
        vec = {f: ONE}
        for c, v in uses.get(f, ()):
            vec[c] = -v
        vecs.append(vec)
    return vecs


def nullspace(m: SparseMatrix) -> SubspaceBasis:
    """Basis of ``{v : m v = 0}``.

    Tall systems are first cut down to rows independent modulo a prime; the
    kernel of that subsystem is then checked exactly against every row and
    the full elimination only runs if the check fails.
    """
    rows = m.row_dicts()
    vecs = None
    if len(rows) > 2 * m.cols and m.cols >= 64:
        keep = _independent_rows(rows, m.cols)
        if keep is not None:
            cand = _kernel([dict(rows[i]) for i in keep], m.cols)
            if all(not sum((row[k] * v[k] for k in row.keys() & v.keys()), ZERO) for row in rows for v in cand):
                vecs = cand
    if vecs is None:
        vecs = _kernel(rows, m.cols)
    # Each vector has a distinct free column as its largest "identity" entry;
    # re-echelonize so the result satisfies the RREF invariant.
    return SubspaceBasis.span(m.cols, vecs)


def solve_affine(m: SparseMatrix, rhs: Sequence[object]) -> list[Scalar]:
    """Some ``x`` with ``m x = rhs``; raises :class:`NoSolution` if inconsistent."""
    if len(rhs) != m.rows:
        raise ValueError("rhs length must equal the number of rows")
    rows = m.row_dicts()
    aug = m.cols
    for r, b in enumerate(rhs):
        b = Q(b)
        if b:
            rows[r][aug] = b
    pivots = _echelon(rows, m.cols + 1)
    x = [ZERO] * m.cols
    for c, row in pivots:
        if c == aug:
            raise NoSolution("right-hand side is not in the column space")
        x[c] = row.get(aug, ZERO)
    return x


def inverse(m: SparseMatrix) -> SparseMatrix:
    """Exact inverse of a square matrix; raises ``ZeroDivisionError`` if singular."""
    if m.rows != m.cols:
        raise ValueError("matrix is not square")
    n = m.rows
    rows = m.row_dicts()
    for r in range(n):
        rows[r][n + r] = ONE
    pivots = _echelon(rows, 2 * n)
    if len(pivots) < n or pivots[n - 1][0] >= n:
        raise ZeroDivisionError("matrix is singular")
    entries = {}
    for r, (_, row) in enumerate(pivots[:n]):
        for k, v in row.items():
            if k >= n:
                entries[(r, k - n)] = v
    return SparseMatrix(n, n, entries)
