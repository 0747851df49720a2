"""Second cohomology with adjoint coefficients for truncated algebras.

A 2-cochain is stored by its values on basis pairs.  The cocycle condition is

    Z(x,y,z) = [x,phi(y,z)] - [phi(x,y),z] + [phi(x,z),y]
               + phi(x,[y,z]) - phi([x,y],z) + phi([x,z],y) = 0,

the first-order deformation of the Leibniz identity, and coboundaries are
``psi_f(x,y) = f([x,y]) - [f(x),y] - [x,f(y)]``.  Lie algebras use alternating
cochains, Leibniz algebras arbitrary bilinear ones; the identity is the same.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .exactla import NoSolution, Q, SparseMatrix, SubspaceBasis, ZERO, nullspace, qstr, solve_affine
from .presentation import LIE
from .quotient import TruncatedAlgebra
from .derivations import LinearMap

ALTERNATING = "alternating"
BILINEAR = "bilinear"


class NotACocycle(ValueError):
    pass


class NotCoboundary(ValueError):
    pass


def default_flavor(T: TruncatedAlgebra) -> str:
    return ALTERNATING if T.kind == LIE else BILINEAR


@dataclass(frozen=True)
class Cochain2:
    """``values[(a, b)]`` is ``phi(basis[a], basis[b])`` as ``{position: scalar}``."""

    flavor: str
    dim: int
    values: Mapping[tuple[int, int], Mapping[int, object]] = field(default_factory=dict)

    def __post_init__(self):
        if self.flavor == ALTERNATING:
            for (a, b), w in self.values.items():
                if a == b and any(w.values()):
                    raise ValueError("alternating cochain with a nonzero diagonal value")
                other = self.values.get((b, a), {})
                for c in set(w) | set(other):
                    if Q(w.get(c, 0)) + Q(other.get(c, 0)):
                        raise ValueError("cochain values are not alternating")

    def __call__(self, a: int, b: int) -> Mapping[int, object]:
        return self.values.get((a, b), {})

    def apply(self, u: Mapping[int, object], v: Mapping[int, object]) -> dict:
        out: dict = {}
        for a, x in u.items():
            for b, y in v.items():
                for c, z in self(a, b).items():
                    out[c] = out.get(c, ZERO) + x * y * z
        return {c: z for c, z in out.items() if z}

    def support_bound(self) -> int:
        """Largest basis position carrying a nonzero value (-1 for the zero cochain)."""
        return max((c for w in self.values.values() for c, z in w.items() if z), default=-1)

    def to_json(self, T: TruncatedAlgebra) -> dict:
        names = T.names()
        out = {}
        for (a, b) in sorted(self.values):
            w = {names[c]: qstr(z) for c, z in sorted(self.values[(a, b)].items()) if z}
            if w:
                out[f"{names[a]},{names[b]}"] = w
        return out


# --- coordinates --------------------------------------------------------------


class _Coords:
    """Unknown numbering for one flavor; ``slot(a, b)`` is ``(pair index, sign)`` or None."""

    def __init__(self, n: int, flavor: str):
        self.n, self.flavor = n, flavor
        if flavor == ALTERNATING:
            self.pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        else:
            self.pairs = [(a, b) for a in range(n) for b in range(n)]
        self.index = {pr: k for k, pr in enumerate(self.pairs)}
        self.size = len(self.pairs) * n

    def slot(self, a: int, b: int):
        if self.flavor == ALTERNATING:
            if a == b:
                return None
            if a < b:
                return self.index[(a, b)], 1
            return self.index[(b, a)], -1
        return self.index[(a, b)], 1

    def unknown(self, a: int, b: int, c: int):
        s = self.slot(a, b)
        if s is None:
            return None
        return s[0] * self.n + c, s[1]

    def cochain(self, vec: Mapping[int, object]) -> Cochain2:
        vals: dict = {}
        for u, z in vec.items():
            k, c = divmod(u, self.n)
            a, b = self.pairs[k]
            vals.setdefault((a, b), {})[c] = Q(z)
            if self.flavor == ALTERNATING:
                vals.setdefault((b, a), {})[c] = -Q(z)
        return Cochain2(self.flavor, self.n, vals)

    def vector(self, phi: Cochain2) -> dict:
        out = {}
        for k, (a, b) in enumerate(self.pairs):
            for c, z in phi(a, b).items():
                if z:
                    out[k * self.n + c] = Q(z)
        return out


def _triples(n: int, flavor: str):
    # for alternating cochains Z is alternating in (x, y, z), so x < y < z suffices
    if flavor == ALTERNATING:
        return ((x, y, z) for x in range(n) for y in range(x + 1, n) for z in range(y + 1, n))
    return ((x, y, z) for x in range(n) for y in range(n) for z in range(n))


def _add(acc: dict, key, v):
    acc[key] = acc.get(key, ZERO) + v


def cocycle_rows(T: TruncatedAlgebra, flavor: str | None = None) -> tuple[list[dict], _Coords]:
    """Rows of the cocycle system, one per (triple, output position), in lexicographic order."""
    flavor = flavor or default_flavor(T)
    n = T.dim
    co = _Coords(n, flavor)
    L, R = T.left_tables, T.right_tables
    rows = []
    for x, y, z in _triples(n, flavor):
        acc: dict = {}

        def term(a, b, c_out_fn, sign):
            # contributions sign * (c_out_fn applied to phi(a, b))
            for m in range(n):
                u = co.unknown(a, b, m)
                if u is None:
                    continue
                for c, v in c_out_fn(m).items():
                    _add(acc, (c, u[0]), sign * u[1] * v)

        # [x, phi(y,z)]
        term(y, z, lambda m: L.get(x, {}).get(m, {}), 1)
        # -[phi(x,y), z]
        term(x, y, lambda m: R.get(z, {}).get(m, {}), -1)
        # +[phi(x,z), y]
        term(x, z, lambda m: R.get(y, {}).get(m, {}), 1)
        # phi(x,[y,z]) - phi([x,y],z) + phi([x,z],y)
        for (a, b, w, sign) in (
            (x, None, T.mul(y, z), 1),
            (None, z, T.mul(x, y), -1),
            (None, y, T.mul(x, z), 1),
        ):
            for k, v in w.items():
                f, s = (a, k) if b is None else (k, b)
                for c in range(n):
                    u = co.unknown(f, s, c)
                    if u is not None:
                        _add(acc, (c, u[0]), sign * u[1] * v)
        by_c: dict = {}
        for (c, u), v in acc.items():
            if v:
                by_c.setdefault(c, {})[u] = v
        rows.extend(by_c[c] for c in sorted(by_c))
    return rows, co


def cocycle_residual(T: TruncatedAlgebra, phi: Cochain2, a: int, b: int, c: int) -> dict:
    """``Z(a, b, c)`` as a coordinate vector."""
    ea, eb, ec = {a: 1}, {b: 1}, {c: 1}
    out: dict = {}
    parts = (
        (T.product(ea, phi(b, c)), 1),
        (T.product(phi(a, b), ec), -1),
        (T.product(phi(a, c), eb), 1),
        (phi.apply(ea, T.mul(b, c)), 1),
        (phi.apply(T.mul(a, b), ec), -1),
        (phi.apply(T.mul(a, c), eb), 1),
    )
    for vec, s in parts:
        for k, v in vec.items():
            _add(out, k, s * v)
    return {k: v for k, v in out.items() if v}


def is_cocycle(T: TruncatedAlgebra, phi: Cochain2):
    """First basis triple with a nonzero residual, or None."""
    n = T.dim
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if cocycle_residual(T, phi, a, b, c):
                    return (a, b, c)
    return None


def coboundary(T: TruncatedAlgebra, f: LinearMap, flavor: str | None = None) -> Cochain2:
    flavor = flavor or default_flavor(T)
    n = T.dim
    vals = {}
    for a in range(n):
        fa = f.image(a)
        for b in range(n):
            fb = f.image(b)
            acc: dict = {}
            for k, v in f.apply(T.mul(a, b)).items():
                _add(acc, k, v)
            for k, v in T.product(fa, {b: 1}).items():
                _add(acc, k, -v)
            for k, v in T.product({a: 1}, fb).items():
                _add(acc, k, -v)
            acc = {k: v for k, v in acc.items() if v}
            if acc:
                vals[(a, b)] = acc
    return Cochain2(flavor, n, vals)


def _coboundary_matrix(T: TruncatedAlgebra, co: _Coords) -> SparseMatrix:
    """Columns are ``psi`` of the elementary maps ``e_a -> e_c`` (unknown ``a*n + c``)."""
    n = T.dim
    entries: dict = {}
    for a in range(n):
        for c in range(n):
            f = LinearMap(SparseMatrix(n, n, {(c, a): 1}))
            for u, v in co.vector(coboundary(T, f, co.flavor)).items():
                entries[(u, a * n + c)] = v
    return SparseMatrix(co.size, n * n, entries)


@dataclass
class H2Report:
    algebra: str
    level: int | None
    flavor: str
    params: dict
    z2_dim: int
    b2_dim: int
    h2_dim: int
    h2_dim_by_extension: int
    b_in_z: bool
    z2_basis: SubspaceBasis
    b2_basis: SubspaceBasis
    h2_reps: list  # Cochain2 representatives of a quotient basis
    coords: object = None

    @property
    def consistent(self) -> bool:
        return self.b_in_z and self.h2_dim == self.h2_dim_by_extension

    def cochains(self, which: str = "z2") -> list[Cochain2]:
        basis = self.z2_basis if which == "z2" else self.b2_basis
        return [self.coords.cochain(v) for v in basis.vectors]

    def to_json(self, T: TruncatedAlgebra | None = None) -> dict:
        out = {
            "algebra": self.algebra,
            "level": self.level,
            "flavor": self.flavor,
            "params": dict(sorted(self.params.items())),
            "z2_dim": self.z2_dim,
            "b2_dim": self.b2_dim,
            "h2_dim": self.h2_dim,
        }
        if self.h2_reps and T is not None:
            names = T.names()
            out["witnesses"] = [
                {"cocycle": phi.to_json(T), "support_bound": names[phi.support_bound()]} for phi in self.h2_reps
            ]
        return out

    def dumps(self, T: TruncatedAlgebra | None = None) -> str:
        return json.dumps(self.to_json(T), sort_keys=True, separators=(",", ":"))


def _alternating_rows(co: _Coords) -> list[dict]:
    n = co.n
    rows = []
    for a in range(n):
        for b in range(a, n):
            for c in range(n):
                row: dict = {}
                _add(row, co.index[(a, b)] * n + c, 1)
                _add(row, co.index[(b, a)] * n + c, 1)
                row = {k: v for k, v in row.items() if v}
                if row:
                    rows.append(row)
    return rows


def h2_report(T: TruncatedAlgebra, flavor: str | None = None, restrict_alternating: bool = False) -> H2Report:
    """Z^2, B^2 and H^2 dimensions with a quotient basis.

    ``restrict_alternating`` solves the bilinear system with the extra
    constraints ``phi(a,b) + phi(b,a) = 0``; for Lie algebras this reproduces
    the alternating computation.
    """
    flavor = flavor or default_flavor(T)
    rows, co = cocycle_rows(T, flavor)
    if restrict_alternating:
        if flavor != BILINEAR:
            raise ValueError("restrict_alternating only applies to bilinear cochains")
        rows = rows + _alternating_rows(co)
    Z = nullspace(SparseMatrix.from_rows(rows, co.size))
    Bmat = _coboundary_matrix(T, co)
    cols: dict = {}
    for (u, k), v in Bmat.entries.items():
        cols.setdefault(k, {})[u] = v
    B = SubspaceBasis.span(co.size, [cols[k] for k in sorted(cols)])
    b_in_z = Z.contains_subspace(B)
    # second count: extend a basis of B^2 by vectors of Z^2
    acc = B
    reps = []
    for v in Z.vectors:
        r = acc.reduce(v)
        if r:
            reps.append(co.cochain(v))
            acc = SubspaceBasis.span(co.size, list(acc.vectors) + [r])
    return H2Report(
        algebra=T.name,
        level=T.level,
        flavor=flavor,
        params={k: qstr(v) for k, v in T.params.items()},
        z2_dim=Z.dim,
        b2_dim=B.dim,
        h2_dim=Z.dim - B.dim,
        h2_dim_by_extension=len(reps),
        b_in_z=b_in_z,
        z2_basis=Z,
        b2_basis=B,
        h2_reps=reps,
        coords=co,
    )


def coboundary_witness(T: TruncatedAlgebra, phi: Cochain2) -> LinearMap:
    """Some ``f`` with ``psi_f = phi``."""
    hit = is_cocycle(T, phi)
    if hit is not None:
        raise NotACocycle(f"nonzero residual at basis triple {hit}")
    co = _Coords(T.dim, phi.flavor)
    M = _coboundary_matrix(T, co)
    rhs = [ZERO] * co.size
    for u, v in co.vector(phi).items():
        rhs[u] = v
    try:
        x = solve_affine(M, rhs)
    except NoSolution:
        raise NotCoboundary("the cocycle is not a coboundary") from None
    return LinearMap.from_vector(T.dim, {k: v for k, v in enumerate(x) if v})
