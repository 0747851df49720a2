"""Finite quotients ``L / I_n`` with ``I_n = span{e_j : j > n}`` and their basic ideals."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .exactla import ONE, SparseMatrix, SubspaceBasis, ZERO, nullspace, qstr, rank
from .presentation import LIE, Element, Gen, Presentation, PresentationError, _fs, gen_name


class QuotientNotDefined(PresentationError):
    """The family tail above the level is not a two-sided ideal."""


@dataclass(frozen=True, eq=False)
class TruncatedAlgebra:
    """Finite-dimensional algebra given by a sparse structure tensor over the rationals.

    ``tensor[(a, b)]`` maps result basis positions to nonzero scalars; missing
    pairs multiply to zero.
    """

    basis: tuple
    kind: str
    tensor: Mapping[tuple[int, int], Mapping[int, object]]
    name: str = ""
    level: int | None = None
    params: Mapping[str, str] = field(default_factory=dict)
    family: str = "e"

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def index(self) -> dict:
        return {g: k for k, g in enumerate(self.basis)}

    def names(self) -> list[str]:
        return [gen_name(g, self.family) for g in self.basis]

    def mul(self, a: int, b: int) -> Mapping[int, object]:
        return self.tensor.get((a, b), {})

    @cached_property
    def right_tables(self) -> dict:
        """``b -> {a: [a, b]}``."""
        out: dict = {}
        for (a, b), v in self.tensor.items():
            out.setdefault(b, {})[a] = v
        return out

    @cached_property
    def left_tables(self) -> dict:
        out: dict = {}
        for (a, b), v in self.tensor.items():
            out.setdefault(a, {})[b] = v
        return out

    def product(self, u: Mapping[int, object], v: Mapping[int, object]) -> dict:
        """Product of coordinate vectors ``{position: scalar}``."""
        out: dict = {}
        for a, ca in u.items():
            row = self.left_tables.get(a)
            if not row:
                continue
            for b, cb in v.items():
                w = row.get(b)
                if not w:
                    continue
                f = ca * cb
                for c, x in w.items():
                    out[c] = out.get(c, ZERO) + f * x
        return {c: x for c, x in out.items() if x}

    def vector(self, e: Element) -> dict:
        out = {}
        for g, c in e.items():
            if g in self.index:
                out[self.index[g]] = c
            elif isinstance(g, int):
                continue  # beyond the truncation level
            else:
                raise KeyError(f"{g!r} is not a basis element")
        return out

    def element(self, vec: Mapping[int, object]) -> Element:
        return Element({self.basis[k]: c for k, c in vec.items()})

    def right_matrix(self, g: int) -> SparseMatrix:
        """Matrix of ``v -> [v, basis[g]]`` (column ``a`` holds the image of basis[a])."""
        entries = {}
        for a, w in self.right_tables.get(g, {}).items():
            for c, x in w.items():
                entries[(c, a)] = x
        return SparseMatrix(self.dim, self.dim, entries)

    def left_matrix(self, g: int) -> SparseMatrix:
        entries = {}
        for b, w in self.left_tables.get(g, {}).items():
            for c, x in w.items():
                entries[(c, b)] = x
        return SparseMatrix(self.dim, self.dim, entries)

    def is_leibniz(self) -> tuple | None:
        """First basis triple violating the Leibniz identity, or None."""
        n = self.dim
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    lhs = self.product({a: ONE}, self.mul(b, c))
                    r1 = self.product(self.mul(a, b), {c: ONE})
                    r2 = self.product(self.mul(a, c), {b: ONE})
                    acc = dict(lhs)
                    for k, v in r1.items():
                        acc[k] = acc.get(k, ZERO) - v
                    for k, v in r2.items():
                        acc[k] = acc.get(k, ZERO) + v
                    if any(acc.values()):
                        return (a, b, c)
        if self.kind == LIE:
            for a in range(n):
                for b in range(a, n):
                    s = dict(self.mul(a, b))
                    for k, v in self.mul(b, a).items():
                        s[k] = s.get(k, ZERO) + v
                    if any(s.values()):
                        return (a, b)
        return None

    def to_json(self) -> dict:
        names = self.names()
        triples = []
        for (a, b) in sorted(self.tensor):
            w = self.tensor[(a, b)]
            triples.append([names[a], names[b], [[names[c], qstr(w[c])] for c in sorted(w)]])
        return {
            "algebra": self.name,
            "level": self.level,
            "kind": self.kind,
            "params": dict(sorted(self.params.items())),
            "basis": names,
            "tensor": triples,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def same_table(self, other: "TruncatedAlgebra") -> bool:
        return self.basis == other.basis and _clean(self.tensor) == _clean(other.tensor)


def _clean(t) -> dict:
    return {k: {c: x for c, x in v.items() if x} for k, v in t.items() if any(v.values())}


def _window(p: Presentation, n: int) -> int:
    """Index bound beyond which all rules act uniformly on the family tail."""
    deg = 0
    for r in p.eval_rules:
        for t in r.terms:
            deg = max(deg, t.coeff.degree(p.ring.gens[0]), t.coeff.degree(p.ring.gens[1]))
    return max(n, p.max_constant()) + p.max_shift() + deg + 3


def check_tail_ideal(p: Presentation, n: int) -> None:
    """Raise :class:`QuotientNotDefined` unless ``span{e_j : j > n}`` is a two-sided ideal."""
    if p.family_end is not None and n >= p.family_end:
        return
    w = _window(p, n)
    gens = p.generators(w)
    high = [g for g in gens if isinstance(g, int) and g > n]
    for j in high:
        for g in gens:
            for a, b in ((j, g), (g, j)):
                prod = p.pair(a, b)
                low = [k for k in prod if not (isinstance(k, int) and k > n)]
                if low:
                    m = p.match(a, b)
                    rule = m[0] if m else None
                    raise QuotientNotDefined(
                        f"[{gen_name(a, p.family)}, {gen_name(b, p.family)}] has support on "
                        f"{[gen_name(k, p.family) for k in low]} below the tail"
                        + (f" (rule [{_fs(rule.left)}, {_fs(rule.right)}])" if rule else "")
                    )


def truncate(p: Presentation, n: int) -> TruncatedAlgebra:
    """The quotient ``p / I_n`` (extras are kept)."""
    if not p.is_bound:
        raise PresentationError(f"bind the parameters {list(p.param_names)} before truncating")
    if n < p.family_start:
        raise ValueError(f"level {n} is below the family start {p.family_start}")
    check_tail_ideal(p, n)
    top = n if p.family_end is None else min(n, p.family_end)
    basis = tuple(list(range(p.family_start, top + 1)) + list(p.extras))
    idx = {g: k for k, g in enumerate(basis)}
    tensor = {}
    for a, g in enumerate(basis):
        for b, h in enumerate(basis):
            prod = p.pair(g, h)
            w = {idx[k]: c for k, c in prod.items() if k in idx}
            if w:
                tensor[(a, b)] = w
    return TruncatedAlgebra(
        basis=basis,
        kind=p.kind,
        tensor=tensor,
        name=p.name,
        level=top,
        params=dict(p.attrs.get("bindings", {})),
        family=p.family,
    )


def _annihilator(T: TruncatedAlgebra, left: bool, right: bool) -> SubspaceBasis:
    n = T.dim
    rows = []
    for y in range(n):
        if right:
            # [y, z] = 0 : sum_z z_a [y, a]
            for c in range(n):
                row = {a: T.mul(y, a).get(c) for a in range(n)}
                row = {a: v for a, v in row.items() if v}
                if row:
                    rows.append(row)
        if left:
            for c in range(n):
                row = {a: T.mul(a, y).get(c) for a in range(n)}
                row = {a: v for a, v in row.items() if v}
                if row:
                    rows.append(row)
    return nullspace(SparseMatrix.from_rows(rows, n))


def center(T: TruncatedAlgebra) -> SubspaceBasis:
    return _annihilator(T, left=True, right=True)


def right_annihilator(T: TruncatedAlgebra) -> SubspaceBasis:
    """``{x : [y, x] = 0 for all y}``."""
    return _annihilator(T, left=False, right=True)


def derived_subalgebra(T: TruncatedAlgebra) -> SubspaceBasis:
    return SubspaceBasis.span(T.dim, T.tensor.values())


def distinguished_ideals(T: TruncatedAlgebra) -> dict:
    return {"center": center(T), "right_annihilator": right_annihilator(T), "derived": derived_subalgebra(T)}


def image_chain(T: TruncatedAlgebra, g: Gen | int) -> list[int]:
    """``dim Im(R_g^k)`` for ``k = 1..dim`` where ``R_g(v) = [v, g]``."""
    k = T.index[g] if g in T.index else int(g)
    M = T.right_matrix(k)
    out = []
    P = M
    for _ in range(T.dim):
        out.append(rank(P))
        P = M @ P
    return out


def subspace_names(T: TruncatedAlgebra, S: SubspaceBasis) -> list[str]:
    names = T.names()
    out = []
    for v in S.vectors:
        terms = []
        for c in sorted(v):
            x = v[c]
            terms.append(names[c] if x == 1 else f"({qstr(x)})*{names[c]}")
        out.append(" + ".join(terms))
    return out
