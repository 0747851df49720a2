"""Derivations of truncated algebras, inner derivations and H^1, plus symbolic families.

Inner derivations are right multiplications ``R_a(v) = [v, a]``; these are
derivations of every Leibniz algebra in the convention
``[x,[y,z]] = [[x,y],z] - [[x,z],y]``.  For Lie kind they agree with the usual
adjoint maps up to sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from sympy import Symbol

from .exactla import (
    NoSolution,
    Q,
    SparseMatrix,
    SubspaceBasis,
    ZERO,
    nullspace,
    qstr,
    solve_affine,
)
from .presentation import (
    Affine,
    Element,
    Factor,
    Presentation,
    PresentationError,
    make_ring,
)
from .quotient import TruncatedAlgebra, center


class NotADerivation(ValueError):
    pass


@dataclass(frozen=True)
class LinearMap:
    """Square matrix over a truncated basis; column ``a`` is the image of basis vector ``a``."""

    matrix: SparseMatrix

    @property
    def dim(self) -> int:
        return self.matrix.rows

    @classmethod
    def from_vector(cls, n: int, vec: Mapping[int, object]) -> "LinearMap":
        """Inverse of :meth:`vector`: unknown ``a*n + c`` is the ``e_c`` coefficient of ``d(e_a)``."""
        return cls(SparseMatrix(n, n, {(u % n, u // n): v for u, v in vec.items()}))

    @classmethod
    def from_images(cls, T: TruncatedAlgebra, images: Mapping) -> "LinearMap":
        entries = {}
        for g, img in images.items():
            a = T.index[g]
            for c, v in T.vector(img).items():
                entries[(c, a)] = v
        return cls(SparseMatrix(T.dim, T.dim, entries))

    def vector(self) -> dict:
        n = self.dim
        return {a * n + c: v for (c, a), v in self.matrix.entries.items()}

    def image(self, a: int) -> dict:
        return {c: v for (c, b), v in self.matrix.entries.items() if b == a}

    def apply(self, vec: Mapping[int, object]) -> dict:
        out: dict = {}
        cols = self._cols()
        for a, x in vec.items():
            for c, v in cols.get(a, {}).items():
                out[c] = out.get(c, ZERO) + x * v
        return {c: v for c, v in out.items() if v}

    def _cols(self) -> dict:
        cols: dict = {}
        for (c, a), v in self.matrix.entries.items():
            cols.setdefault(a, {})[c] = v
        return cols

    def describe(self, T: TruncatedAlgebra) -> dict:
        names = T.names()
        out = {}
        for a, img in sorted(self._cols().items()):
            out[names[a]] = {names[c]: qstr(v) for c, v in sorted(img.items())}
        return out


def derivation_rows(T: TruncatedAlgebra) -> list[dict]:
    """Rows of ``d([a,b]) - [d a, b] - [a, d b] = 0`` in the ``dim^2`` unknowns."""
    n = T.dim
    rows = []
    R = T.right_tables  # b -> {m: [m, b]}
    L = T.left_tables  # a -> {m: [a, m]}
    for a in range(n):
        La = L.get(a, {})
        for b in range(n):
            ab = T.mul(a, b)
            Rb = R.get(b, {})
            acc: dict = {}
            # d([a,b])_c = sum_k ab[k] d(e_k)_c
            for k, x in ab.items():
                for c in range(n):
                    key = (c, k * n + c)
                    acc[key] = acc.get(key, ZERO) + x
            # -[d a, b]_c = -sum_m d(a)_m [m, b]_c
            for m, w in Rb.items():
                for c, x in w.items():
                    key = (c, a * n + m)
                    acc[key] = acc.get(key, ZERO) - x
            # -[a, d b]_c = -sum_m d(b)_m [a, m]_c
            for m, w in La.items():
                for c, x in w.items():
                    key = (c, b * n + m)
                    acc[key] = acc.get(key, ZERO) - x
            by_c: dict = {}
            for (c, u), x in acc.items():
                if x:
                    by_c.setdefault(c, {})[u] = x
            rows.extend(by_c[c] for c in sorted(by_c))
    return rows


def derivation_matrix(T: TruncatedAlgebra) -> SparseMatrix:
    rows = derivation_rows(T)
    return SparseMatrix.from_rows(rows, T.dim**2)


def derivation_space(T: TruncatedAlgebra) -> list[LinearMap]:
    """A basis of ``Der(T)`` from the full linear system."""
    basis = nullspace(derivation_matrix(T))
    return [LinearMap.from_vector(T.dim, v) for v in basis.vectors]


def is_derivation(T: TruncatedAlgebra, d: LinearMap) -> bool:
    vec = d.vector()
    for row in derivation_rows(T):
        s = ZERO
        for u, x in row.items():
            v = vec.get(u)
            if v:
                s += x * v
        if s:
            return False
    return True


def right_multiplication(T: TruncatedAlgebra, a: int | Mapping[int, object]) -> LinearMap:
    vec = {a: 1} if isinstance(a, int) else a
    entries = {}
    for b in range(T.dim):
        for c, v in T.product({b: 1}, vec).items():
            entries[(c, b)] = v
    return LinearMap(SparseMatrix(T.dim, T.dim, entries))


def inner_space(T: TruncatedAlgebra) -> SubspaceBasis:
    vecs = [right_multiplication(T, a).vector() for a in range(T.dim)]
    return SubspaceBasis.span(T.dim**2, vecs)


@dataclass
class H1Report:
    der_dim: int
    inner_dim: int
    h1_dim: int
    inner_basis: list[LinearMap]
    outer_coset_reps: list[LinearMap]

    def to_json(self, T: TruncatedAlgebra | None = None) -> dict:
        out = {"der_dim": self.der_dim, "inner_dim": self.inner_dim, "h1_dim": self.h1_dim}
        if T is not None:
            out["outer_coset_reps"] = [d.describe(T) for d in self.outer_coset_reps]
        return out


def inner_and_h1(T: TruncatedAlgebra, der: Sequence[LinearMap] | None = None) -> H1Report:
    der = list(der) if der is not None else derivation_space(T)
    inner = inner_space(T)
    reps = []
    acc = SubspaceBasis(T.dim**2, inner.vectors)
    for d in der:
        v = d.vector()
        if not acc.contains(v):
            reps.append(d)
            acc = SubspaceBasis.span(T.dim**2, list(acc.vectors) + [v])
    return H1Report(
        der_dim=len(der),
        inner_dim=inner.dim,
        h1_dim=len(der) - inner.dim,
        inner_basis=[LinearMap.from_vector(T.dim, v) for v in inner.vectors],
        outer_coset_reps=reps,
    )


def is_inner(T: TruncatedAlgebra, d: LinearMap) -> dict | None:
    """A vector ``a`` with ``R_a = d``, or ``None`` when ``d`` is outer."""
    if not is_derivation(T, d):
        raise NotADerivation("the map does not satisfy the derivation rule")
    n = T.dim
    entries = {}
    for a in range(n):
        for u, v in right_multiplication(T, a).vector().items():
            entries[(u, a)] = v
    M = SparseMatrix(n * n, n, entries)
    rhs = [ZERO] * (n * n)
    for u, v in d.vector().items():
        rhs[u] = v
    try:
        x = solve_affine(M, rhs)
    except NoSolution:
        return None
    return {k: v for k, v in enumerate(x) if v}


def is_complete(T: TruncatedAlgebra) -> dict:
    cz = center(T).dim == 0
    h1 = inner_and_h1(T)
    return {"center_zero": cz, "h1_zero": h1.h1_dim == 0, "complete": cz and h1.h1_dim == 0, "h1_dim": h1.h1_dim}


# --- symbolic derivation families -----------------------------------------------


@dataclass(frozen=True)
class MapRule:
    source: Factor
    terms: tuple
    guard: tuple = ()  # (a, 0, c) meaning a*i + c >= 0

    def covers(self, g) -> tuple[bool, int]:
        if self.source.kind == "extra":
            return g == self.source.value, 0
        if isinstance(g, str):
            return False, 0
        if self.source.kind == "fixed":
            return g == self.source.value, 0
        return all(a * g + c >= 0 for a, _, c in self.guard), g


@dataclass
class SymbolicDerivationFamily:
    """Images ``d(g)`` of generator classes; coefficients are polynomials in the index and the family parameters."""

    params: tuple
    rules: tuple
    ring: object
    name: str = "d"
    attrs: dict = field(default_factory=dict)

    def image(self, g, bindings: Mapping | None = None) -> Element:
        """Concrete image of generator ``g``; unbound coefficients stay in ``self.ring``."""
        R = self.ring
        for r in self.rules:
            ok, i = r.covers(g)
            if not ok:
                continue
            out = []
            for t in r.terms:
                c = t.coeff.subs([(R.gens[0], i)])
                if bindings:
                    c = c.subs([(R.gens[R.symbols.index(Symbol(k))], Q(v)) for k, v in bindings.items()])
                tgt = t.target(i) if isinstance(t.target, Affine) else t.target
                out.append((tgt, c))
            return Element(out)
        return Element()

    def member(self, T: TruncatedAlgebra, bindings: Mapping) -> LinearMap:
        """The truncation of one member: images beyond the level are dropped."""
        return LinearMap.from_images(T, {g: self.image(g, bindings).scalars() for g in T.basis})


def parse_family(text: str, p: Presentation, t: int | None = None, numeric: Mapping | None = None) -> SymbolicDerivationFamily:
    """Parse ``param`` and ``map <generator> -> <sum> [for <guard>]`` lines.

    ``numeric`` substitutes values for presentation parameters so that
    coefficients such as ``alpha2/(beta2-1)`` become polynomials.
    """
    from . import dsl

    t = t if t is not None else p.attrs.get("t", dsl.DEFAULT_T)
    consts = {"t": t}
    if p.attrs.get("n") is not None:
        consts["n"] = p.attrs["n"]
    params: dict = {}
    indexed: dict = {}
    maps = []
    scope0 = dsl._Scope(params, indexed, p.extras, p.family, consts, None)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = dsl._strip_comment(raw).strip()
        scope0.line, scope0.text = lineno, raw
        if not line:
            continue
        word = line.split(None, 1)[0]
        if word == "param":
            dsl._parse_params(line[5:], consts, scope0, params, indexed)
        elif word == "map":
            maps.append((lineno, raw, line[3:]))
        else:
            scope0.error(f"expected 'param' or 'map', got {word!r}", word)
    clash = set(params) & (set(p.param_names) | set(p.extras))
    if clash:
        raise PresentationError(f"family parameters {sorted(clash)} clash with names of {p.name}")
    keep = [n for n in p.param_names if not numeric or n not in numeric]
    R = make_ring(keep + list(params))
    scope = dsl.make_scope(p, R, indexed=indexed, t=t)
    for name in p.param_names:
        scope.params.setdefault(name, None)
    rules = []
    for lineno, raw, body in maps:
        scope.line, scope.text = lineno, raw
        lhs, arrow, rhs = body.partition("->")
        if not arrow:
            scope.error("expected 'map <generator> -> <sum>'", body)
        fac, var = dsl._factor(lhs.strip(), scope, consts)
        varmap = {}
        if var:
            varmap[var] = "i"
            fac = Factor("var", "i")
        guard = []
        pos = dsl._find_for(rhs)
        if pos >= 0:
            guard = dsl._guard(rhs[pos + 5 :], varmap, consts, scope)
            rhs = rhs[:pos]
        if fac.kind != "var" and guard:
            scope.error("only an indexed generator can carry a guard", body)
        terms = dsl._merge_terms(dsl._terms(rhs, varmap, consts, scope, numeric))
        rules.append(MapRule(fac, tuple(terms), tuple(sorted(set(guard)))))
    fam = SymbolicDerivationFamily(params=tuple(params), rules=tuple(rules), ring=R)
    _check_map_disjoint(p, fam)
    return fam


def _check_map_disjoint(p: Presentation, fam: SymbolicDerivationFamily) -> None:
    w = p.family_start + sum(abs(c) for r in fam.rules for _, _, c in r.guard) + 4
    for g in p.generators(w):
        hits = [r for r in fam.rules if r.covers(g)[0]]
        if len(hits) > 1:
            raise PresentationError(f"generator {g!r} is covered by {len(hits)} map lines")


def family_members(fam: SymbolicDerivationFamily, T: TruncatedAlgebra) -> list[LinearMap]:
    """Truncated members obtained by switching on one family parameter at a time."""
    out = []
    for name in fam.params:
        out.append(fam.member(T, {k: (1 if k == name else 0) for k in fam.params}))
    return out


def _sym_map(ctx, p: Presentation, fam: SymbolicDerivationFamily, g) -> dict:
    from .symbolic import const_form, fadd, fscale

    out: dict = {}
    for r in fam.rules:
        if r.source.kind == "extra":
            if g != r.source.value:
                continue
            fi = const_form(0)
        elif isinstance(g, str):
            continue
        elif r.source.kind == "fixed":
            if not ctx.eq(g, const_form(r.source.value)):
                continue
            fi = const_form(0)
        else:
            if not all(ctx.ge0(fadd(fscale(g, a), const_form(c))) for a, _, c in r.guard):
                continue
            fi = g
        for t in r.terms:
            c = ctx.coeff_at(t.coeff, fi, const_form(0))
            if not c:
                continue
            if isinstance(t.target, Affine):
                key = fadd(fscale(fi, t.target.ai), const_form(t.target.c))
                if not ctx.ge0(fadd(key, const_form(-p.family_start))):
                    raise PresentationError(f"map produces an index below the family start at {key}")
            else:
                key = t.target
            out[key] = out.get(key, 0) + c
        break
    return {k: v for k, v in out.items() if v}


def _sym_apply(ctx, p, fam, elem: dict) -> dict:
    from .symbolic import sym_add, sym_scale

    out: dict = {}
    for g, c in elem.items():
        out = sym_add(out, sym_scale(_sym_map(ctx, p, fam, g), c))
    return out


def _der_residual(ctx, p, fam, gens) -> dict:
    """``d([a,b]) - [d a, b] - [a, d b]`` on pattern generators."""
    from .symbolic import sym_add, sym_pair, sym_product

    a, b = ({g: ctx.R.one} for g in gens)
    out = _sym_apply(ctx, p, fam, sym_pair(ctx, p, gens[0], gens[1]))
    out = sym_add(out, sym_product(ctx, p, _sym_apply(ctx, p, fam, a), b), -1)
    out = sym_add(out, sym_product(ctx, p, a, _sym_apply(ctx, p, fam, b)), -1)
    return out


def _concrete_residual(p: Presentation, fam: SymbolicDerivationFamily, g, h) -> Element:
    R = fam.ring

    def conv(e: Element) -> Element:
        return e.map_coeffs(lambda c: c.set_ring(R) if hasattr(c, "set_ring") else R(c))

    def prod(u: Element, v: Element) -> Element:
        out = Element()
        for x, cx in u.items():
            for y, cy in v.items():
                out = out + conv(p.pair(x, y)).scale(cx * cy)
        return out

    def apply(u: Element) -> Element:
        out = Element()
        for x, cx in u.items():
            out = out + fam.image(x).scale(cx)
        return out

    one = R.one
    A, B = Element({g: one}), Element({h: one})
    return apply(prod(A, B)) - prod(apply(A), B) - prod(A, apply(B))


def verify_family(p: Presentation, fam: SymbolicDerivationFamily):
    """Prove the derivation rule identically in the indices and in all parameters."""
    from .symbolic import Unsupported, Verdict, check_branches, concretize, engine_ring, run_shape, shapes, slot_gens

    if p.family_end is not None:
        gens = p.generators(p.family_end)
        for g in gens:
            for h in gens:
                r = _concrete_residual(p, fam, g, h)
                if r:
                    return Verdict("Refuted", triple=(g, h), residual=r, cases=len(gens) ** 2)
        return Verdict("Proved", cases=len(gens) ** 2)
    R = engine_ring(p.param_names, [str(s) for s in fam.ring.symbols[2:]])
    cases = 0
    try:
        for slots in shapes(p, 2):
            branches = run_shape(p, slots, lambda ctx, gens: _der_residual(ctx, p, fam, gens), R)
            cases += len(branches)
            forms = slot_gens(slots)

            def check(pt, forms=forms):
                g, h = (concretize(f, pt) for f in forms)
                r = _concrete_residual(p, fam, g, h)
                return ((g, h), r) if r else None

            v = check_branches(branches, check, None)
            if v.status != "Proved":
                v.cases = cases
                v.details["shape"] = list(slots)
                return v
    except Unsupported as e:
        return Verdict("Inconclusive", reason=str(e), cases=cases)
    return Verdict("Proved", cases=cases)
