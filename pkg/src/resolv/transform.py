"""Basis changes: conjugating truncated tables and rewriting presentations symbolically.

A change is given by the images of finitely many generators in the old
basis, ``g' = phi(g)``; every other generator is kept.  The new product is
``[a', b']_new = phi^{-1}([phi(a'), phi(b')])``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .exactla import ONE, SparseMatrix, ZERO, inverse, qstr
from .presentation import (
    LIE,
    Affine,
    Element,
    Factor,
    Presentation,
    PresentationError,
    ProductRule,
    Term,
    _swap_rule,
    as_scalar,
    gen_name,
    make_ring,
)
from .quotient import TruncatedAlgebra
from .symbolic import (
    DBM,
    NEG,
    Unsupported,
    Verdict,
    check_branches,
    concretize,
    const_form,
    engine_ring,
    run_shape,
    slot_base,
    slot_gens,
    sym_add,
    sym_pair,
    sym_product,
)


class NotInvertible(ValueError):
    pass


class UnsupportedChange(PresentationError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class BasisChange:
    """``images[g]`` is the new generator ``g'`` written in the old basis."""

    images: Mapping = field(default_factory=dict)

    def image(self, g) -> Element:
        return self.images.get(g, Element.gen(g))

    def modified(self) -> dict:
        return {g: e for g, e in self.images.items() if e != Element.gen(g)}

    def matrix(self, T: TruncatedAlgebra) -> SparseMatrix:
        entries = {}
        for a, g in enumerate(T.basis):
            for c, v in T.vector(self.image(g).scalars()).items():
                entries[(c, a)] = v
        return SparseMatrix(T.dim, T.dim, entries)

    def inverse(self, T: TruncatedAlgebra) -> "BasisChange":
        """The inverse change on the basis window of ``T``."""
        try:
            Pinv = inverse(self.matrix(T))
        except ZeroDivisionError:
            raise NotInvertible("the change is singular on this basis") from None
        images = {}
        for a, g in enumerate(T.basis):
            col = {c: v for (c, b), v in Pinv.entries.items() if b == a}
            images[g] = T.element(col)
        return BasisChange(images)


def apply_change(T: TruncatedAlgebra, ch: BasisChange) -> TruncatedAlgebra:
    """The table of ``T`` in the new basis."""
    P = ch.matrix(T)
    try:
        Pinv = inverse(P)
    except ZeroDivisionError:
        raise NotInvertible("the change is singular on this basis") from None
    n = T.dim
    cols = [dict() for _ in range(n)]
    for (r, c), v in P.entries.items():
        cols[c][r] = v
    inv_cols: dict = {}
    for (r, c), v in Pinv.entries.items():
        inv_cols.setdefault(c, {})[r] = v
    tensor = {}
    for a in range(n):
        for b in range(n):
            w = T.product(cols[a], cols[b])
            out: dict = {}
            for k, x in w.items():
                for r, y in inv_cols.get(k, {}).items():
                    out[r] = out.get(r, ZERO) + x * y
            out = {r: v for r, v in out.items() if v}
            if out:
                tensor[(a, b)] = out
    return replace(T, tensor=tensor)


def diff_tables(A: TruncatedAlgebra, B: TruncatedAlgebra):
    """``"Equal"`` or the list of differing basis pairs with both values."""
    if A.dim != B.dim or A.kind != B.kind:
        raise ShapeMismatch(f"cannot compare a {A.dim}-dim {A.kind} table with a {B.dim}-dim {B.kind} table")
    names = A.names()
    out = []
    for a in range(A.dim):
        for b in range(A.dim):
            x = {k: v for k, v in A.mul(a, b).items() if v}
            y = {k: v for k, v in B.mul(a, b).items() if v}
            if x != y:
                fmt = lambda w: {names[k]: qstr(v) for k, v in sorted(w.items())}
                out.append(((names[a], names[b]), fmt(x), fmt(y)))
    return "Equal" if not out else out


# --- symbolic changes ---------------------------------------------------------


def _inverse_images(ch: BasisChange, R) -> dict:
    """``phi^{-1}(g)`` for each modified ``g`` by a terminating Neumann series."""
    mod = ch.modified()
    diag = {}
    for g, img in mod.items():
        d = img.get(g, 0)
        try:
            d = as_scalar(d)
        except PresentationError:
            raise UnsupportedChange(f"the coefficient of {gen_name(g)} in its image must be a constant") from None
        if not d:
            raise UnsupportedChange(f"the image of {gen_name(g)} does not contain {gen_name(g)}")
        diag[g] = d

    def conv(c):
        return c.set_ring(R) if hasattr(c, "set_ring") else R(c)

    def M(vec: dict) -> dict:
        # M = D^{-1} N, N(g) = img_g - d_g g
        out: dict = {}
        for g, c in vec.items():
            if g not in mod:
                continue
            for h, v in mod[g].items():
                if h == g:
                    continue
                out[h] = out.get(h, 0) + conv(v) * c * (ONE / diag.get(h, ONE))
        return {h: v for h, v in out.items() if v}

    inv = {}
    for g in mod:
        start = {g: R(ONE / diag[g])}
        total = dict(start)
        cur = start
        for k in range(1, len(mod) + 2):
            cur = {h: -v for h, v in M(cur).items()}
            if not cur:
                break
            for h, v in cur.items():
                total[h] = total.get(h, 0) + v
        else:
            raise UnsupportedChange("the off-diagonal part of the change is not nilpotent")
        inv[g] = {h: v for h, v in total.items() if v}
    return inv


def _subst(ctx, g, table: Mapping, fam_keys: Sequence[int]) -> dict:
    """Replace pattern generator ``g`` by ``table[g]`` (keys become constant forms)."""
    if isinstance(g, str):
        if g in table:
            return {_key(h): ctx.convert(v) if hasattr(v, "set_ring") else ctx.R(v) for h, v in table[g].items()}
        return {g: ctx.R.one}
    for k in fam_keys:
        if ctx.eq(g, const_form(k)):
            return {_key(h): ctx.convert(v) if hasattr(v, "set_ring") else ctx.R(v) for h, v in table[k].items()}
    return {g: ctx.R.one}


def _key(h):
    return h if isinstance(h, str) else const_form(h)


def _apply_table(ctx, elem: dict, table, fam_keys) -> dict:
    out: dict = {}
    for g, c in elem.items():
        for h, v in _subst(ctx, g, table, fam_keys).items():
            out[h] = out.get(h, 0) + c * v
    return {h: v for h, v in out.items() if v}


def _canonical_shapes(p: Presentation) -> list:
    kinds = ["e", *p.extras]
    if p.kind != LIE:
        return [(a, b) for a in kinds for b in kinds]
    out = [("e", "e")]
    out += [("e", x) for x in p.extras]
    out += [(x, y) for a, x in enumerate(p.extras) for y in p.extras[a + 1 :]]
    return out


def _base(p: Presentation, slots) -> DBM:
    d = slot_base(slots, p.family_start)
    if p.kind == LIE and slots == ("e", "e"):
        d = d.add(1, 2, 1)
    return d


def _guards(dbm: DBM, slots, start: int, lie_base: bool) -> tuple:
    """Guard triples for the unpinned family slots, with redundant ones pruned."""
    var = [r for r, s in enumerate(slots, 1) if s == "e" and dbm.pinned(0, r) is None]
    coef = {1: (1, 0), 2: (0, 1)}
    cands = []  # (guard, dbm-constraint)
    for r in var:
        lo = dbm.lo[0][r]
        if lo != NEG:
            a, b = coef[r]
            cands.append(((a, b, -int(lo)), (0, r, int(lo))))
        hi = dbm.lo[r][0]
        if hi != NEG:
            a, b = coef[r]
            cands.append(((-a, -b, int(-hi)), (r, 0, int(hi))))
    if len(var) == 2:
        d = dbm.lo[1][2]
        if d != NEG:
            cands.append(((-1, 1, -int(d)), (1, 2, int(d))))
        d = dbm.lo[2][1]
        if d != NEG:
            cands.append(((1, -1, -int(d)), (2, 1, int(d))))
    implicit = DBM.top()
    for r in var:
        implicit = implicit.add(0, r, start)
    kept = list(cands)
    for c in list(cands):
        rest = implicit
        for other in kept:
            if other is c:
                continue
            rest = rest.add(*other[1])
        if rest is not None and rest.implies(*c[1]) is True:
            kept.remove(c)
    return tuple(sorted(g for g, _ in kept))


def _export(p: Presentation, slots, dbm: DBM, ctx, residual: dict, R, out_ring) -> ProductRule:
    factors = []
    for r, s in enumerate(slots, 1):
        if s != "e":
            factors.append(Factor("extra", s))
            continue
        v = dbm.pinned(0, r)
        factors.append(Factor("fixed", v) if v is not None else Factor("var", "i" if r == 1 else "j"))
    Rg = ctx.R
    v1, v2 = Rg.gens[2], Rg.gens[3]
    I, J = Rg.gens[0], Rg.gens[1]
    terms = []
    for key, c in residual.items():
        if isinstance(key, tuple):
            if key[3]:
                raise UnsupportedChange("a third index variable survived in a product")
            tgt = Affine(key[1], key[2], key[0])
        else:
            tgt = key
        c2 = c.compose([(v1, I), (v2, J)]).set_ring(out_ring)
        terms.append(Term(c2, tgt))
    from .dsl import _term_key

    terms.sort(key=_term_key)
    guard = _guards(dbm, slots, p.family_start, False)
    return ProductRule(factors[0], factors[1], tuple(terms), guard)


def _orient(r: ProductRule, R) -> ProductRule:
    """Preferred orientation of a Lie rule: family before extra, index before constant."""
    lk, rk = r.left.kind, r.right.kind
    swap = (lk == "extra" and rk != "extra") or (lk == "fixed" and rk == "var")
    swap = swap or (lk == "fixed" and rk == "fixed" and r.left.value < r.right.value)
    return _swap_rule(r, R) if swap else r


def symbolic_change(p: Presentation, ch: BasisChange, name: str | None = None) -> Presentation:
    """The presentation in the new basis, computed identically in indices and parameters."""
    mod = ch.modified()
    for g, img in mod.items():
        if isinstance(g, int) and not p.in_family(g):
            raise UnsupportedChange(f"{gen_name(g)} is not a generator")
    coeff_names = []
    for img in mod.values():
        for c in img.values():
            if hasattr(c, "ring"):
                coeff_names += [str(s) for s in c.ring.symbols[2:]]
    params = list(p.param_names) + [n for n in dict.fromkeys(coeff_names) if n not in p.param_names]
    R = engine_ring(params)
    out_ring = make_ring(params)
    inv = _inverse_images(ch, R)
    fam_keys = sorted(g for g in mod if isinstance(g, int))
    inv_keys = sorted(g for g in inv if isinstance(g, int))

    def body(ctx, gens):
        a = _apply_table(ctx, {gens[0]: ctx.R.one}, mod, fam_keys)
        b = _apply_table(ctx, {gens[1]: ctx.R.one}, mod, fam_keys)
        prod = sym_product(ctx, p, a, b)
        return _apply_table(ctx, prod, inv, inv_keys)

    rules = []
    try:
        for slots in _canonical_shapes(p):
            for br in run_shape(p, slots, body, R, _base(p, slots)):
                if br.error:
                    raise UnsupportedChange(br.error)
                ctx, res = br.value
                if res:
                    rules.append(_export(p, slots, br.dbm, ctx, res, R, out_ring))
    except Unsupported as e:
        raise UnsupportedChange(str(e)) from None
    if p.kind == LIE:
        rules = [_orient(r, out_ring) for r in rules]
    defaults = dict(p.params)
    q = Presentation(
        name=name or p.name,
        kind=p.kind,
        family_start=p.family_start,
        extras=p.extras,
        params=tuple((n, defaults.get(n)) for n in params),
        rules=tuple(sorted(rules, key=lambda r: r.sort_key(p.extras))),
        family_end=p.family_end,
        family=p.family,
        description=p.description,
        attrs=dict(p.attrs),
    )
    return q


def compare_presentations(p: Presentation, q: Presentation) -> Verdict:
    """Proved when every generator product agrees identically in indices and parameters."""
    if p.kind != q.kind or p.family_start != q.family_start or set(p.extras) != set(q.extras):
        return Verdict("Refuted", reason="different generator sets or kinds")
    R = engine_ring(p.param_names, q.param_names)
    kinds = ["e", *p.extras]
    cases = 0
    for slots in [(a, b) for a in kinds for b in kinds]:

        def body(ctx, gens):
            return sym_add(sym_pair(ctx, p, gens[0], gens[1]), sym_pair(ctx, q, gens[0], gens[1]), -1)

        forms = slot_gens(slots)

        def check(pt, forms=forms):
            g, h = (concretize(f, pt) for f in forms)
            d = _conv(p.pair(g, h), R) - _conv(q.pair(g, h), R)
            return ((g, h), d) if d else None

        try:
            branches = run_shape(p, slots, body, R)
        except Unsupported as e:
            return Verdict("Inconclusive", reason=str(e), cases=cases)
        cases += len(branches)
        v = check_branches(branches, check, None)
        if v.status != "Proved":
            v.cases = cases
            return v
    return Verdict("Proved", cases=cases)


def _conv(e: Element, R) -> Element:
    return e.map_coeffs(lambda c: c.set_ring(R) if hasattr(c, "set_ring") else R(c))


# --- change text ----------------------------------------------------------------

_CHANGE = re.compile(r"^\s*(?:change\s+)?(.+?)'\s*=\s*(.+?)(?:\s+for\s+(\w+)\s+in\s+(.+?)\.\.(.+?))?\s*$")


def parse_change(lines: Sequence[str], p: Presentation, ring=None, numeric=None, consts=None) -> BasisChange:
    """``x' = x + (1/2)*e(3)`` lines, optionally ``for k in lo..hi`` over family generators."""
    from . import dsl

    images = {}
    consts = dict(consts or {})
    consts.setdefault("t", p.attrs.get("t", dsl.DEFAULT_T))
    for line in lines:
        line = dsl._strip_comment(line).strip()
        if not line:
            continue
        m = _CHANGE.match(line)
        if not m:
            raise dsl.DSLSyntaxError(f"bad change {line!r}")
        lhs, rhs, var, lo, hi = m.groups()
        if var:
            scope = dsl.make_scope(p, ring or p.ring, line=0, text=line)
            lo_v = dsl._int_expr(lo, consts, scope)
            hi_v = dsl._int_expr(hi, consts, scope)
            for k in range(lo_v, hi_v + 1):
                sub = lambda s: re.sub(rf"\b{var}\b", str(k), s)
                g = _parse_gen(sub(lhs), p)
                images[g] = dsl.parse_element(sub(rhs), p, ring=ring, numeric=numeric)
            continue
        g = _parse_gen(lhs, p)
        if g in images:
            raise dsl.DSLSyntaxError(f"generator {lhs!r} changed twice in one step")
        images[g] = dsl.parse_element(rhs, p, ring=ring, numeric=numeric)
    return BasisChange(images)


def _parse_gen(text: str, p: Presentation):
    text = text.strip()
    if text in p.extras:
        return text
    m = re.fullmatch(rf"{re.escape(p.family)}\(\s*(-?\d+)\s*\)", text)
    if m and p.in_family(int(m.group(1))):
        return int(m.group(1))
    raise PresentationError(f"{text!r} is not a generator of {p.name}")
