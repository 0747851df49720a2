"""Symbolic evaluation of products over generator *patterns*.

A pattern slot stands for "any family generator ``e_v``"; up to three slots
carry integer variables ``v1, v2, v3``.  Which rule applies to a product of
patterns depends on comparisons between indices, so evaluation keeps a
difference-bound matrix (constraints ``v_s - v_r >= d`` between the nodes
``0, v1, v2, v3``) and splits the computation lazily whenever a comparison is
not yet decided.  Each finished branch yields a result with targets indexed by
affine forms in the ``v``'s and coefficients that are polynomials in the
``v``'s and the parameters.

Every product in the two-free-index language with unit-coefficient guards is
decided this way; other comparisons end the branch as unsupported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Callable, Iterable, Sequence

from sympy import QQ
from sympy.polys.rings import ring

from .presentation import (
    Affine,
    Element,
    Presentation,
    PresentationError,
    ProductRule,
)

NEG = float("-inf")
NODES = 4  # node 0 is the constant zero
VARS = ("v1", "v2", "v3")


class Unsupported(Exception):
    """A comparison or target outside the decidable fragment."""


class _Split(Exception):
    def __init__(self, alternatives):
        self.alternatives = alternatives


# --- affine forms -----------------------------------------------------------
# An index form is a tuple (c, a1, a2, a3) meaning c + a1*v1 + a2*v2 + a3*v3.


def const_form(c: int) -> tuple:
    return (c, 0, 0, 0)


def var_form(r: int) -> tuple:
    f = [0, 0, 0, 0]
    f[r] = 1
    return tuple(f)


def fadd(a, b, k=1) -> tuple:
    return tuple(x + k * y for x, y in zip(a, b))


def fscale(a, k) -> tuple:
    return tuple(k * x for x in a)


def is_const(f) -> bool:
    return not any(f[1:])


# --- difference-bound matrices ----------------------------------------------


@dataclass(frozen=True)
class DBM:
    """``lo[r][s]`` is a lower bound on ``v_s - v_r`` (node 0 is the value 0)."""

    lo: tuple

    @classmethod
    def top(cls) -> "DBM":
        lo = [[NEG] * NODES for _ in range(NODES)]
        for r in range(NODES):
            lo[r][r] = 0
        return cls(tuple(tuple(row) for row in lo))

    def add(self, r: int, s: int, d) -> "DBM | None":
        """Add ``v_s - v_r >= d``; ``None`` if the system becomes infeasible."""
        lo = [list(row) for row in self.lo]
        if d <= lo[r][s]:
            return self
        lo[r][s] = d
        for k in (r, s):
            for a in range(NODES):
                for b in range(NODES):
                    if lo[a][k] + lo[k][b] > lo[a][b]:
                        lo[a][b] = lo[a][k] + lo[k][b]
        # a second full pass keeps the matrix closed for chains through both ends
        for k in range(NODES):
            for a in range(NODES):
                for b in range(NODES):
                    if lo[a][k] + lo[k][b] > lo[a][b]:
                        lo[a][b] = lo[a][k] + lo[k][b]
        if any(lo[a][a] > 0 for a in range(NODES)):
            return None
        return DBM(tuple(tuple(row) for row in lo))

    def implies(self, r: int, s: int, d):
        """True / False / None for ``v_s - v_r >= d``."""
        if self.lo[r][s] >= d:
            return True
        if -self.lo[s][r] < d:
            return False
        return None

    def pinned(self, r: int, s: int):
        a, b = self.lo[r][s], self.lo[s][r]
        if a != NEG and b != NEG and a == -b:
            return int(a)
        return None

    def value_bounds(self, r: int):
        lo = self.lo[0][r]
        hi = -self.lo[r][0]
        return (None if lo == NEG else int(lo)), (None if hi == float("inf") else int(hi))

    def point(self, offsets=(0, 0, 0)):
        """A candidate integer point: least values shifted by ``offsets``; ``None`` if infeasible."""
        vals = [0]
        d = self
        for r in range(1, NODES):
            lo = d.lo[0][r]
            base = 0 if lo == NEG else int(lo)
            v = base + offsets[r - 1]
            d2 = d.add(0, r, v)
            d2 = d2.add(r, 0, -v) if d2 is not None else None
            if d2 is None:
                return None
            d = d2
            vals.append(v)
        return vals[1:]


def form_constraint(f) -> tuple[int, int, int]:
    """Rewrite ``f >= 0`` as ``v_s - v_r >= d``; raise :class:`Unsupported` otherwise."""
    c = f[0]
    nz = [(r, a) for r, a in enumerate(f[1:], 1) if a]
    if not nz:
        raise ValueError("constant form")
    if len(nz) == 1:
        r, a = nz[0]
        if a == 1:
            return 0, r, -c
        if a == -1:
            return r, 0, -c
    if len(nz) == 2:
        (r1, a1), (r2, a2) = nz
        if a1 == 1 and a2 == -1:
            return r2, r1, -c
        if a1 == -1 and a2 == 1:
            return r1, r2, -c
    raise Unsupported(f"comparison of {f} is not a difference constraint")


# --- evaluation context -----------------------------------------------------


def engine_ring(*param_lists: Iterable[str]):
    names = ["i", "j", *VARS]
    for pl in param_lists:
        for n in pl:
            if n not in names:
                names.append(n)
    R, *_ = ring(",".join(names), QQ)
    return R


class Ctx:
    """One branch of a case-split evaluation."""

    def __init__(self, dbm: DBM, R, start: int):
        self.dbm = dbm
        self.R = R
        self.start = start
        self._conv: dict = {}

    # comparisons
    def ge0(self, f) -> bool:
        """Decide ``f >= 0`` in this branch, splitting if it is undetermined."""
        if is_const(f):
            return f[0] >= 0
        r, s, d = form_constraint(f)
        v = self.dbm.implies(r, s, d)
        if v is None:
            raise _Split([[(r, s, d)], [(s, r, 1 - d)]])
        return v

    def eq(self, f, g) -> bool:
        d = fadd(f, g, -1)
        return self.ge0(d) and self.ge0(fscale(d, -1))

    # polynomial helpers
    def form_poly(self, f):
        R = self.R
        out = R(f[0])
        for r in range(1, NODES):
            if f[r]:
                out += f[r] * R.gens[1 + r]
        return out

    def convert(self, poly):
        key = (id(poly.ring), poly)
        c = self._conv.get(key)
        if c is None:
            c = poly.set_ring(self.R)
            self._conv[key] = c
        return c

    def coeff_at(self, poly, fi, fj):
        c = self.convert(poly)
        R = self.R
        if not any(m[0] or m[1] for m in c.monoms()):
            return c
        return c.compose([(R.gens[0], self.form_poly(fi)), (R.gens[1], self.form_poly(fj))])


def _shape(g) -> str:
    return g if isinstance(g, str) else "e"


ZERO_FORM = const_form(0)


def match_rule(ctx: Ctx, p: Presentation, rules: Sequence[ProductRule], g, h):
    """The rule applying to the pattern pair ``(g, h)`` in this branch, with bound forms."""
    for r in rules:
        fi = fj = ZERO_FORM
        ok = True
        for fac, x in ((r.left, g), (r.right, h)):
            if fac.kind == "extra":
                ok = x == fac.value
            elif isinstance(x, str):
                ok = False
            elif fac.kind == "fixed":
                ok = ctx.eq(x, const_form(fac.value))
            if not ok:
                break
        if not ok:
            continue
        if r.left.kind == "var":
            fi = g
        if r.right.kind == "var":
            fj = h
        if all(ctx.ge0(fadd(fadd(fscale(fi, a), fscale(fj, b)), const_form(c))) for a, b, c in r.guard):
            return r, fi, fj
    return None


def sym_pair(ctx: Ctx, p: Presentation, g, h, rules=None) -> dict:
    """Product of two pattern generators as ``{key: coeff}``; keys are forms or extra names."""
    if rules is None:
        rules = p._rule_index.get((_shape(g), _shape(h)), ())
    m = match_rule(ctx, p, rules, g, h)
    if m is None:
        return {}
    r, fi, fj = m
    out: dict = {}
    for t in r.terms:
        c = ctx.coeff_at(t.coeff, fi, fj)
        if not c:
            continue
        if isinstance(t.target, Affine):
            key = fadd(fadd(fscale(fi, t.target.ai), fscale(fj, t.target.aj)), const_form(t.target.c))
            if not ctx.ge0(fadd(key, const_form(-p.family_start))):
                raise PresentationError(f"rule produces an index below the family start at {key}")
        else:
            key = t.target
        out[key] = out.get(key, 0) + c
    return {k: v for k, v in out.items() if v}


def sym_add(a: dict, b: dict, k=1) -> dict:
    out = dict(a)
    for key, v in b.items():
        out[key] = out.get(key, 0) + (v if k == 1 else k * v)
    return {key: v for key, v in out.items() if v}


def sym_scale(a: dict, c) -> dict:
    return {k: c * v for k, v in a.items() if c * v}


def sym_product(ctx: Ctx, p: Presentation, a: dict, b: dict) -> dict:
    out: dict = {}
    for g, ca in a.items():
        for h, cb in b.items():
            for k, v in sym_pair(ctx, p, g, h).items():
                out[k] = out.get(k, 0) + ca * cb * v
    return {k: v for k, v in out.items() if v}


# --- branch exploration -----------------------------------------------------


@dataclass
class Branch:
    dbm: DBM
    value: object = None
    error: str | None = None


def explore(fn: Callable[[Ctx], object], base: DBM, R, start: int, limit: int = 20000) -> list[Branch]:
    """Run ``fn`` on every consistent refinement of ``base`` that it asks for."""
    out: list[Branch] = []
    stack = [base]
    steps = 0
    while stack:
        steps += 1
        if steps > limit:
            raise Unsupported("too many case splits")
        d = stack.pop()
        ctx = Ctx(d, R, start)
        try:
            out.append(Branch(d, fn(ctx)))
        except _Split as s:
            for alt in reversed(s.alternatives):
                nd = d
                for r, t, c in alt:
                    nd = nd.add(r, t, c) if nd is not None else None
                if nd is not None:
                    stack.append(nd)
        except Unsupported as e:
            out.append(Branch(d, None, str(e)))
    return out


def slot_base(slots: Sequence, start: int) -> DBM:
    d = DBM.top()
    for r, s in enumerate(slots, 1):
        if s == "e":
            d = d.add(0, r, start)
    return d


def slot_gens(slots: Sequence) -> list:
    return [var_form(r) if s == "e" else s for r, s in enumerate(slots, 1)]


def shapes(p: Presentation, arity: int) -> list[tuple]:
    kinds = ["e", *p.extras]
    return list(iproduct(kinds, repeat=arity))


# --- canonical residuals ----------------------------------------------------


def substitution(dbm: DBM) -> dict:
    """Variables forced by the branch: ``{r: form}`` expressing v_r in earlier terms."""
    sub = {}
    for r in range(1, NODES):
        v = dbm.pinned(0, r)
        if v is not None:
            sub[r] = const_form(v)
            continue
        for s in range(1, r):
            d = dbm.pinned(s, r)
            if d is not None:
                base = sub.get(s, var_form(s))
                sub[r] = fadd(base, const_form(d))
                break
    return sub


def apply_sub_form(f, sub) -> tuple:
    out = (f[0], 0, 0, 0)
    for r in range(1, NODES):
        if f[r]:
            out = fadd(out, fscale(sub.get(r, var_form(r)), f[r]))
    return out


def apply_sub_poly(ctx: Ctx, c, sub):
    if not sub:
        return c
    R = ctx.R
    return c.compose([(R.gens[1 + r], ctx.form_poly(f)) for r, f in sub.items()])


def canonical(ctx: Ctx, elem: dict) -> dict:
    sub = substitution(ctx.dbm)
    out: dict = {}
    for k, v in elem.items():
        k2 = apply_sub_form(k, sub) if isinstance(k, tuple) else k
        v2 = apply_sub_poly(ctx, v, sub)
        out[k2] = out.get(k2, 0) + v2
    return {k: v for k, v in out.items() if v}


def separate(ctx: Ctx, elem: dict) -> dict:
    """Split until distinct index forms of ``elem`` are provably distinct, then canonicalize."""
    while True:
        elem = canonical(ctx, elem)
        keys = [k for k in elem if isinstance(k, tuple)]
        changed = False
        for a in range(len(keys)):
            for b in range(a + 1, len(keys)):
                d = fadd(keys[a], keys[b], -1)
                if is_const(d):
                    continue
                if ctx.ge0(d) and ctx.ge0(fscale(d, -1)):
                    changed = True
        if not changed:
            return elem


def pin_bounded(ctx: Ctx, elem: dict, width: int = 64) -> None:
    """Split bounded-but-free variables into single values so polynomial tests are exact."""
    used = set()
    for k, v in elem.items():
        if isinstance(k, tuple):
            used.update(r for r in range(1, NODES) if k[r])
        for m in v.monoms():
            used.update(r for r in range(1, NODES) if m[1 + r])
    sub = substitution(ctx.dbm)
    for r in sorted(used):
        if r in sub:
            continue
        for s in range(0, NODES):
            if s == r:
                continue
            lo, up = ctx.dbm.lo[s][r], -ctx.dbm.lo[r][s]
            if lo != NEG and up != float("inf") and up - lo <= width and lo != up:
                raise _Split([[(r, s, -int(lo))], [(s, r, int(lo) + 1)]])


# --- verdicts ---------------------------------------------------------------


@dataclass
class Verdict:
    status: str  # "Proved" | "Refuted" | "Inconclusive"
    triple: tuple | None = None
    residual: Element | None = None
    reason: str = ""
    cases: int = 0
    details: dict = field(default_factory=dict)

    @property
    def proved(self) -> bool:
        return self.status == "Proved"

    def to_json(self) -> dict:
        out = {"status": self.status, "cases": self.cases}
        if self.triple is not None:
            out["counterexample"] = [str(g) for g in self.triple]
        if self.residual is not None:
            out["residual"] = repr(self.residual)
        if self.reason:
            out["reason"] = self.reason
        return out


def search_point(ctx: Ctx, residual: dict, radius: int = 6):
    """An integer point of the branch where some residual coefficient is nonzero."""
    R = ctx.R
    nv = 3
    for total in range(0, 3 * radius + 1):
        for offs in iproduct(range(radius + 1), repeat=nv):
            if sum(offs) != total:
                continue
            pt = ctx.dbm.point(offs)
            if pt is None:
                continue
            subs = [(R.gens[2 + r], pt[r]) for r in range(nv)]
            for v in residual.values():
                if v.subs(subs):
                    return pt
    return None


def concretize(g, pt):
    if isinstance(g, str):
        return g
    return g[0] + sum(g[r] * pt[r - 1] for r in range(1, NODES))


def check_branches(
    branches: list[Branch],
    concrete_check: Callable[[list[int]], tuple[tuple, Element] | None],
    slots_gens: Sequence,
) -> Verdict:
    """Aggregate branch residuals into a verdict, confirming failures concretely."""
    inconclusive = None
    for b in branches:
        if b.error:
            inconclusive = inconclusive or b.error
            continue
        ctx, residual = b.value
        if not residual:
            continue
        pt = search_point(ctx, residual)
        if pt is None:
            inconclusive = inconclusive or "nonzero residual without a concrete witness"
            continue
        hit = concrete_check(pt)
        if hit is None:
            inconclusive = inconclusive or "symbolic and concrete evaluation disagree"
            continue
        triple, res = hit
        return Verdict("Refuted", triple=triple, residual=res, cases=len(branches))
    if inconclusive:
        return Verdict("Inconclusive", reason=inconclusive, cases=len(branches))
    return Verdict("Proved", cases=len(branches))


def run_shape(
    p: Presentation,
    slots: Sequence,
    body: Callable[[Ctx, list], dict],
    R,
    base: DBM | None = None,
) -> list[Branch]:
    """Evaluate ``body`` on pattern generators for ``slots`` and return residual branches."""
    gens = slot_gens(slots)
    base = base or slot_base(slots, p.family_start)

    def fn(ctx: Ctx):
        res = body(ctx, gens)
        res = separate(ctx, res)
        if res:
            pin_bounded(ctx, res)
        return ctx, res

    return explore(fn, base, R, p.family_start)
