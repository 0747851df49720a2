"""Lower central and derived series of the infinite algebra.

Subspaces are held as ``span(F) + Tail(m)`` where ``Tail(m)`` is spanned by
all family generators ``e_j`` with ``j >= m`` and ``F`` is a finite set of
vectors supported below ``m``.  Products of such subspaces are computed by
bilinearity: finitely many concrete products, one-parameter families
``v * e_j`` (or ``e_i * v``) for large indices, and the two-variable region
where both factors are deep in the tail.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .exactla import ONE, Q, SubspaceBasis, ZERO, qstr
from .presentation import Affine, Presentation, PresentationError, as_scalar, gen_name

PROVED, REFUTED, INCONCLUSIVE = "Proved", "Refuted", "Inconclusive"
LOWER_CENTRAL, DERIVED = "lower_central", "derived"


class UnsupportedRule(PresentationError):
    """A rule whose image of a tail cannot be written as ``span(F) + Tail(m)``."""


# --- coordinates --------------------------------------------------------------


def _col(p: Presentation, g) -> int:
    if isinstance(g, str):
        return p.extras.index(g)
    return len(p.extras) + g - p.family_start


def _gen(p: Presentation, col: int):
    E = len(p.extras)
    return p.extras[col] if col < E else col - E + p.family_start


def _ambient(p: Presentation, vecs: Iterable[Mapping]) -> int:
    top = p.family_start
    for v in vecs:
        for g in v:
            if isinstance(g, int):
                top = max(top, g)
    return len(p.extras) + top - p.family_start + 1


@dataclass(frozen=True)
class TailSubspace:
    """``span(vectors) + Tail(tail)``; vectors are in RREF and supported below the tail."""

    vectors: tuple  # tuple of tuples ((gen, scalar), ...)
    tail: int | None
    layout: tuple  # (extras, family_start, family_end)

    @property
    def tail_start(self):
        return self.tail

    def finite(self) -> list[dict]:
        return [dict(v) for v in self.vectors]

    @property
    def finite_part(self) -> SubspaceBasis:
        p = _Layout(*self.layout)
        vecs = self.finite()
        n = _ambient(p, vecs)
        return SubspaceBasis(n, tuple({_col(p, g): c for g, c in v.items()} for v in vecs))

    @property
    def extra_part(self) -> SubspaceBasis:
        """Projection of the finite part onto the extra generators."""
        extras = self.layout[0]
        vecs = [{extras.index(g): c for g, c in v.items() if isinstance(g, str)} for v in self.finite()]
        return SubspaceBasis.span(len(extras), vecs)

    @property
    def is_zero(self) -> bool:
        return not self.vectors and self.tail is None

    @property
    def is_pure_tail(self) -> bool:
        return not self.vectors and self.tail is not None

    def max_support(self) -> int | None:
        idx = [g for v in self.vectors for g, _ in v if isinstance(g, int)]
        return max(idx) if idx else None

    def window_dim(self, W: int) -> int:
        """Dimension of the image modulo ``Tail(W)``; needs ``W`` above the tail and all supports."""
        d = len(self.vectors)
        if self.tail is not None:
            d += max(0, W - self.tail)
        return d

    def contains_vector(self, vec: Mapping) -> bool:
        p = _Layout(*self.layout)
        v = {g: c for g, c in vec.items() if c and not (self.tail is not None and isinstance(g, int) and g >= self.tail)}
        if not v:
            return True
        vecs = self.finite() + [v]
        n = _ambient(p, vecs)
        B = SubspaceBasis(n, tuple({_col(p, g): c for g, c in w.items()} for w in self.finite()))
        return B.contains({_col(p, g): c for g, c in v.items()})

    def contains(self, other: "TailSubspace") -> bool:
        if other.tail is not None and (self.tail is None or self.tail > other.tail):
            return False
        return all(self.contains_vector(v) for v in other.finite())

    def __str__(self):
        fam = "e"
        parts = []
        if self.tail is not None:
            parts.append(f"Tail({self.tail})")
        for v in self.vectors:
            parts.append(" + ".join(_term(g, c, fam) for g, c in v))
        if not parts:
            return "0"
        if len(parts) == 1 and self.tail is not None:
            return parts[0]
        head = parts[0] if self.tail is not None else None
        rest = parts[1:] if self.tail is not None else parts
        body = "span{" + ", ".join(rest) + "}"
        return f"{head} + {body}" if head else body

    def to_json(self) -> dict:
        return {
            "tail_start": self.tail,
            "finite": [{gen_name(g): qstr(c) for g, c in v} for v in self.vectors],
        }


def _term(g, c, fam):
    name = gen_name(g, fam)
    return name if c == 1 else f"({qstr(c)})*{name}"


@dataclass(frozen=True)
class _Layout:
    extras: tuple
    family_start: int
    family_end: int | None


def _layout(p: Presentation) -> tuple:
    return (p.extras, p.family_start, p.family_end)


def make_subspace(p: Presentation, vectors: Iterable[Mapping], tail: int | None) -> TailSubspace:
    """Canonical form: minimal tail, finite part reduced below it and in RREF."""
    if p.family_end is not None:
        # a finite family has no tails; spell them out
        vecs = [dict(v) for v in vectors]
        if tail is not None:
            vecs += [{k: ONE} for k in range(max(tail, p.family_start), p.family_end + 1)]
        tail = None
    else:
        vecs = [dict(v) for v in vectors]
        if tail is not None and tail < p.family_start:
            tail = p.family_start
    while True:
        cut = [
            {g: Q(c) for g, c in v.items() if c and not (tail is not None and isinstance(g, int) and g >= tail)}
            for v in vecs
        ]
        n = _ambient(p, cut + ([{tail: 1}] if tail is not None else []))
        B = SubspaceBasis.span(n, [{_col(p, g): c for g, c in v.items()} for v in cut])
        if tail is not None and tail > p.family_start and B.contains({_col(p, tail - 1): ONE}):
            tail -= 1
            vecs = [{_gen(p, k): c for k, c in row.items()} for row in B.vectors]
            continue
        rows = tuple(tuple((_gen(p, k), c) for k, c in sorted(row.items())) for row in B.vectors)
        return TailSubspace(rows, tail, _layout(p))


def whole(p: Presentation) -> TailSubspace:
    vecs = [{x: ONE} for x in p.extras]
    return make_subspace(p, vecs, p.family_start)


def zero(p: Presentation) -> TailSubspace:
    return make_subspace(p, [], None)


# --- products -----------------------------------------------------------------


def _scal(c):
    return as_scalar(c)


def _concrete(p: Presentation, u: Mapping, v: Mapping) -> dict:
    out: dict = {}
    for g, a in u.items():
        for h, b in v.items():
            for k, c in p.pair(g, h).items():
                out[k] = out.get(k, ZERO) + a * b * _scal(c)
    return {k: c for k, c in out.items() if c}


def _max_const(p: Presentation) -> int:
    m = abs(p.family_start)
    for r in p.eval_rules:
        for f in (r.left, r.right):
            if f.kind == "fixed":
                m = max(m, abs(f.value))
        for _, _, c in r.guard:
            m = max(m, abs(c))
        for t in r.terms:
            if isinstance(t.target, Affine):
                m = max(m, abs(t.target.c))
    return m


def _family(p: Presentation, vec: Mapping, side: str) -> dict:
    """One-parameter family ``vec * e_n`` (side ``"right"``) or ``e_n * vec`` for large ``n``.

    Returns ``{key: poly in j}`` with keys ``("v", s)`` for target ``e_{n+s}``
    and ``("c", g)`` for a fixed target ``g``.
    """
    R = p.ring
    I, J = R.gens[0], R.gens[1]
    out: dict = {}
    for g, a in vec.items():
        for r in p.eval_rules:
            fixed_f, var_f = (r.left, r.right) if side == "right" else (r.right, r.left)
            if var_f.kind != "var":
                continue
            if fixed_f.kind == "extra":
                if g != fixed_f.value:
                    continue
                gi = 0
            elif isinstance(g, str):
                continue
            elif fixed_f.kind == "fixed":
                if g != fixed_f.value:
                    continue
                gi = 0
            else:
                gi = g
            # guard as a function of n: alpha*n + beta >= 0, eventually constant
            ok = True
            for ga, gb, gc in r.guard:
                alpha, beta = (gb, ga * gi + gc) if side == "right" else (ga, gb * gi + gc)
                if alpha > 0:
                    continue
                if alpha < 0:
                    ok = False
                    break
                if beta < 0:
                    ok = False
                    break
            if not ok:
                continue
            for t in r.terms:
                if side == "right":
                    c = t.coeff.subs([(I, gi)]) if gi else t.coeff.subs([(I, 0)])
                else:
                    c = t.coeff.subs([(J, gi)]).compose(I, J)
                if fixed_f.kind != "var":
                    # the fixed side does not bind an index
                    pass
                if isinstance(t.target, Affine):
                    slope = t.target.aj if side == "right" else t.target.ai
                    const = (t.target.ai if side == "right" else t.target.aj) * gi + t.target.c
                    if slope == 0:
                        key = ("c", const)
                    elif slope == 1:
                        key = ("v", const)
                    else:
                        raise UnsupportedRule(f"target slope {slope} in a rule image of a tail")
                else:
                    key = ("c", t.target)
                out[key] = out.get(key, R.zero) + c * a
            break
    return {k: c for k, c in out.items() if c}


def _eval(c, n: int):
    R = c.ring
    return _scal(c.subs([(R.gens[1], n)]))


def _cauchy(c) -> int:
    """An integer bound above every real root of the univariate polynomial ``c``."""
    coeffs = {m[1]: Fraction(int(v.numerator), int(v.denominator)) for m, v in c.terms()}
    d = max(coeffs)
    if d == 0:
        return -(10**9)
    lead = abs(coeffs[d])
    return int(1 + max(abs(v) / lead for k, v in coeffs.items() if k != d)) + 1 if len(coeffs) > 1 else 1


def _monomial_vectors(fam: dict, keys_filter=None) -> list[dict]:
    """Coefficient vectors of ``j^d`` for the constant-target part of a family."""
    by_deg: dict = {}
    for key, c in fam.items():
        if key[0] != "c":
            continue
        for m, v in c.terms():
            by_deg.setdefault(m, {})[key[1]] = Q(v)
    return [v for _, v in sorted(by_deg.items())]


def _region_vectors(p: Presentation, J: int, rule) -> list[dict]:
    """Span of ``[e_i, e_j]`` over ``i, j >= J`` for one two-index rule."""
    R = p.ring
    I, Jg = R.gens[0], R.gens[1]
    lo, hi = None, None
    for a, b, c in rule.guard:
        if a >= 0 and b >= 0:
            continue
        if a <= 0 and b <= 0:
            return []
        if a == 1 and b == -1:
            hi = c if hi is None else min(hi, c)
        elif a == -1 and b == 1:
            lo = -c if lo is None else max(lo, -c)
    if lo is not None and hi is not None and lo > hi:
        return []
    terms = rule.terms
    for t in terms:
        if isinstance(t.target, Affine) and (t.target.ai or t.target.aj):
            raise UnsupportedRule("a two-index rule with an index-dependent target acts on a tail")
    out = []
    if lo is not None and hi is not None:
        for d in range(lo, hi + 1):
            fam = {("c", t.target.c if isinstance(t.target, Affine) else t.target): t.coeff.compose(Jg, I + d).compose(I, Jg) for t in terms}
            out += _monomial_vectors({k: v for k, v in fam.items() if v})
        return out
    by_mon: dict = {}
    for t in terms:
        key = t.target.c if isinstance(t.target, Affine) else t.target
        for m, v in t.coeff.terms():
            by_mon.setdefault(m, {})[key] = by_mon.get(m, {}).get(key, ZERO) + Q(v)
    return [v for _, v in sorted(by_mon.items())]


def span_product(p: Presentation, A: TailSubspace, B: TailSubspace) -> TailSubspace:
    """The span of all products ``[a, b]`` with ``a`` in A and ``b`` in B."""
    if not p.is_bound:
        raise PresentationError("bind the parameters before computing series")
    Af, Bf = A.finite(), B.finite()
    concrete: list[dict] = []
    for u in Af:
        for v in Bf:
            w = _concrete(p, u, v)
            if w:
                concrete.append(w)
    if A.tail is None and B.tail is None:
        return make_subspace(p, concrete, None)

    K = _max_const(p)
    supp = [g for v in Af + Bf for g in v if isinstance(g, int)]
    J = max([A.tail or 0, B.tail or 0, p.family_start] + [max(supp, default=0) + 2 * K + 3])

    families: list[dict] = []
    if B.tail is not None:
        for u in Af:
            families.append((u, "right", _family(p, u, "right"), B.tail))
        if A.tail is not None:
            for i in range(A.tail, J):
                families.append(({i: ONE}, "right", _family(p, {i: ONE}, "right"), B.tail))
    if A.tail is not None:
        for v in Bf:
            families.append((v, "left", _family(p, v, "left"), A.tail))
        if B.tail is not None:
            for j in range(B.tail, J):
                families.append(({j: ONE}, "left", _family(p, {j: ONE}, "left"), A.tail))
    # products with the variable index below J are concrete
    for base, side, _, start in families:
        for n in range(start, J):
            w = _concrete(p, base, {n: ONE}) if side == "right" else _concrete(p, {n: ONE}, base)
            if w:
                concrete.append(w)
    if A.tail is not None and B.tail is not None:
        for r in p.eval_rules:
            if r.left.kind == "var" and r.right.kind == "var":
                concrete += _region_vectors(p, J, r)

    tails = []
    multi = []
    for base, side, fam, _ in families:
        if not fam:
            continue
        if len(fam) == 1 and next(iter(fam))[0] == "v":
            (key, c), = fam.items()
            s = key[1]
            bound = max(J, _cauchy(c))
            for n in range(J, bound):
                if _eval(c, n):
                    concrete.append({n + s: ONE})
            tails.append(bound + s)
        else:
            multi.append(fam)
    m_star = min(tails) if tails else None
    for fam in multi:
        var_shifts = [k[1] for k in fam if k[0] == "v"]
        if var_shifts and m_star is None:
            raise UnsupportedRule("a tail image is a multi-term family with no single-term rule to absorb it")
        lo = J
        if var_shifts:
            hi = max(J, m_star - min(var_shifts))
            for n in range(lo, hi):
                w = _fam_at(fam, n)
                if w:
                    concrete.append(w)
            lo = hi
        concrete += _monomial_vectors(fam)
    return make_subspace(p, concrete, m_star)


def _fam_at(fam: dict, n: int) -> dict:
    out: dict = {}
    for key, c in fam.items():
        v = _eval(c, n)
        if not v:
            continue
        g = n + key[1] if key[0] == "v" else key[1]
        out[g] = out.get(g, ZERO) + v
    return {g: v for g, v in out.items() if v}


# --- series -------------------------------------------------------------------


@dataclass
class Series:
    which: str
    members: list  # TailSubspace, starting with L itself
    fixpoint: bool

    def quotient_dims(self) -> list:
        """``dim(L_k / L_{k+1})`` for consecutive members; None when infinite."""
        return [quotient_dim(a, b) for a, b in zip(self.members, self.members[1:])]

    def codims(self) -> list:
        """``dim(L / L_k)`` counted directly in a window; None when infinite."""
        return [quotient_dim(self.members[0], m) for m in self.members]

    def to_json(self) -> dict:
        return {
            "which": self.which,
            "members": [str(m) for m in self.members],
            "quotient_dims": self.quotient_dims(),
            "fixpoint": self.fixpoint,
        }


def quotient_dim(S: TailSubspace, T: TailSubspace):
    """``dim(S / T)`` for ``T`` inside ``S``; None when infinite."""
    if T.tail is None and S.tail is not None:
        return None
    tops = [x for x in (S.tail, T.tail, S.max_support(), T.max_support()) if x is not None]
    W = max(tops, default=0) + 1
    return S.window_dim(W) - T.window_dim(W)


def series(p: Presentation, which: str = LOWER_CENTRAL, depth: int = 6) -> Series:
    """``L^1 .. L^depth`` (or the derived series), stopping early at a fixpoint."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    L = whole(p)
    out = [L]
    fix = False
    while len(out) < depth:
        cur = out[-1]
        nxt = span_product(p, cur, L if which == LOWER_CENTRAL else cur)
        if nxt == cur:
            fix = True
            break
        out.append(nxt)
        if nxt.is_zero:
            fix = True
            break
    return Series(which, out, fix)


def _shift_certificate(p: Presentation, S: TailSubspace):
    """For lower-central members: ``(delta, exact)`` when ``[Tail(m'), L]`` lies in ``Tail(m' + delta)``
    for every ``m' >= m``, ``exact`` if it is all of ``Tail(m'+delta)``; None otherwise."""
    if not S.is_pure_tail or S.tail < _max_const(p) + 2:
        return None
    m = S.tail
    delta = None
    for r in p.eval_rules:
        if r.left.kind != "var":
            continue
        lo, hi = r.bounds("i")
        if hi is not None and hi < m:
            continue
        if r.right.kind == "var":
            return None
        for t in r.terms:
            if not isinstance(t.target, Affine) or t.target.ai != 1 or t.target.aj != 0:
                return None
            delta = t.target.c if delta is None else min(delta, t.target.c)
    if delta is None or delta < 1:
        return None
    exact = False
    for r in p.eval_rules:
        if r.left.kind != "var" or r.right.kind == "var" or len(r.terms) != 1:
            continue
        t = r.terms[0]
        if t.target.c != delta:
            continue
        lo, hi = r.bounds("i")
        if hi is not None or (lo is not None and lo > m):
            continue
        c = t.coeff.subs([(p.ring.gens[1], 0)])
        if all(_eval_i(c, k) for k in range(m, max(m, _cauchy_i(c)) + 1)):
            exact = True
    return delta, exact


def _eval_i(c, k):
    return _scal(c.subs([(c.ring.gens[0], k)]))


def _cauchy_i(c):
    return _cauchy(c.compose(c.ring.gens[0], c.ring.gens[1]))


def residual_classify(p: Presentation, depth: int = 8) -> dict:
    if depth < 2:
        raise ValueError("depth must be at least 2")
    finite = p.family_end is not None
    lc = series(p, LOWER_CENTRAL, depth)
    dr = series(p, DERIVED, depth)

    def status(s: Series):
        last = s.members[-1]
        if last.is_zero:
            return PROVED, "reaches 0"
        if s.fixpoint:
            return REFUTED, f"nonzero fixpoint {last}"
        return None, None

    rn, why_n = status(lc)
    exact_tails = False
    if rn is None:
        cert = _shift_certificate(p, lc.members[-1])
        if cert:
            rn, why_n = PROVED, f"index shift by {cert[0]} from {lc.members[-1]}"
            exact_tails = cert[1]
        else:
            rn, why_n = INCONCLUSIVE, f"depth {depth} reached at {lc.members[-1]}"
    rs, why_s = status(dr)
    if rs is None:
        if rn == PROVED:
            rs, why_s = PROVED, "derived series lies inside the lower central series"
        else:
            rs, why_s = INCONCLUSIVE, f"depth {depth} reached at {dr.members[-1]}"
    elif rs == REFUTED and rn == PROVED:
        raise AssertionError("inconsistent series verdicts")

    def pro(res, s: Series, tails_ok: bool):
        if res == REFUTED:
            return REFUTED
        codims = s.codims()
        if any(c is None for c in codims):
            return REFUTED
        if res == PROVED and (finite or (not s.members[-1].is_zero and tails_ok)):
            return PROVED
        return INCONCLUSIVE

    def potentially(res, s: Series, tails_ok: bool):
        if res == REFUTED:
            return REFUTED
        q = s.quotient_dims()
        if any(c is None for c in q):
            return REFUTED
        if res == PROVED and (finite or (not s.members[-1].is_zero and tails_ok)):
            return PROVED
        return INCONCLUSIVE

    return {
        "algebra": p.name,
        "residually_nilpotent": rn,
        "residually_solvable": rs,
        "pro_nilpotent": pro(rn, lc, exact_tails),
        "pro_solvable": pro(rs, dr, False),
        "potentially_nilpotent": potentially(rn, lc, exact_tails),
        "potentially_solvable": potentially(rs, dr, False),
        "quotient_dims": lc.quotient_dims(),
        "derived_quotient_dims": dr.quotient_dims(),
        "lower_central": [str(m) for m in lc.members],
        "derived": [str(m) for m in dr.members],
        "evidence": {"lower_central": why_n, "derived": why_s},
    }
