"""Rule-based presentations of algebras on a basis ``{e_i}`` plus extra generators.

A presentation lists the nonzero products of basis generators as *rules*.  A
rule has a left and a right factor, each either a family pattern ``e(i)``
with a free index, a fixed family generator ``e(3)``, or an extra generator
``x``; an optional guard of difference constraints on the free indices; and a
result that is a finite sum of terms ``coeff * e(a*i + b*j + c)`` or
``coeff * x``.  Coefficients are polynomials in the free indices and in the
declared parameters.  Products not covered by any rule are zero.

Family generators are represented by their integer index, extras by their
name, so an :class:`Element` is a finite mapping ``int | str -> coefficient``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import product as iproduct
from typing import Iterable, Iterator, Mapping, Sequence, Union

from sympy import QQ
from sympy.polys.rings import PolyElement, ring

from .exactla import Q, Scalar, qstr

Gen = Union[int, str]

LIE = "lie"
LEIBNIZ = "leibniz"
INDEX_VARS = ("i", "j")
# names used internally by the symbolic engine; not allowed as parameters
RESERVED = {"i", "j", "k", "t", "v1", "v2", "v3", "sum", "of", "for", "and"}


class PresentationError(ValueError):
    """Invalid presentation: overlapping rules, undeclared names, bad bindings."""


class OverlapError(PresentationError):
    pass


class UndeclaredError(PresentationError):
    pass


class ConflictError(PresentationError):
    pass


def gen_sort_key(g: Gen, extras: Sequence[str] = ()) -> tuple:
    if isinstance(g, int):
        return (0, g, "")
    return (1, extras.index(g) if g in extras else len(extras), g)


def gen_name(g: Gen, family: str = "e") -> str:
    return f"{family}{g}" if isinstance(g, int) else g


class Element(Mapping):
    """Finite formal linear combination of generators; zero coefficients are dropped."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | Iterable[tuple[Gen, object]] | None = None):
        acc: dict = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for g, c in items:
                if g in acc:
                    acc[g] = acc[g] + c
                else:
                    acc[g] = c
        self._terms = {g: c for g, c in acc.items() if c}

    @classmethod
    def gen(cls, g: Gen, coeff=1) -> "Element":
        return cls({g: Q(coeff) if isinstance(coeff, int) else coeff})

    def __getitem__(self, g):
        return self._terms[g]

    def get(self, g, default=0):
        return self._terms.get(g, default)

    def __iter__(self) -> Iterator[Gen]:
        return iter(sorted(self._terms, key=gen_sort_key))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, Element):
            return self._terms == other._terms
        if other == 0:
            return not self._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset((g, str(c)) for g, c in self._terms.items()))

    def __add__(self, other: "Element") -> "Element":
        acc = dict(self._terms)
        for g, c in other._terms.items():
            acc[g] = acc[g] + c if g in acc else c
        return Element(acc)

    def __neg__(self) -> "Element":
        return Element({g: -c for g, c in self._terms.items()})

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def scale(self, c) -> "Element":
        if not c:
            return Element()
        return Element({g: c * v for g, v in self._terms.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def max_index(self) -> int | None:
        """The support bound: largest family index carrying a nonzero coefficient."""
        idx = [g for g in self._terms if isinstance(g, int)]
        return max(idx) if idx else None

    def map_coeffs(self, f) -> "Element":
        return Element({g: f(c) for g, c in self._terms.items()})

    def scalars(self) -> "Element":
        """Convert constant polynomial coefficients to plain rationals."""
        return self.map_coeffs(as_scalar)

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for g in self:
            c = self._terms[g]
            cs = qstr(c) if isinstance(c, (Scalar, int)) else str(c)
            parts.append(f"({cs})*{gen_name(g)}")
        return " + ".join(parts)


def as_scalar(c) -> Scalar:
    if isinstance(c, PolyElement):
        if not c.is_ground:
            raise PresentationError(f"coefficient {c} still depends on symbols")
        return Q(c.LC)
    return Q(c)


# --- rules ------------------------------------------------------------------


@dataclass(frozen=True)
class Factor:
    """One side of a rule: ``kind`` is ``"var"`` (value ``"i"``/``"j"``), ``"fixed"`` (int) or ``"extra"``."""

    kind: str
    value: Union[int, str]

    def sort_key(self, extras: Sequence[str]) -> tuple:
        if self.kind == "fixed":
            return (0, self.value)
        if self.kind == "var":
            return (1, 0)
        return (2, extras.index(self.value) if self.value in extras else 99, self.value)

    @property
    def family(self) -> bool:
        return self.kind != "extra"


@dataclass(frozen=True)
class Affine:
    """Index expression ``i*ai + j*aj + c``."""

    ai: int = 0
    aj: int = 0
    c: int = 0

    def __call__(self, i: int = 0, j: int = 0) -> int:
        return self.ai * i + self.aj * j + self.c

    def swap(self) -> "Affine":
        return Affine(self.aj, self.ai, self.c)

    @property
    def is_constant(self) -> bool:
        return not self.ai and not self.aj

    def __str__(self):
        return render_linear([(self.ai, "i"), (self.aj, "j")], self.c)


def render_linear(parts: Sequence[tuple[int, str]], c: int) -> str:
    out = ""
    for a, name in parts:
        if not a:
            continue
        mag = "" if abs(a) == 1 else f"{abs(a)}*"
        sign = "-" if a < 0 else ("+" if out else "")
        out += f"{sign}{mag}{name}"
    if c or not out:
        out += f"{'+' if c >= 0 and out else ''}{c}" if c >= 0 else f"{c}"
    return out


@dataclass(frozen=True)
class Term:
    coeff: PolyElement
    target: Union[Affine, str]


@dataclass(frozen=True)
class ProductRule:
    """``[left, right] = sum(terms)`` for free indices satisfying ``guard``.

    ``guard`` is a tuple of ``(ai, aj, c)`` meaning ``ai*i + aj*j + c >= 0``
    with ``ai, aj`` in ``{-1, 0, 1}``.
    """

    left: Factor
    right: Factor
    terms: tuple[Term, ...]
    guard: tuple[tuple[int, int, int], ...] = ()

    @property
    def free_vars(self) -> tuple[str, ...]:
        return tuple(f.value for f in (self.left, self.right) if f.kind == "var")

    def sort_key(self, extras: Sequence[str]) -> tuple:
        return (self.left.sort_key(extras), self.right.sort_key(extras), tuple(sorted(self.guard)))

    def guard_ok(self, i: int, j: int) -> bool:
        return all(a * i + b * j + c >= 0 for a, b, c in self.guard)

    def bounds(self, var: str) -> tuple[int | None, int | None]:
        """Unary lower/upper bounds on ``var`` stated directly in the guard."""
        lo = hi = None
        for a, b, c in self.guard:
            coef, other = (a, b) if var == "i" else (b, a)
            if other or not coef:
                continue
            if coef > 0:
                lo = -c if lo is None else max(lo, -c)
            else:
                hi = c if hi is None else min(hi, c)
        return lo, hi


# --- presentations ----------------------------------------------------------


def make_ring(params: Sequence[str], extra: Sequence[str] = ()):
    names = list(INDEX_VARS) + list(params) + [x for x in extra if x not in params]
    R, *_ = ring(",".join(names), QQ)
    return R


@dataclass(frozen=True, eq=False)
class Presentation:
    name: str
    kind: str
    family_start: int
    extras: tuple[str, ...]
    params: tuple[tuple[str, Scalar | None], ...]
    rules: tuple[ProductRule, ...]
    family_end: int | None = None
    family: str = "e"
    description: str = ""
    attrs: Mapping[str, object] = field(default_factory=dict)

    # -- structure
    @cached_property
    def ring(self):
        return make_ring(self.param_names)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.params)

    @property
    def is_bound(self) -> bool:
        return not self.params

    def gen_index(self, name: str):
        return self.ring.gens[self.ring.symbols.index(_sym(name))]

    def __eq__(self, other):
        if not isinstance(other, Presentation):
            return NotImplemented
        key = lambda p: (p.name, p.kind, p.family_start, p.family_end, p.family, p.extras, p.params)
        if key(self) != key(other):
            return False
        mine = sorted(self.rules, key=lambda r: r.sort_key(self.extras))
        theirs = sorted(other.rules, key=lambda r: r.sort_key(other.extras))
        return mine == theirs

    def __hash__(self):
        return hash((self.name, self.kind, len(self.rules)))

    def in_family(self, g: Gen) -> bool:
        if not isinstance(g, int):
            return False
        return g >= self.family_start and (self.family_end is None or g <= self.family_end)

    def generators(self, window: int) -> list[Gen]:
        """Family generators with index <= ``window`` (or the family end), then extras."""
        top = window if self.family_end is None else min(window, self.family_end)
        return list(range(self.family_start, top + 1)) + list(self.extras)

    def sort_gens(self, gens: Iterable[Gen]) -> list[Gen]:
        return sorted(gens, key=lambda g: gen_sort_key(g, self.extras))

    def max_constant(self) -> int:
        """Largest absolute integer constant used by factors, guards and targets."""
        m = abs(self.family_start)
        for r in self.rules:
            for f in (r.left, r.right):
                if f.kind == "fixed":
                    m = max(m, abs(f.value))
            for _, _, c in r.guard:
                m = max(m, abs(c))
            for t in r.terms:
                if isinstance(t.target, Affine):
                    m = max(m, abs(t.target.c))
        if self.family_end is not None:
            m = max(m, abs(self.family_end))
        return m

    def max_shift(self) -> int:
        """Largest ``|c|`` in a non-constant target ``e(i + c)`` (0 if none)."""
        s = 0
        for r in self.eval_rules:
            for t in r.terms:
                if isinstance(t.target, Affine) and not t.target.is_constant:
                    s = max(s, abs(t.target.c))
        return s

    def tail_length(self) -> int | None:
        """The support bound ``t``: largest numeric suffix of a declared parameter."""
        best = None
        for n in self.param_names:
            digits = "".join(ch for ch in reversed(n) if ch.isdigit())[::-1]
            if digits and n.endswith(digits):
                best = max(best or 0, int(digits))
        return best

    # -- evaluation
    @cached_property
    def eval_rules(self) -> tuple[ProductRule, ...]:
        """Rules used for evaluation; the antisymmetric closure for Lie kind."""
        if self.kind == LIE:
            return symmetry_close(self).rules
        return self.rules

    @cached_property
    def _rule_index(self) -> dict:
        idx: dict = {}
        for r in self.eval_rules:
            key = (_shape(r.left), _shape(r.right))
            idx.setdefault(key, []).append(r)
        return idx

    @cached_property
    def _pair_cache(self) -> dict:
        return {}

    def match(self, g: Gen, h: Gen) -> tuple[ProductRule, int, int] | None:
        """The unique rule applying to the generator pair ``(g, h)``, with index bindings."""
        if not (self.in_family(g) or g in self.extras) or not (self.in_family(h) or h in self.extras):
            raise UndeclaredError(f"generator {g!r} or {h!r} is not declared")
        sg = "e" if isinstance(g, int) else g
        sh = "e" if isinstance(h, int) else h
        for r in self._rule_index.get((sg, sh), ()):
            ok, i = _bind(r.left, g)
            if not ok:
                continue
            ok, j = _bind(r.right, h)
            if not ok:
                continue
            if r.guard_ok(i, j):
                return r, i, j
        return None

    def pair(self, g: Gen, h: Gen) -> Element:
        """Product of two generators."""
        key = (g, h)
        cache = self._pair_cache
        if key in cache:
            return cache[key]
        m = self.match(g, h)
        if m is None:
            out = Element()
        else:
            r, i, j = m
            out = Element(self._eval_terms(r, i, j))
        cache[key] = out
        return out

    def _eval_terms(self, r: ProductRule, i: int, j: int) -> list[tuple[Gen, object]]:
        R = self.ring
        I, J = R.gens[0], R.gens[1]
        out = []
        for t in r.terms:
            c = t.coeff.subs([(I, i), (J, j)])
            if not c:
                continue
            if self.is_bound:
                c = as_scalar(c)
            if isinstance(t.target, Affine):
                tgt = t.target(i, j)
                if not self.in_family(tgt):
                    raise PresentationError(f"rule produces e({tgt}) outside the family")
                out.append((tgt, c))
            else:
                out.append((t.target, c))
        return out

    def element(self, terms: Mapping | Iterable) -> Element:
        return Element(terms)


def _sym(name: str):
    from sympy import Symbol

    return Symbol(name)


def _shape(f: Factor) -> str:
    return "e" if f.family else f.value


def _bind(f: Factor, g: Gen) -> tuple[bool, int]:
    if f.kind == "extra":
        return g == f.value, 0
    if not isinstance(g, int):
        return False, 0
    if f.kind == "fixed":
        return g == f.value, 0
    return True, g


def product(p: Presentation, a: Element, b: Element) -> Element:
    """Bilinear extension of the generator table."""
    acc: dict = {}
    for g, ca in a.items():
        for h, cb in b.items():
            for tgt, c in p.pair(g, h).items():
                v = ca * cb * c
                acc[tgt] = acc[tgt] + v if tgt in acc else v
    return Element(acc)


def bracket(p: Presentation, g: Gen | Element, h: Gen | Element) -> Element:
    a = g if isinstance(g, Element) else Element.gen(g)
    b = h if isinstance(h, Element) else Element.gen(h)
    return product(p, a, b)


# --- parameter binding ------------------------------------------------------


def convert_poly(poly: PolyElement, R) -> PolyElement:
    return poly.set_ring(R)


def bind_params(p: Presentation, bindings: Mapping[str, object] | None = None) -> Presentation:
    """Substitute rational values for every parameter (declared defaults fill gaps)."""
    bindings = dict(bindings or {})
    names = p.param_names
    for k in bindings:
        if k not in names:
            raise UndeclaredError(f"parameter {k!r} is not declared in {p.name}")
    values = {}
    for n, default in p.params:
        if n in bindings:
            values[n] = Q(bindings[n])
        elif default is not None:
            values[n] = default
        else:
            raise PresentationError(f"parameter {n!r} of {p.name} is unbound")
    return _substitute(p, values, keep=())


def partial_bind(p: Presentation, bindings: Mapping[str, object]) -> Presentation:
    """Bind only some parameters; the rest stay symbolic."""
    names = p.param_names
    for k in bindings:
        if k not in names:
            raise UndeclaredError(f"parameter {k!r} is not declared in {p.name}")
    values = {k: Q(v) for k, v in bindings.items()}
    keep = tuple((n, d) for n, d in p.params if n not in values)
    return _substitute(p, values, keep=keep)


def _substitute(p: Presentation, values: Mapping[str, Scalar], keep) -> Presentation:
    subs = [(p.gen_index(n), v) for n, v in values.items()]
    target_ring = make_ring([n for n, _ in keep])
    rules = []
    for r in p.rules:
        terms = []
        for t in r.terms:
            c = t.coeff.subs(subs) if subs else t.coeff
            if c:
                terms.append(Term(convert_poly(c, target_ring), t.target))
        rules.append(replace(r, terms=tuple(terms)))
    bound = dict(p.attrs.get("bindings", {}))
    bound.update({k: qstr(v) for k, v in values.items()})
    attrs = dict(p.attrs)
    attrs["bindings"] = bound
    return replace(p, params=tuple(keep), rules=tuple(rules), attrs=attrs)


def extend_params(p: Presentation, names: Sequence[str]) -> PresentationEx:
    """View of ``p`` whose coefficient ring also carries the symbols ``names``."""
    return PresentationEx(p, tuple(names))


class PresentationEx:
    """A presentation paired with a wider coefficient ring (for family parameters)."""

    def __init__(self, base: Presentation, extra: tuple[str, ...]):
        self.base = base
        self.extra = extra
        self.ring = make_ring(base.param_names, extra)


# --- antisymmetric closure --------------------------------------------------


def _swap_rule(r: ProductRule, R) -> ProductRule:
    I, J = R.gens[0], R.gens[1]

    def swap_factor(f: Factor) -> Factor:
        if f.kind == "var":
            return Factor("var", "j" if f.value == "i" else "i")
        return f

    terms = []
    for t in r.terms:
        c = -t.coeff.compose([(I, J), (J, I)])
        tgt = t.target.swap() if isinstance(t.target, Affine) else t.target
        terms.append(Term(c, tgt))
    guard = tuple((b, a, c) for a, b, c in r.guard)
    return ProductRule(swap_factor(r.right), swap_factor(r.left), tuple(terms), guard)


def rule_domain_pairs(p: Presentation, r: ProductRule, window: int) -> Iterator[tuple[Gen, Gen]]:
    """Generator pairs with family indices <= ``window`` that ``r`` applies to."""
    gens = p.generators(window)
    for g, h in iproduct(gens, gens):
        ok, i = _bind(r.left, g)
        if not ok or (r.left.family and not p.in_family(g)):
            continue
        ok, j = _bind(r.right, h)
        if not ok or (r.right.family and not p.in_family(h)):
            continue
        if r.guard_ok(i, j):
            yield g, h


def overlap_window(p: Presentation, *rules: ProductRule) -> int:
    m = p.family_start
    for r in rules:
        for f in (r.left, r.right):
            if f.kind == "fixed":
                m = max(m, f.value)
        for _, _, c in r.guard:
            m = max(m, abs(c) + abs(p.family_start))
    return m + 3


def _terms_at(p: Presentation, r: ProductRule, g: Gen, h: Gen) -> Element:
    _, i = _bind(r.left, g)
    _, j = _bind(r.right, h)
    R = p.ring
    I, J = R.gens[0], R.gens[1]
    out = []
    for t in r.terms:
        c = t.coeff.subs([(I, i), (J, j)])
        tgt = t.target(i, j) if isinstance(t.target, Affine) else t.target
        out.append((tgt, c))
    return Element(out)


def symmetry_close(p: Presentation) -> Presentation:
    """Add the mirrored rule ``[b, a] = -[a, b]`` for every Lie rule; idempotent."""
    if p.kind != LIE:
        raise PresentationError("symmetry_close applies to Lie presentations only")
    R = p.ring
    rules = list(p.rules)
    for r in p.rules:
        w = overlap_window(p, r)
        for g, h in rule_domain_pairs(p, r, w):
            if g == h and _terms_at(p, r, g, h):
                raise ConflictError(f"[{gen_name(g)}, {gen_name(h)}] must vanish in a Lie algebra")
    for r in p.rules:
        m = _swap_rule(r, R)
        if any(m == other for other in rules):
            continue
        w = overlap_window(p, r, m, *rules)
        mine = set(rule_domain_pairs(p, m, w))
        for other in rules:
            if other is r and r.left == r.right:
                pass
            if _shape(other.left) != _shape(m.left) or _shape(other.right) != _shape(m.right):
                continue
            shared = mine.intersection(rule_domain_pairs(p, other, w))
            if not shared:
                continue
            if other is r and all(g == h for g, h in shared):
                # a rule meeting its own mirror only on the diagonal (already checked zero)
                continue
            raise ConflictError(
                f"mirror of rule [{_fs(r.left)}, {_fs(r.right)}] conflicts with a declared rule on "
                f"{sorted(shared, key=str)[:3]}"
            )
        rules.append(m)
    return replace(p, rules=tuple(rules))


def _fs(f: Factor) -> str:
    if f.kind == "extra":
        return str(f.value)
    return f"e({f.value})"


def check_disjoint(p: Presentation) -> None:
    """Raise :class:`OverlapError` if two rules apply to the same generator pair."""
    groups: dict = {}
    for r in p.rules:
        groups.setdefault((_shape(r.left), _shape(r.right)), []).append(r)
    for rs in groups.values():
        for a in range(len(rs)):
            for b in range(a + 1, len(rs)):
                w = overlap_window(p, rs[a], rs[b])
                shared = set(rule_domain_pairs(p, rs[a], w)) & set(rule_domain_pairs(p, rs[b], w))
                if shared:
                    g, h = min(shared, key=lambda gh: (gen_sort_key(gh[0]), gen_sort_key(gh[1])))
                    raise OverlapError(
                        f"rules [{_fs(rs[a].left)}, {_fs(rs[a].right)}] overlap at "
                        f"[{gen_name(g, p.family)}, {gen_name(h, p.family)}]"
                    )
