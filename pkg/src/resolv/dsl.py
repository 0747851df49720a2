"""Parser and canonical printer for the presentation language.

One declaration per line, ``#`` starts a comment::

    algebra m0 kind lie
    family e start 1
    extra x
    param beta[3..t], b = 1/2
    rule [e(i), e(1)] = (1)*e(i+1) for i >= 2
    rule [e(i), x] = (i-2)*e(i) + sum(k, 3, t) of (beta[k]) * e(i+k-2) for i >= 2

``t`` (the tail length) and ``n`` are integer constants supplied by the
caller.  ``sum(k, lo, hi) of <term>`` is expanded while parsing; indexed
parameters ``beta[k]`` whose index falls outside the declared range are zero.
Coefficients are parsed with sympy and converted to the presentation ring.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .exactla import Q, qstr
from .presentation import (
    LEIBNIZ,
    LIE,
    RESERVED,
    Affine,
    Element,
    Factor,
    Presentation,
    PresentationError,
    ProductRule,
    Term,
    UndeclaredError,
    check_disjoint,
    make_ring,
    render_linear,
    rule_domain_pairs,
    symmetry_close,
)

DEFAULT_T = 5
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_INDEXED = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)\[([^\[\]]+)\]")
_TRANSFORMS = standard_transformations + (convert_xor,)


class DSLSyntaxError(PresentationError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"line {line}, column {col}: {msg}" if line else msg)


@dataclass
class _Scope:
    """Names visible while parsing one expression."""

    params: dict  # name -> default or None
    indexed: dict  # base name -> (lo, hi)
    extras: tuple
    family: str
    consts: dict  # integer macros (t, n)
    ring: object
    line: int = 0
    text: str = ""

    def error(self, msg: str, fragment: str | None = None):
        col = self.text.find(fragment) + 1 if fragment and fragment in self.text else 1
        raise DSLSyntaxError(msg, self.line, col)


# --- small expression helpers -------------------------------------------------


def _split_top(text: str, seps: str = "+-") -> list[tuple[str, str]]:
    """Split ``text`` on top-level binary ``+``/``-``; returns ``(sign, chunk)`` pairs."""
    out, depth, cur, sign, last = [], 0, [], "+", ""
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch in seps and depth == 0 and last and last not in "*/(^":
            out.append((sign, "".join(cur).strip()))
            cur, sign, last = [], ch, ""
            continue
        if ch in seps and depth == 0 and not last:
            sign = ch if sign == "+" else ("+" if ch == "-" else "-")
            continue
        cur.append(ch)
        if not ch.isspace():
            last = ch
    out.append((sign, "".join(cur).strip()))
    return out


def _int_expr(text: str, env: Mapping[str, int], scope: _Scope) -> int:
    expr = text.strip()
    for name in _IDENT.findall(expr):
        if name not in env:
            scope.error(f"unknown name {name!r} in integer expression", name)
    try:
        val = parse_expr(expr, local_dict={k: sympy.Integer(v) for k, v in env.items()}, transformations=_TRANSFORMS)
    except Exception:
        scope.error(f"bad integer expression {expr!r}", expr)
    if not (val.is_Integer):
        scope.error(f"{expr!r} is not an integer", expr)
    return int(val)


def _affine(text: str, varmap: Mapping[str, str], env: Mapping[str, int], scope: _Scope) -> Affine:
    """Parse ``a*i + b*j + c`` where ``varmap`` renames the user's index names."""
    expr = text.strip()
    syms = {name: sympy.Symbol(canon) for name, canon in varmap.items()}
    local = dict(syms)
    local.update({k: sympy.Integer(v) for k, v in env.items()})
    for name in _IDENT.findall(expr):
        if name not in local:
            scope.error(f"undeclared index {name!r}", name)
    try:
        val = sympy.expand(parse_expr(expr, local_dict=local, transformations=_TRANSFORMS))
    except Exception:
        scope.error(f"bad index expression {expr!r}", expr)
    I, J = sympy.Symbol("i"), sympy.Symbol("j")
    poly = sympy.Poly(val, I, J)
    if poly.total_degree() > 1:
        scope.error(f"index expression {expr!r} is not affine", expr)
    ai = poly.coeff_monomial(I)
    aj = poly.coeff_monomial(J)
    c = poly.coeff_monomial(1)
    if not all(sympy.sympify(v).is_Integer for v in (ai, aj, c)):
        scope.error(f"index expression {expr!r} must have integer coefficients", expr)
    return Affine(int(ai), int(aj), int(c))


def _expand_indexed(text: str, env: Mapping[str, int], scope: _Scope) -> str:
    def repl(m):
        base, idx = m.group(1), m.group(2)
        if base not in scope.indexed:
            scope.error(f"{base!r} is not an indexed parameter", base)
        k = _int_expr(idx, env, scope)
        lo, hi = scope.indexed[base]
        return f"{base}{k}" if lo <= k <= hi else "0"

    return _INDEXED.sub(repl, text)


def _coeff(text: str, varmap: Mapping[str, str], env: Mapping[str, int], scope: _Scope, numeric=None):
    """Parse a coefficient polynomial into ``scope.ring``.

    ``numeric`` optionally maps parameter names to rationals; after that
    substitution the expression may be a rational function, as long as it
    ends up a polynomial.
    """
    expr = _expand_indexed(text, env, scope)
    local = {name: sympy.Symbol(canon) for name, canon in varmap.items()}
    for k, v in env.items():
        local[k] = sympy.Integer(v)
    for name in scope.params:
        local[name] = sympy.Symbol(name)
    for name in _IDENT.findall(expr):
        if name not in local:
            if name in scope.extras or name == scope.family:
                scope.error(f"generator {name!r} used inside a coefficient", name)
            raise UndeclaredError(f"line {scope.line}: undeclared parameter {name!r}")
    try:
        val = parse_expr(expr, local_dict=local, transformations=_TRANSFORMS)
    except Exception:
        scope.error(f"bad coefficient {text!r}", text)
    if numeric:
        val = val.subs({sympy.Symbol(k): sympy.Rational(str(qstr(v))) for k, v in numeric.items()})
    val = sympy.cancel(sympy.together(val))
    try:
        return scope.ring.from_expr(val) if val != 0 else scope.ring.zero
    except Exception:
        scope.error(f"coefficient {text!r} is not a polynomial", text)


_SUM = re.compile(r"^sum\s*\(\s*([A-Za-z_]\w*)\s*,([^,]+),([^)]+)\)\s*of\s+(.*)$", re.S)


def _terms(text: str, varmap, env, scope: _Scope, numeric=None) -> list[tuple[object, object]]:
    """Parse a sum into ``(coeff, target)`` pairs; target is an Affine or an extra name."""
    text = text.strip()
    if text == "0":
        return []
    out = []
    for sign, chunk in _split_top(text):
        if not chunk:
            scope.error("empty term", text)
        m = _SUM.match(chunk)
        if m:
            var, lo, hi, body = m.groups()
            lo, hi = _int_expr(lo, env, scope), _int_expr(hi, env, scope)
            for k in range(lo, hi + 1):
                sub_env = dict(env)
                sub_env[var] = k
                for c, tgt in _terms(body, varmap, sub_env, scope, numeric):
                    out.append((-c if sign == "-" else c, tgt))
            continue
        c, tgt = _single_term(chunk, varmap, env, scope, numeric)
        out.append((-c if sign == "-" else c, tgt))
    return out


def _single_term(chunk: str, varmap, env, scope: _Scope, numeric=None):
    fam = re.escape(scope.family)
    m = re.search(rf"(?:^|(?<=[\s*]))({fam}\(([^()]*)\)|[A-Za-z_]\w*)\s*$", chunk)
    if not m:
        scope.error(f"cannot find a generator in term {chunk!r}", chunk)
    prefix = chunk[: m.start()].strip()
    if prefix:
        if not prefix.endswith("*"):
            scope.error(f"expected '*' between coefficient and generator in {chunk!r}", chunk)
        prefix = prefix[:-1].strip()
    coeff = _coeff(prefix, varmap, env, scope, numeric) if prefix else scope.ring.one
    if m.group(2) is not None:
        target = _affine(m.group(2), varmap, env, scope)
    else:
        name = m.group(1)
        if name not in scope.extras:
            scope.error(f"undeclared generator {name!r}", name)
        target = name
    return coeff, target


def _guard(text: str, varmap, env, scope: _Scope) -> list[tuple[int, int, int]]:
    out = []
    for part in re.split(r"\band\b", text):
        m = re.match(r"^(.*?)(>=|<=|==|>|<|=)(.*)$", part.strip())
        if not m:
            scope.error(f"bad comparison {part.strip()!r}", part.strip())
        lhs, op, rhs = m.groups()
        a = _affine(lhs, varmap, env, scope)
        b = _affine(rhs, varmap, env, scope)
        d = Affine(a.ai - b.ai, a.aj - b.aj, a.c - b.c)  # lhs - rhs
        neg = Affine(-d.ai, -d.aj, -d.c)
        forms = {
            ">=": [d],
            ">": [Affine(d.ai, d.aj, d.c - 1)],
            "<=": [neg],
            "<": [Affine(neg.ai, neg.aj, neg.c - 1)],
            "==": [d, neg],
            "=": [d, neg],
        }[op]
        for f in forms:
            if abs(f.ai) > 1 or abs(f.aj) > 1:
                scope.error("guards must compare indices with unit coefficients", part.strip())
            if f.is_constant:
                if f.c < 0:
                    scope.error(f"guard {part.strip()!r} is never satisfied", part.strip())
                continue
            out.append((f.ai, f.aj, f.c))
    return out


# --- declarations -------------------------------------------------------------


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _parse_params(body: str, consts, scope: _Scope, params: dict, indexed: dict):
    for item in _split_commas(body):
        name, _, default = item.partition("=")
        name = name.strip()
        m = re.match(r"^([A-Za-z_]\w*)\s*\[\s*(.+?)\s*\.\.\s*(.+?)\s*\]$", name)
        if m:
            base = m.group(1)
            lo = _int_expr(m.group(2), consts, scope)
            hi = _int_expr(m.group(3), consts, scope)
            indexed[base] = (lo, hi)
            for k in range(lo, hi + 1):
                _declare(f"{base}{k}", default, scope, params)
            continue
        if not _IDENT.fullmatch(name):
            scope.error(f"bad parameter name {name!r}", name)
        _declare(name, default, scope, params)


def _declare(name, default, scope, params):
    if name in RESERVED:
        scope.error(f"{name!r} is reserved", name)
    if name in params:
        scope.error(f"parameter {name!r} declared twice", name)
    params[name] = Q(default.strip()) if default.strip() else None


def _split_commas(body: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in body:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur).strip())
    return out


def _factor(text: str, scope: _Scope, consts) -> tuple[Factor, str | None]:
    text = text.strip()
    fam = re.escape(scope.family)
    m = re.fullmatch(rf"{fam}\((.*)\)", text)
    if m:
        inner = m.group(1).strip()
        if _IDENT.fullmatch(inner) and inner not in consts:
            if inner in scope.params or inner in scope.extras:
                scope.error(f"{inner!r} cannot be used as an index variable", inner)
            return Factor("var", inner), inner
        return Factor("fixed", _int_expr(inner, consts, scope)), None
    if text in scope.extras:
        return Factor("extra", text), None
    scope.error(f"undeclared generator {text!r}", text)


_RULE = re.compile(r"^rule\s*\[(.*)\]\s*=\s*(.*)$", re.S)


def _find_for(rhs: str) -> int:
    depth = 0
    pos = -1
    for idx in range(len(rhs)):
        ch = rhs[idx]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif depth == 0 and rhs.startswith(" for ", idx):
            pos = idx
    return pos


def _parse_rule(body_lr: str, rhs: str, scope: _Scope, consts) -> ProductRule:
    parts = _split_commas(body_lr)
    if len(parts) != 2:
        scope.error("a rule needs exactly two factors", body_lr)
    (lf, lname), (rf, rname) = _factor(parts[0], scope, consts), _factor(parts[1], scope, consts)
    varmap = {}
    guard: list = []
    if lname:
        varmap[lname] = "i"
        lf = Factor("var", "i")
    if rname:
        if rname == lname:
            # the same index on both sides: a diagonal rule i == j
            guard += [(1, -1, 0), (-1, 1, 0)]
        else:
            varmap[rname] = "j"
        rf = Factor("var", "j")
    for name in varmap:
        if name in consts:
            scope.error(f"{name!r} is a constant, not an index", name)
    env = dict(consts)
    pos = _find_for(rhs)
    if pos >= 0:
        guard += _guard(rhs[pos + 5 :], varmap, env, scope)
        rhs = rhs[:pos]
    if rname and rname == lname:
        varmap_full = dict(varmap)
    else:
        varmap_full = varmap
    terms = _merge_terms(_terms(rhs, varmap_full, env, scope))
    return ProductRule(lf, rf, tuple(terms), tuple(sorted(set(guard))))


def _merge_terms(pairs: Iterable[tuple[object, object]]) -> list[Term]:
    acc: dict = {}
    order = []
    for c, tgt in pairs:
        if tgt in acc:
            acc[tgt] = acc[tgt] + c
        else:
            acc[tgt] = c
            order.append(tgt)
    return sorted((Term(acc[t], t) for t in order if acc[t]), key=_term_key)


def _term_key(t: Term):
    if isinstance(t.target, Affine):
        return (0, -t.target.ai, -t.target.aj, t.target.c, "")
    return (1, 0, 0, 0, t.target)


def parse(text: str, t: int = DEFAULT_T, n: int | None = None, validate: bool = True) -> Presentation:
    """Parse DSL source into a validated :class:`Presentation`."""
    consts = {"t": t}
    if n is not None:
        consts["n"] = n
    name = kind = None
    start = end = None
    family = "e"
    extras: list[str] = []
    params: dict = {}
    indexed: dict = {}
    rules: list[ProductRule] = []
    desc: list[str] = []
    scope = _Scope(params, indexed, (), family, consts, None)
    pending: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        scope.line, scope.text = lineno, raw
        if not line:
            continue
        word = line.split(None, 1)[0]
        rest = line[len(word) :].strip()
        if word == "algebra":
            m = re.fullmatch(r"([A-Za-z_][\w']*)\s+kind\s+(lie|leibniz)", rest)
            if not m:
                scope.error("expected 'algebra <name> kind lie|leibniz'", rest)
            name, kind = m.group(1), m.group(2)
        elif word == "family":
            m = re.fullmatch(r"([A-Za-z_]\w*)\s+start\s+(\S+)(?:\s+end\s+(\S+))?", rest)
            if not m:
                scope.error("expected 'family <name> start <int> [end <int>]'", rest)
            family = m.group(1)
            start = _int_expr(m.group(2), consts, scope)
            end = _int_expr(m.group(3), consts, scope) if m.group(3) else None
        elif word == "extra":
            for x in _split_commas(rest):
                if not _IDENT.fullmatch(x) or x in RESERVED:
                    scope.error(f"bad generator name {x!r}", x)
                if x in extras:
                    scope.error(f"generator {x!r} declared twice", x)
                extras.append(x)
        elif word == "param":
            _parse_params(rest, consts, scope, params, indexed)
        elif word == "describe":
            desc.append(rest)
        elif word == "rule":
            pending.append((lineno, line))
        else:
            scope.error(f"unknown declaration {word!r}", word)
    if name is None or kind is None:
        raise DSLSyntaxError("missing 'algebra <name> kind ...' declaration")
    if start is None:
        raise DSLSyntaxError("missing 'family' declaration")
    clash = set(extras) & set(params)
    if clash or family in extras or family in params:
        raise DSLSyntaxError(f"name clash between generators and parameters: {sorted(clash) or family}")
    ring = make_ring(list(params))
    scope = _Scope(params, indexed, tuple(extras), family, consts, ring)
    for lineno, line in pending:
        scope.line = lineno
        scope.text = text.splitlines()[lineno - 1]
        m = _RULE.match(line)
        if not m:
            scope.error("expected 'rule [a, b] = <sum> [for <guard>]'", line)
        body = m.group(1)
        rhs = m.group(2)
        rules.append(_parse_rule(body, rhs, scope, consts))
    p = Presentation(
        name=name,
        kind=kind,
        family_start=start,
        family_end=end,
        family=family,
        extras=tuple(extras),
        params=tuple(params.items()),
        rules=tuple(rules),
        description=" ".join(desc),
        attrs={"indexed": dict(indexed), "t": t, "n": n},
    )
    if validate:
        validate_presentation(p)
    return p


def validate_presentation(p: Presentation) -> None:
    """Check disjointness, target ranges and (for Lie kind) the antisymmetric closure."""
    if p.kind not in (LIE, LEIBNIZ):
        raise PresentationError(f"unknown kind {p.kind!r}")
    for r in p.rules:
        for f in (r.left, r.right):
            if f.kind == "fixed" and not p.in_family(f.value):
                raise UndeclaredError(f"generator {p.family}({f.value}) is outside the family")
    check_disjoint(p)
    from .presentation import overlap_window

    for r in p.rules:
        w = overlap_window(p, r) + 2
        for g, h in rule_domain_pairs(p, r, w):
            i = g if r.left.kind == "var" else 0
            j = h if r.right.kind == "var" else 0
            for term in r.terms:
                if isinstance(term.target, Affine):
                    k = term.target(i, j)
                    if not p.in_family(k) and term.coeff.subs([(p.ring.gens[0], i), (p.ring.gens[1], j)]):
                        raise PresentationError(
                            f"rule [{_render_factor(p, r.left)}, {_render_factor(p, r.right)}] "
                            f"produces {p.family}({k}) outside the family"
                        )
    if p.kind == LIE:
        symmetry_close(p)


# --- elements ---------------------------------------------------------------


def parse_element(text: str, p: Presentation, t: int | None = None, ring=None, numeric=None) -> Element:
    """Parse ``x + (1/2)*e(3) + sum(k, 2, t) of (alpha[k+1])*e(k)`` into an Element."""
    ring = ring or p.ring
    t = t if t is not None else p.attrs.get("t", DEFAULT_T)
    consts = {"t": t}
    if p.attrs.get("n") is not None:
        consts["n"] = p.attrs["n"]
    names = [str(s) for s in ring.symbols if str(s) not in ("i", "j")]
    params = {n: None for n in names}
    indexed = dict(p.attrs.get("indexed", {}))
    for base, rng in _indexed_from_names(names).items():
        if base not in indexed:
            indexed[base] = rng
    scope = _Scope(params, indexed, p.extras, p.family, consts, ring, 0, text)
    out = []
    for c, tgt in _terms(text, {}, consts, scope, numeric):
        if isinstance(tgt, Affine):
            tgt = tgt.c
            if not p.in_family(tgt):
                raise UndeclaredError(f"{p.family}({tgt}) is not a generator of {p.name}")
        out.append((tgt, c))
    return Element(out)


def _indexed_from_names(names: Sequence[str]) -> dict:
    """Infer indexed families (``alpha3, alpha4`` -> ``alpha[3..4]``) from plain names."""
    groups: dict = {}
    for n in names:
        m = re.fullmatch(r"([A-Za-z_]+?)(\d+)", n)
        if m:
            groups.setdefault(m.group(1), []).append(int(m.group(2)))
    return {b: (min(v), max(v)) for b, v in groups.items()}


def parse_coeff(text: str, p: Presentation, ring=None, numeric=None, varmap=None):
    ring = ring or p.ring
    consts = {"t": p.attrs.get("t", DEFAULT_T)}
    names = [str(s) for s in ring.symbols if str(s) not in ("i", "j")]
    indexed = dict(p.attrs.get("indexed", {}))
    scope = _Scope({n: None for n in names}, indexed, p.extras, p.family, consts, ring, 0, text)
    return _coeff(text, varmap or {}, consts, scope, numeric)


def make_scope(p: Presentation, ring, extra_params: Sequence[str] = (), indexed=None, t=None, line=0, text=""):
    """A parsing scope over ``ring`` for modules that extend the language (maps, changes)."""
    t = t if t is not None else p.attrs.get("t", DEFAULT_T)
    consts = {"t": t}
    if p.attrs.get("n") is not None:
        consts["n"] = p.attrs["n"]
    names = [str(s) for s in ring.symbols if str(s) not in ("i", "j")]
    idx = dict(p.attrs.get("indexed", {}))
    idx.update(indexed or {})
    return _Scope({n: None for n in names}, idx, p.extras, p.family, consts, ring, line, text)


# --- rendering ----------------------------------------------------------------


def _render_factor(p: Presentation, f: Factor) -> str:
    if f.kind == "extra":
        return f.value
    return f"{p.family}({f.value})"


def _render_target(p: Presentation, tgt) -> str:
    if isinstance(tgt, Affine):
        return f"{p.family}({tgt})"
    return tgt


def _render_coeff(c) -> str:
    s = str(c)
    return s.replace(" ", "")


def render_terms(p: Presentation, terms: Sequence[Term]) -> str:
    if not terms:
        return "0"
    return " + ".join(f"({_render_coeff(t.coeff)})*{_render_target(p, t.target)}" for t in sorted(terms, key=_term_key))


def render_guard(guard: Sequence[tuple[int, int, int]]) -> str:
    parts = []
    for a, b, c in sorted(guard, key=lambda g: (-abs(g[0]) - abs(g[1]), g)):
        # write as  <positive side> >= <rest>
        pos = [(x, n) for x, n in ((a, "i"), (b, "j")) if x > 0]
        neg = [(-x, n) for x, n in ((a, "i"), (b, "j")) if x < 0]
        if pos:
            lhs = render_linear(pos, 0)
            rhs = render_linear(neg, -c)
            parts.append(f"{lhs} >= {rhs}")
        else:
            lhs = render_linear(neg, 0)
            parts.append(f"{lhs} <= {c}")
    return " and ".join(parts)


def render_rule(p: Presentation, r: ProductRule) -> str:
    s = f"rule [{_render_factor(p, r.left)}, {_render_factor(p, r.right)}] = {render_terms(p, r.terms)}"
    if r.guard:
        s += f" for {render_guard(r.guard)}"
    return s


def render(p: Presentation) -> str:
    """Deterministic canonical text; sums are written out term by term."""
    lines = [f"algebra {p.name} kind {p.kind}"]
    fam = f"family {p.family} start {p.family_start}"
    if p.family_end is not None:
        fam += f" end {p.family_end}"
    lines.append(fam)
    if p.extras:
        lines.append("extra " + ", ".join(p.extras))
    if p.params:
        lines.append("param " + ", ".join(n if d is None else f"{n} = {qstr(d)}" for n, d in p.params))
    if p.description:
        lines.append(f"describe {p.description}")
    for r in sorted(p.rules, key=lambda r: r.sort_key(p.extras)):
        lines.append(render_rule(p, r))
    return "\n".join(lines) + "\n"
