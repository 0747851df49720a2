"""Leibniz and Jacobi identities: numeric evaluation and symbolic proof."""

from __future__ import annotations

from itertools import product as iproduct

from .presentation import LIE, Element, Presentation, product
from .symbolic import (
    Ctx,
    Unsupported,
    Verdict,
    check_branches,
    concretize,
    engine_ring,
    run_shape,
    shapes,
    sym_add,
    sym_pair,
    sym_product,
)


def leib_eval(p: Presentation, a: Element, b: Element, c: Element) -> Element:
    """``[a,[b,c]] - [[a,b],c] + [[a,c],b]``."""
    return product(p, a, product(p, b, c)) - product(p, product(p, a, b), c) + product(p, product(p, a, c), b)


def _gen(g) -> Element:
    return Element.gen(g)


def leib_gens(p: Presentation, g, h, k) -> Element:
    return leib_eval(p, _gen(g), _gen(h), _gen(k))


def numeric_check(p: Presentation, window: int):
    """Exhaustive check over generators with family index <= ``window``; first failure or None."""
    gens = p.generators(window)
    for g, h, k in iproduct(gens, repeat=3):
        r = leib_gens(p, g, h, k)
        if r:
            return (g, h, k), r
    if p.kind == LIE:
        for g, h in iproduct(gens, repeat=2):
            r = p.pair(g, h) + p.pair(h, g)
            if r:
                return (g, h), r
    return None


def _leib_body(p: Presentation):
    def body(ctx: Ctx, gens):
        a, b, c = ({g: ctx.R.one} for g in gens)
        out = sym_product(ctx, p, a, _pair(ctx, p, gens[1], gens[2]))
        out = sym_add(out, sym_product(ctx, p, _pair(ctx, p, gens[0], gens[1]), c), -1)
        out = sym_add(out, sym_product(ctx, p, _pair(ctx, p, gens[0], gens[2]), b))
        return out

    return body


def _pair(ctx, p, g, h):
    return sym_pair(ctx, p, g, h)


def _antisym_body(p: Presentation):
    def body(ctx: Ctx, gens):
        return sym_add(_pair(ctx, p, gens[0], gens[1]), _pair(ctx, p, gens[1], gens[0]))

    return body


def _concrete(p: Presentation, slots, kind: str):
    def check(pt):
        gens = [concretize(g, pt) for g in _slot_forms(slots)]
        if kind == "leib":
            r = leib_gens(p, *gens)
        else:
            r = p.pair(gens[0], gens[1]) + p.pair(gens[1], gens[0])
        return (tuple(gens), r) if r else None

    return check


def _slot_forms(slots):
    from .symbolic import slot_gens

    return slot_gens(slots)


def check_identities(p: Presentation) -> Verdict:
    """Prove the Leibniz identity (and antisymmetry for Lie kind) for all generators and parameters."""
    if p.family_end is not None:
        return _finite_check(p)
    R = engine_ring(p.param_names)
    cases = 0
    try:
        jobs = [(s, "leib") for s in shapes(p, 3)]
        if p.kind == LIE:
            jobs += [(s, "anti") for s in shapes(p, 2)]
        for slots, kind in jobs:
            body = _leib_body(p) if kind == "leib" else _antisym_body(p)
            branches = run_shape(p, slots, body, R)
            cases += len(branches)
            v = check_branches(branches, _concrete(p, slots, kind), None)
            if v.status != "Proved":
                v.cases = cases
                v.details["shape"] = list(slots)
                return v
    except Unsupported as e:
        return Verdict("Inconclusive", reason=str(e), cases=cases)
    return Verdict("Proved", cases=cases)


def _finite_check(p: Presentation) -> Verdict:
    hit = numeric_check(p, p.family_end)
    n = len(p.generators(p.family_end))
    cases = n**3
    if hit is None:
        return Verdict("Proved", cases=cases)
    return Verdict("Refuted", triple=hit[0], residual=hit[1], cases=cases)
