import pytest

from resolv import catalog, dsl
from resolv.exactla import Q
from resolv.presentation import (
    ConflictError,
    Element,
    OverlapError,
    PresentationError,
    UndeclaredError,
    bind_params,
    bracket,
)


def test_parse_m0_brackets():
    p = dsl.parse("algebra a kind lie\nfamily e start 1\nrule [e(i), e(1)] = e(i+1) for i >= 2\n")
    assert bracket(p, 3, 1) == Element.gen(4)
    assert bracket(p, 1, 3) == Element.gen(4).scale(-1)
    assert not bracket(p, 2, 3)


def test_sum_and_params():
    p = catalog.get("R1_m0_1", t=4)
    assert p.param_names == ("beta3", "beta4")
    q = bind_params(p, {"beta3": 2, "beta4": "1/2"})
    # [e(3), x] = 1*e3 + beta3*e4 + beta4*e5
    got = bracket(q, 3, "x")
    assert dict(got.scalars()) == {3: Q(1), 4: Q(2), 5: Q("1/2")}


def test_render_roundtrip():
    for key in catalog.keys():
        e = catalog.entry(key)
        p = catalog.get(key, n=6 if e.needs_n else None)
        q = dsl.parse(dsl.render(p), n=6 if e.needs_n else None)
        assert dsl.render(q) == dsl.render(p), key


def test_syntax_error_has_location():
    with pytest.raises(dsl.DSLSyntaxError) as ei:
        dsl.parse("algebra a kind lie\nfamily e start 1\nrule [e(i), e(1) = e(i+1)\n")
    assert ei.value.line == 3


def test_undeclared_parameter():
    with pytest.raises(UndeclaredError):
        dsl.parse("algebra a kind lie\nfamily e start 1\nrule [e(i), e(1)] = gamma*e(i+1) for i >= 2\n")


def test_overlapping_rules_rejected():
    text = (
        "algebra a kind leibniz\nfamily e start 1\n"
        "rule [e(i), e(1)] = e(i+1) for i >= 2\n"
        "rule [e(i), e(1)] = e(i+2) for i >= 3\n"
    )
    with pytest.raises(OverlapError):
        dsl.parse(text)


def test_lie_self_bracket_conflict():
    with pytest.raises(ConflictError):
        dsl.parse("algebra a kind lie\nfamily e start 1\nrule [e(1), e(1)] = e(2)\n")


def test_missing_header():
    with pytest.raises(PresentationError):
        dsl.parse("rule [e(i), e(1)] = e(i+1) for i >= 2\n")
