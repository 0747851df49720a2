"""Scenario files: a source algebra, a chain of basis changes, and expectations.

::

    scenario m0_case_2
    describe alpha1 = 0 branch
    source
      algebra pre kind lie
      ...
    end
    change e(1)' = e(1) - alpha2*e(2)
    then
    change x' = x + sum(k, 2, t-1) of (alpha[k+1] - alpha2*beta[k+1])*e(k)
    expect table R3_m0_1
    expect identities = Proved
    level 8

``source`` and ``expect table`` accept a catalog key or an inline block ending
in ``end``.  ``mode numeric`` skips the symbolic rewrite and only conjugates
the truncated table; ``bind name = value`` fixes parameters, the rest are drawn
from the seed.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import catalog, dsl
from .exactla import Q, qstr
from .presentation import Presentation, bind_params, partial_bind
from .quotient import truncate
from .transform import apply_change, compare_presentations, diff_tables, parse_change, symbolic_change

SYMBOLIC = "symbolic"
NUMERIC = "numeric"

_PROPS = ("h1_dim", "h2_dim", "der_dim", "center_dim", "complete", "identities")


@dataclass
class Scenario:
    name: str = ""
    description: str = ""
    source: str = ""  # catalog key or inline DSL
    inline: bool = False
    steps: list = field(default_factory=list)  # list of lists of change lines
    target: str | None = None
    target_inline: bool = False
    props: list = field(default_factory=list)  # (name, expected string)
    mode: str = SYMBOLIC
    level: int = 8
    t: int = dsl.DEFAULT_T
    bindings: dict = field(default_factory=dict)
    path: str = ""


class ScenarioError(dsl.DSLSyntaxError):
    pass


def _block(lines, k):
    out = []
    while k < len(lines):
        if lines[k].strip() == "end":
            return "\n".join(out), k + 1
        out.append(lines[k])
        k += 1
    raise ScenarioError("unterminated block (missing 'end')", k)


def parse_scenario(text: str, path: str = "") -> Scenario:
    sc = Scenario(path=path)
    lines = text.splitlines()
    cur: list = []
    k = 0
    while k < len(lines):
        line = dsl._strip_comment(lines[k]).strip()
        lineno = k + 1
        k += 1
        if not line:
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "scenario":
            sc.name = rest
        elif word == "describe":
            sc.description = (sc.description + " " + rest).strip()
        elif word == "source":
            if rest:
                sc.source = rest
            else:
                sc.source, k = _block(lines, k)
                sc.inline = True
        elif word == "change":
            cur.append(rest)
        elif word == "then":
            if not cur:
                raise ScenarioError("'then' without a preceding change", lineno)
            sc.steps.append(cur)
            cur = []
        elif word == "expect":
            m = re.fullmatch(r"(\w+)\s*=\s*(\S+)", rest)
            if m and m.group(1) in _PROPS:
                sc.props.append((m.group(1), m.group(2)))
            elif rest.startswith("table"):
                key = rest[5:].strip()
                if key:
                    sc.target = key
                else:
                    sc.target, k = _block(lines, k)
                    sc.target_inline = True
            else:
                raise ScenarioError(f"bad expectation {rest!r}", lineno)
        elif word == "mode":
            if rest not in (SYMBOLIC, NUMERIC):
                raise ScenarioError(f"mode must be {SYMBOLIC} or {NUMERIC}", lineno)
            sc.mode = rest
        elif word == "level":
            sc.level = int(rest)
        elif word == "tail":
            sc.t = int(rest)
        elif word == "bind":
            m = re.fullmatch(r"(\w+)\s*=\s*(\S+)", rest)
            if not m:
                raise ScenarioError(f"bad binding {rest!r}", lineno)
            sc.bindings[m.group(1)] = Q(m.group(2))
        else:
            raise ScenarioError(f"unknown scenario line {word!r}", lineno)
    if cur:
        sc.steps.append(cur)
    if not sc.source:
        raise ScenarioError("scenario has no source")
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), str(path))


def _algebra(text: str, inline: bool, t: int, n: int | None) -> Presentation:
    if inline:
        return dsl.parse(text, t=t, n=n)
    return catalog.get(text, t=t, n=n)


def _prop(name: str, T, p: Presentation):
    from .cohomology import h2_report
    from .derivations import derivation_space, inner_and_h1, is_complete
    from .identities import check_identities
    from .quotient import center

    if name == "h1_dim":
        return inner_and_h1(T).h1_dim
    if name == "h2_dim":
        return h2_report(T).h2_dim
    if name == "der_dim":
        return len(derivation_space(T))
    if name == "center_dim":
        return center(T).dim
    if name == "complete":
        return is_complete(T)["complete"]
    if name == "identities":
        return check_identities(p).status
    raise ValueError(name)


def _same(observed, expected: str) -> bool:
    if isinstance(observed, bool):
        return str(observed).lower() == expected.lower()
    if isinstance(observed, int):
        return observed == int(expected)
    return str(observed) == expected


def run_scenario(sc: Scenario, seed: int = 0) -> dict:
    """Replay the changes; ``ok`` is True when every expectation holds."""
    n = sc.level
    src = _algebra(sc.source, sc.inline, sc.t, n)
    rng = random.Random(f"{sc.name}:{seed}")
    fixed = {k: v for k, v in sc.bindings.items() if k in src.param_names}
    b = catalog.draw_bindings(src, rng, fix=fixed, nonzero=True)
    report: dict = {"scenario": sc.name, "mode": sc.mode, "level": n, "bindings": {k: qstr(v) for k, v in b.items()}}
    checks = []

    q = partial_bind(src, fixed) if fixed else src
    if sc.mode == SYMBOLIC:
        for lines in sc.steps:
            q = symbolic_change(q, parse_change(lines, q, ring=src.ring, numeric=fixed or None, consts={"n": n}))
        report["result"] = dsl.render(q)

    # numeric replay on the truncated table
    T = truncate(bind_params(src, b), n)
    for lines in sc.steps:
        T = apply_change(T, parse_change(lines, src, numeric=b, consts={"n": n}))
    final_p = q if sc.mode == SYMBOLIC else src

    if sc.target is not None:
        tgt = _algebra(sc.target, sc.target_inline, sc.t, n)
        tb = {}
        for name in tgt.param_names:
            tb[name] = b[name] if name in b else sc.bindings.get(name, catalog.draw_value(rng, [0]))
        E = truncate(bind_params(tgt, tb), n)
        d = diff_tables(T, E)
        checks.append({"check": f"diff_tables at n={n}", "ok": d == "Equal", "observed": _diff_json(d)})
        if sc.mode == SYMBOLIC:
            both = {k: v for k, v in sc.bindings.items() if k in tgt.param_names and k not in src.param_names}
            v = compare_presentations(q, partial_bind(tgt, both) if both else tgt)
            checks.append({"check": "symbolic table", "ok": v.proved, "observed": v.to_json()})
            qb = bind_params(q, {k: v for k, v in b.items() if k in q.param_names})
            d2 = diff_tables(truncate(qb, n), E)
            checks.append({"check": f"symbolic result at n={n}", "ok": d2 == "Equal", "observed": _diff_json(d2)})
    for name, expected in sc.props:
        obs = _prop(name, T, final_p)
        checks.append({"check": f"{name} = {expected}", "ok": _same(obs, expected), "observed": obs})
    report["checks"] = checks
    report["ok"] = all(c["ok"] for c in checks)
    return report


def _diff_json(d):
    if d == "Equal":
        return d
    return [{"pair": list(pair), "left": a, "right": b} for pair, a, b in d[:10]]


def shipped() -> list[Path]:
    from importlib.resources import files

    root = files(__package__) / "scenarios"
    return sorted(Path(str(root)).glob("*.scn"))
