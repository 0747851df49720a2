"""Built-in presentations and the classification facts attached to them."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from importlib.resources import files
from typing import Mapping

from . import dsl
from .exactla import Q, qstr
from .presentation import Presentation, PresentationError, bind_params, partial_bind


class UnknownKey(KeyError):
    pass


class BadArity(PresentationError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    key: str
    summary: str
    min_t: int | None = 3  # None: no tail parameters
    needs_n: bool = False
    min_n: int | None = None
    quotient_safe: bool = True
    expectations: tuple = ()

    def source(self) -> str:
        return (files(__package__) / "data" / f"{self.key}.dsl").read_text()


@dataclass(frozen=True)
class Expectation:
    """A machine-checkable fact: ``kind`` selects the computation, ``args`` its inputs."""

    kind: str
    args: Mapping = field(default_factory=dict)
    value: object = None

    def label(self) -> str:
        extra = ",".join(f"{k}={v}" for k, v in sorted(self.args.items()) if k != "map")
        return f"{self.kind}({extra})" if extra else self.kind


def _ex(kind, value, **args) -> Expectation:
    return Expectation(kind, args, value)


_MAPS = {
    "identity_tail": "map e(i) -> e(i) for i >= 2",
    "shift2_tail": "map e(i) -> e(i+2) for i >= 2",
    "r2_beta2_one": "map e(1) -> e(2)\nmap x -> sum(i, 2, t-1) of (beta[i+1])*e(i)",
    "r2_beta2_generic": (
        "map e(1) -> (alpha2/(beta2-1))*e(2)\n"
        "map e(i) -> e(i) for i >= 2\n"
        "map x -> sum(i, 2, t-1) of (alpha2*beta[i+1]/(beta2-1))*e(i)"
    ),
}

_ENTRIES = [
    CatalogEntry(
        "m0",
        "filiform Lie algebra m0: [e_i, e_1] = e_{i+1}, i >= 2",
        min_t=None,
        expectations=(_ex("residual", "Proved", field="residually_nilpotent"),),
    ),
    CatalogEntry(
        "F",
        "thin Leibniz algebra F: [e_i, e_1] = e_{i+1}, i >= 2",
        min_t=None,
        expectations=(_ex("residual", "Proved", field="residually_nilpotent"),),
    ),
    CatalogEntry(
        "exam1",
        "Lie algebra [e_0, e_i] = e_{i-1}, i >= 3",
        min_t=None,
        expectations=(
            _ex("residual", "Proved", field="residually_solvable"),
            _ex("residual", "Refuted", field="residually_nilpotent"),
        ),
    ),
    CatalogEntry(
        "exam2",
        "Lie algebra [e_i, e_j] = e_0 (series only; the tail is not an ideal)",
        min_t=None,
        quotient_safe=False,
        expectations=(
            _ex("residual", "Proved", field="residually_nilpotent"),
            _ex("residual", "Proved", field="residually_solvable"),
        ),
    ),
    CatalogEntry(
        "R1_m0_1",
        "one-dimensional extension of m0, normal form 1, beta_3..beta_t",
        expectations=(
            _ex("residual", "Proved", field="residually_solvable"),
            _ex("outer", True, map="identity_tail", n=8),
        ),
    ),
    CatalogEntry(
        "R2_m0_1",
        "one-dimensional extension of m0, normal form 2, alpha_2 and beta_2..beta_t",
        min_t=2,
        expectations=(
            _ex("residual", "Proved", field="residually_solvable"),
            _ex("outer", True, map="r2_beta2_one", n=8, fix={"beta2": 1}),
            _ex("outer", True, map="r2_beta2_generic", n=8, avoid={"beta2": 1}),
        ),
    ),
    CatalogEntry(
        "R3_m0_1",
        "one-dimensional extension of m0, normal form 3, beta_3..beta_t",
        expectations=(
            _ex("residual", "Proved", field="residually_solvable"),
            _ex("outer", True, map="shift2_tail", n=8),
        ),
    ),
    CatalogEntry(
        "R_m0_2",
        "two-dimensional extension of m0 by x, y",
        expectations=(
            _ex("residual", "Proved", field="residually_solvable"),
            _ex("complete", True, n=6),
        ),
    ),
    CatalogEntry(
        "R1_F_1",
        "one-dimensional extension of F, normal form 1, beta_2..beta_t",
        min_t=2,
        expectations=(
            _ex("residual", "Proved", field="residually_solvable"),
            _ex("outer", True, map="identity_tail", n=8),
        ),
    ),
    CatalogEntry(
        "R2_F_1",
        "one-dimensional extension of F, normal form 2, beta_3..beta_t",
        expectations=(
            _ex("residual", "Proved", field="residually_solvable"),
            _ex("complete", True, n=6),
        ),
    ),
    CatalogEntry(
        "R3_F_1",
        "one-dimensional extension of F, normal form 3, beta_3..beta_t",
        expectations=(
            _ex("residual", "Proved", field="residually_solvable"),
            _ex("outer", True, map="shift2_tail", n=8),
        ),
    ),
    CatalogEntry(
        "R_F_2",
        "two-dimensional extension of F by x, y",
        min_t=2,
        expectations=(
            _ex("residual", "Proved", field="residually_solvable"),
            _ex("complete", True, n=6),
        ),
    ),
    CatalogEntry(
        "Oprime",
        "finite solvable Leibniz algebra on e_1..e_n, x",
        min_t=None,
        needs_n=True,
        min_n=3,
        expectations=(
            _ex("complete", True, n=5),
            _ex("h2", 0, n=5),
        ),
    ),
]

CATALOG = {e.key: e for e in _ENTRIES}


def keys() -> list[str]:
    return list(CATALOG)


def entry(key: str) -> CatalogEntry:
    try:
        return CATALOG[key]
    except KeyError:
        raise UnknownKey(f"unknown catalog key {key!r}; known: {', '.join(CATALOG)}") from None


def listing() -> list[dict]:
    return [
        {
            "key": e.key,
            "summary": e.summary,
            "tail_parameter": e.min_t is not None,
            "needs_n": e.needs_n,
            "quotient_safe": e.quotient_safe,
        }
        for e in _ENTRIES
    ]


@lru_cache(maxsize=128)
def _parsed(key: str, t: int, n: int | None) -> Presentation:
    return dsl.parse(entry(key).source(), t=t, n=n)


def get(key: str, t: int = dsl.DEFAULT_T, bindings: Mapping | None = None, n: int | None = None,
        partial: bool = False) -> Presentation:
    """The catalog presentation ``key`` with tail length ``t`` (and size ``n`` where needed)."""
    e = entry(key)
    if e.min_t is not None and t < e.min_t:
        raise BadArity(f"{key} needs t >= {e.min_t}, got {t}")
    if e.needs_n:
        if n is None:
            raise BadArity(f"{key} needs the size n")
        if n < e.min_n:
            raise BadArity(f"{key} needs n >= {e.min_n}, got {n}")
    elif n is not None:
        n = None
    p = _parsed(key, t, n)
    if bindings:
        p = partial_bind(p, bindings) if partial else bind_params(p, bindings)
    return p


def derivation_map(name: str) -> str:
    return _MAPS[name]


def draw_value(rng: random.Random, avoid=()) -> object:
    """A small random rational p/q with p in [-9, 9], q in [1, 9], rejecting ``avoid``."""
    bad = {Q(a) for a in avoid}
    while True:
        v = Q(rng.randint(-9, 9)) / rng.randint(1, 9)
        if v not in bad:
            return v


def draw_bindings(p: Presentation, rng: random.Random, fix: Mapping | None = None, avoid: Mapping | None = None,
                  nonzero: bool = False) -> dict:
    """Random values for every parameter of ``p``; ``fix`` pins some, ``avoid`` rejects values."""
    fix = dict(fix or {})
    avoid = dict(avoid or {})
    out = {}
    for name in p.param_names:
        if name in fix:
            out[name] = Q(fix[name])
            continue
        bad = [avoid[name]] if name in avoid else []
        out[name] = draw_value(rng, bad + ([0] if nonzero else []))
    return out


def check_expectation(key: str, ex: Expectation, seed: int = 0, t: int = dsl.DEFAULT_T) -> dict:
    """Evaluate one attached fact; the result has ``ok``, ``expected`` and ``observed``."""
    from .derivations import is_complete, is_derivation, is_inner, parse_family
    from .cohomology import h2_report
    from .quotient import truncate
    from .tailspace import residual_classify

    rng = random.Random(f"{key}:{ex.label()}:{seed}")
    e = entry(key)
    n = ex.args.get("n")
    p = get(key, t=t, n=n if e.needs_n else None)
    b = draw_bindings(p, rng, ex.args.get("fix"), ex.args.get("avoid"))
    q = bind_params(p, b)
    if ex.kind == "residual":
        observed = residual_classify(q)[ex.args["field"]]
    elif ex.kind == "complete":
        observed = is_complete(truncate(q, n))["complete"]
    elif ex.kind == "h2":
        observed = h2_report(truncate(q, n)).h2_dim
    elif ex.kind == "outer":
        T = truncate(q, n)
        fam = parse_family(_MAPS[ex.args["map"]], p, numeric=b)
        d = fam.member(T, {})
        observed = bool(is_derivation(T, d) and is_inner(T, d) is None)
    else:
        raise ValueError(f"unknown expectation kind {ex.kind!r}")
    return {
        "expectation": ex.label(),
        "bindings": {k: qstr(v) for k, v in b.items()},
        "expected": ex.value,
        "observed": observed,
        "ok": observed == ex.value,
    }


def check_entry(key: str, seed: int = 0) -> list[dict]:
    return [check_expectation(key, ex, seed) for ex in entry(key).expectations]
