import random

import pytest

from resolv import catalog
from resolv.presentation import bind_params
from resolv.quotient import truncate


@pytest.fixture
def rng():
    return random.Random(12345)


def bound(key, rng, n=None, **kw):
    p = catalog.get(key, n=n)
    return bind_params(p, catalog.draw_bindings(p, rng, nonzero=True, **kw))


def table(key, n, rng, **kw):
    e = catalog.entry(key)
    return truncate(bound(key, rng, n=n if e.needs_n else None, **kw), n)
