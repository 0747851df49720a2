"""Acceptance criteria; each test prints one PASS/FAIL line."""

import json

import pytest

from resolv.acceptance import TITLES, run


@pytest.mark.parametrize("k", sorted(TITLES), ids=lambda k: f"criterion_{k:02d}")
def test_criterion(k, capsys):
    r = run(k, seed=0)
    with capsys.disabled():
        print(f"\n[{'PASS' if r['ok'] else 'FAIL'}] criterion {k}: {r['title']} ({r['seconds']}s)")
    assert r["ok"], json.dumps(r["details"], default=str)[:4000]
