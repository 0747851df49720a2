import pytest

from resolv.scenario import ScenarioError, load_scenario, parse_scenario, run_scenario, shipped

SHIPPED = shipped()


def test_scenarios_are_shipped():
    assert len(SHIPPED) >= 8


@pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.stem)
def test_shipped_scenarios_pass(path):
    r = run_scenario(load_scenario(path), seed=0)
    assert r["ok"], [c for c in r["checks"] if not c["ok"]]


def test_wrong_change_is_caught():
    text = load_scenario([p for p in SHIPPED if p.stem == "m0_case2"][0]).path
    src = open(text).read().replace("e(1)' = e(1) - alpha2*e(2)", "e(1)' = e(1) + alpha2*e(2)")
    r = run_scenario(parse_scenario(src), seed=0)
    assert not r["ok"]


def test_parse_errors():
    with pytest.raises(ScenarioError):
        parse_scenario("scenario a\nchange x' = x\n")
    with pytest.raises(ScenarioError):
        parse_scenario("source m0\nfrobnicate\n")
    with pytest.raises(ScenarioError):
        parse_scenario("source\n algebra a kind lie\n")


def test_property_only_scenario():
    sc = parse_scenario("scenario p\nsource R_m0_2\nlevel 6\nexpect h1_dim = 0\nexpect center_dim = 0\n")
    r = run_scenario(sc)
    assert r["ok"]
    assert [c["observed"] for c in r["checks"]] == [0, 0]
