from __future__ import annotations

import json
import math

import pytest

from kplan import CONCURRENT, SEQUENTIAL, load, optimistic_plans, secure_plans
from kplan.corpus import (
    DATA_DIR, PROVENANCE_TAGS, Fixture, FixtureError, fixture_from_dict, list_fixtures, load_fixture,
    run_fixture,
)

FIXTURES = list_fixtures()

WORLD_VS_KNOWLEDGE = [("bt", "btk"), ("btc", "btck"), ("btuc", "btuck"), ("bmtc", "bmtck"),
                      ("bmtuc", "bmtuck")]


@pytest.mark.parametrize("fx", FIXTURES, ids=lambda f: f.name)
def test_fixture_passes(fx):
    report = run_fixture(fx)
    assert report.passed, str(report)
    assert report.checks == len(fx.checks) > 0


@pytest.mark.parametrize("fx", FIXTURES, ids=lambda f: f.name)
def test_every_expectation_has_provenance(fx):
    assert all(c["provenance"] in PROVENANCE_TAGS for c in fx.checks)


def test_fixture_coverage():
    names = {fx.name for fx in FIXTURES}
    for required in ("sussman", "blocks-incomplete", "yale", "monkey-banana",
                     "monkey-banana-incomplete", "rocket"):
        assert required in names
    for world, knowledge in WORLD_VS_KNOWLEDGE:
        for p in (1, 2, 3):
            for t in (1, 2):
                assert f"{world}-p{p}-t{t}" in names and f"{knowledge}-p{p}-t{t}" in names


def test_load_by_name():
    assert load_fixture("sussman").name == "sussman"
    assert run_fixture("rocket").passed


def test_failing_expectation_is_reported():
    fx = load_fixture("sussman")
    bad = Fixture(fx.name, fx.domain, fx.background, fx.mode, fx.planning, fx.plan_length,
                  ({"check": "count", "value": 2, "provenance": "derived"},), fx.path)
    report = run_fixture(bad)
    assert not report.passed and "expected 2 plans, got 1" in str(report)


def test_missing_fixture_file(tmp_path):
    with pytest.raises(FixtureError, match="not found"):
        load_fixture(tmp_path / "nope.json")


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(FixtureError, match="malformed"):
        load_fixture(p)


@pytest.mark.parametrize("d,match", [
    ({"domain": "yale.k", "checks": []}, "missing"),
    ({"name": "x", "domain": "yale.k", "checks": [{"check": "bogus", "provenance": "derived"}]}, "unknown check"),
    ({"name": "x", "domain": "yale.k", "checks": [{"check": "count", "value": 1}]}, "provenance"),
])
def test_malformed_fixture_dicts(d, match):
    with pytest.raises(FixtureError, match=match):
        fixture_from_dict(d)


def test_missing_domain_file(tmp_path):
    p = tmp_path / "fx.json"
    p.write_text(json.dumps({"name": "x", "domain": "absent.k", "checks": []}))
    with pytest.raises(FixtureError, match="not found"):
        run_fixture(p)


def test_fixture_relative_to_its_own_directory(tmp_path):
    (tmp_path / "d.k").write_text("fluents: f. initially: f. goal: f ? (0)")
    p = tmp_path / "fx.json"
    p.write_text(json.dumps({"name": "local", "domain": "d.k", "plan_length": 0, "checks": [
        {"check": "count", "value": 1, "provenance": "trivial"}]}))
    assert run_fixture(p).passed


# -- world-state vs knowledge-state encodings ------------------------------------------------

def _bomb(name, p, t):
    return load((DATA_DIR / f"{name}.k").read_text(), (DATA_DIR / f"bomb_p{p}_t{t}.bg").read_text())


def _length_and_mode(world, p, t):
    if world == "bt":
        return [(1, CONCURRENT), (p, SEQUENTIAL)]
    if world in ("btc", "btuc"):
        return [(2 * p - 1, SEQUENTIAL), (2 * p - 2, SEQUENTIAL)]
    n = 2 * math.ceil(p / t) - 1
    return [(n, CONCURRENT), (n - 1, CONCURRENT)]


@pytest.mark.parametrize("world,knowledge", WORLD_VS_KNOWLEDGE)
@pytest.mark.parametrize("p,t", [(p, t) for p in (1, 2, 3) for t in (1, 2)])
def test_world_and_knowledge_encodings_agree(world, knowledge, p, t):
    gw, gk = _bomb(world, p, t), _bomb(knowledge, p, t)
    for n, mode in _length_and_mode(world, p, t):
        if n < 0:
            continue
        sw = {pl.key() for pl in secure_plans(gw, mode=mode, plan_length=n)}
        sk = {pl.key() for pl in secure_plans(gk, mode=mode, plan_length=n)}
        assert sw == sk
        ok = {pl.key() for pl, _ in optimistic_plans(gk, mode=mode, plan_length=n)}
        assert ok == sk
