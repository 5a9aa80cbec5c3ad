import pytest

from workbench.serialize import InputError
from workbench.suite import PROPERTIES, PropertyResult, SuiteConfig, replay, run_property, run_suite


def test_config_validation():
    with pytest.raises(InputError):
        SuiteConfig(groups=("A5",)).validate()
    with pytest.raises(InputError):
        SuiteConfig(max_cube_dim=99).validate()
    SuiteConfig(groups=("C2", "S3")).validate()


def test_results_serialise_without_timings():
    r = PropertyResult("x", cases=3, seconds=1.5)
    assert "seconds" not in r.to_json()
    assert r.to_json(timings=True)["seconds"] == 1.5
    r.fail("broken", {"kind": "complex"})
    assert r.status == "fail" and r.details["violations"] == ["broken"]


def test_property_names():
    assert len(PROPERTIES) == 11


def test_failed_property_gets_replayable_witness(monkeypatch):
    def broken(cfg, rng, res):
        res.cases += 1
        res.fail("always")
    monkeypatch.setitem(PROPERTIES, "broken", broken)
    cfg = SuiteConfig()
    r = run_property("broken", cfg)
    assert r.witness["kind"] == "property" and r.witness["config"] == cfg.to_json()
    assert replay(r.witness) == (True, "always")


def test_replay_rejects_junk():
    with pytest.raises(InputError):
        replay({"kind": "nope"})
    with pytest.raises(InputError):
        replay({"kind": "norm"})


def test_small_suite_passes():
    rep = run_suite(SuiteConfig(only=("lattice-laws", "orbital-base", "complement-decomposition")))
    assert rep.ok
    assert rep.to_json() == run_suite(SuiteConfig(only=("lattice-laws", "orbital-base",
                                                        "complement-decomposition"))).to_json()
