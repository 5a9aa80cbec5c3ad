"""The eleven acceptance criteria, each run at its stated time bound.

One line per criterion is printed in the terminal summary.
"""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from workbench.serialize import TEST_GROUPS
from workbench.suite import SuiteConfig, replay, run_property

SEED = 0

CRITERIA = [
    # (number, property, groups, seconds)
    (1, "lattice-laws", ("C2",), 1),
    (2, "complement-decomposition", ("C2",), 1),
    (3, "face-transport", ("C2",), 30),
    (4, "excisive-approximation", ("C2",), 10),
    (5, "orbital-base", TEST_GROUPS, 5),
    (6, "cubes-singletons", TEST_GROUPS, 30),
    (7, "homotopy-engine", ("C2",), 60),
    (8, "sphere-calculus", TEST_GROUPS, 60),
    (9, "norm", ("C2", "C3"), 60),
    (10, "faithfulness-probe", ("C2",), 120),
    (11, "colimit-decomposition", ("C2",), 10),
]


def extra_checks(name, r):
    """Criterion-specific requirements beyond a passing status."""
    d = r.details
    if name == "face-transport":
        assert r.cases >= 200
        assert all(t > 0 for _, t in d["checks"].values())
        assert all(int(s.split("/")[0]) > 0 for s in d["mutation_detection"].values())
    elif name == "norm":
        assert any("norm not invertible" in p for p in r.predicted)
    elif name == "faithfulness-probe":
        w = d["C2:witness"]
        assert w["kind"] == "unit"
        reproduced, _ = replay(w)
        assert reproduced
    elif name == "colimit-decomposition":
        assert r.cases == 100
    elif name == "homotopy-engine":
        assert r.cases >= 125


@pytest.mark.parametrize("num,name,groups,bound", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(num, name, groups, bound):
    cfg = SuiteConfig(groups=groups, seed=SEED)
    cfg.validate()
    t = time.perf_counter()
    r = run_property(name, cfg)
    elapsed = time.perf_counter() - t
    ok = r.status == "pass"
    try:
        if ok:
            extra_checks(name, r)
    except AssertionError:
        ok = False
    in_time = elapsed < bound
    verdict = "PASS" if ok and in_time else "FAIL"
    note = f"; {len(r.predicted)} predicted" if r.predicted else ""
    ACCEPTANCE_LINES.append(f"[{verdict}] {num:2d} {name:26} cases={r.cases:<4} {elapsed:7.2f}s < {bound}s{note}")
    print(ACCEPTANCE_LINES[-1])
    assert r.status == "pass", r.details.get("violations")
    extra_checks(name, r)
    assert in_time, f"{name} took {elapsed:.2f}s, bound {bound}s"
