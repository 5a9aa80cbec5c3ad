import random

import pytest

from workbench import hoch
from workbench.chains import ChainComplex
from workbench.cubes import SliceCat
from workbench.orbital import point
from workbench.serialize import orbit_cat, parse_w


def setup(group, w="free"):
    O = orbit_cat(group)
    S = SliceCat(O, point(O.group))
    return O, S, parse_w(O, w)


def burnside(S, k, W):
    """Orbits of B × W at level B, by averaging fixed points."""
    B = S.source_set(k)
    G = B.group
    fix = lambda X, g: sum(1 for p in X.points if X.act[g][p] == p)
    return sum(fix(B, g) * fix(W, g) for g in G.elements) // G.order


SPHERES = [
    ("C2", "free", {"C2/e→[0, 0]": 1, "C2/C2→[0]": 0}),
    ("C3", "free", {"C3/e→[0, 0, 0]": 2, "C3/C3→[0]": 0}),
    ("S3", "orbit:1", {"S3/e→[0, 0, 0, 0, 0, 0]": 2, "S3/H1→[0, 0, 0]": 1, "S3/H2→[0, 0]": 0,
                       "S3/S3→[0]": 0}),
    ("C4", "free+pt", {"C4/e→[0, 0, 0, 0]": 4, "C4/H1→[0, 0]": 2, "C4/C4→[0]": 1}),
]


@pytest.mark.parametrize("group,w,dims", SPHERES)
def test_sphere_dims(group, w, dims):
    O, S, wm = setup(group, w)
    sd = hoch.sphere_dims(S, wm)
    assert sd.dims == dims
    assert sd.certified
    for k in range(len(S)):
        name = S.level_name(k)
        assert sd.orbit_counts[name] == burnside(S, k, wm.source)
        # the punctured n-cube with Q at the bottom has homology Q[n - 1]
        assert sd.homology[name] == {dims[name]: 1}


def test_sphere_certification_cap():
    _, S, w = setup("C3", "free+free")
    sd = hoch.sphere_dims(S, w, cert_cap=3)
    assert sd.certified is None
    assert sd.dims["C3/e→[0, 0, 0]"] == 5


@pytest.mark.parametrize("group", ["C2", "C3", "S3"])
def test_sphere_calculus(group):
    _, S, w = setup(group)
    r = hoch.sphere_calculus_check(S, w, w)
    assert r.ok


def test_representable_and_json():
    _, S, _ = setup("C2")
    X = hoch.representable(S, 0)
    assert [c.dims for c in X.objects] == [{0: 2}, {}]
    assert X.functoriality_witness() is None
    Y = hoch.CoefficientSystem.from_json(S, X.to_json())
    assert [c.dims for c in Y.objects] == [c.dims for c in X.objects]
    rng = random.Random(5)
    Z = hoch.random_system(rng, S, 6)
    assert Z.total_dim() <= 6 and Z.functoriality_witness() is None


def test_norm_trivial_group():
    _, S, w = setup("C1", "pt+pt+pt")
    rng = random.Random(1)
    for _ in range(3):
        X = hoch.random_system(rng, S, 4, degrees=(-1, 0, 1))
        assert all(nl.qiso for nl in hoch.norm_map(X, w))


@pytest.mark.parametrize("group,order", [("C2", 2), ("C3", 3)])
def test_norm_free_orbit(group, order):
    _, S, w = setup(group)
    X = hoch.unit_system(S)
    levels = hoch.norm_map(X, w)
    free, fixed = levels
    assert free.qiso and free.lower.homology() == {0: order}
    assert fixed.lower.homology() == {}
    assert fixed.upper.homology() == {0: 1}
    assert not fixed.qiso
    closed = hoch.closed_form_homology(X, w)
    assert all(closed[nl.level] == (nl.lower.homology(), nl.upper.homology()) for nl in levels)


def test_alpha_beta_and_aleph():
    _, S, w = setup("C2")
    X = hoch.unit_system(S)
    assert hoch.alpha_singleton_cocartesian(X, w).ok
    assert hoch.beta_singleton_cartesian(X, w).ok
    aleph = hoch.norm_cube_check(X, w)
    assert [k for k, v in aleph.items() if not v] == [("C2/C2→[0]", ())]


def test_unit_reports():
    _, S1, w1 = setup("C1", "pt+pt")
    assert all(r.qiso for r in hoch.unit_report(hoch.unit_system(S1), w1))
    _, S, w = setup("C2")
    free, fixed = hoch.unit_report(hoch.unit_system(S), w)
    assert free.qiso
    assert (fixed.source_homology, fixed.target_homology, fixed.qiso) == ({0: 1}, {0: 2}, False)
    _, S3, w3 = setup("C3")
    fixed3 = hoch.unit_report(hoch.unit_system(S3), w3)[1]
    assert fixed3.target_homology == {0: 2, 1: 1}


def test_loops_of_suspension_match_unit_target():
    _, S, w = setup("C2")
    rng = random.Random(8)
    for _ in range(3):
        X = hoch.random_system(rng, S, 4)
        Y = hoch.suspension_w(X, w)
        for k, r in enumerate(hoch.unit_report(X, w)):
            assert hoch.loop_w_level(Y, w, k).homology() == r.target_homology


def test_faithfulness_probe():
    _, S, w = setup("C2")
    p = hoch.faithfulness_probe(S, w, seed=0)
    assert p.found and p.witness.total_dim() <= 6
    assert p.failing_level == "C2/C2→[0]"
    again = hoch.faithfulness_probe(S, w, seed=0)
    assert again.witness.to_json() == p.witness.to_json()
    _, S1, w1 = setup("C1", "pt+pt")
    with pytest.raises(hoch.ExhaustedNoWitness):
        hoch.faithfulness_probe(S1, w1, seed=0, samples=5, require=True)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_stable_cubes(n):
    rng = random.Random(n)
    for _ in range(4):
        assert hoch.stable_cube_check(hoch.free_cube(rng, n)).consistent
    X = ChainComplex.concentrated(1)
    C = hoch.constant_cube(n, X)
    assert hoch.is_cartesian_cube(C) and hoch.is_cocartesian_cube(C)


@pytest.mark.parametrize("n", [2, 3])
def test_gluing(n):
    t = hoch.gluing_trial(random.Random(n), n)
    assert t.hypotheses and t.conclusion
    assert not t.control_hypotheses and not t.control_conclusion
