import random

import pytest

from workbench import chains
from workbench.chains import ChainComplex, ChainDiagram, ChainMap, ComplexError, identity_map
from workbench.lattice import powerset_lattice
from workbench.linalg import Mat


def sphere_like():
    # Q --0--> Q in degrees 1, 0 plus an acyclic pair in degrees 3, 2
    return ChainComplex({0: 1, 1: 1, 2: 1, 3: 1}, {3: Mat.eye(1)})


def test_homology_and_euler():
    C = sphere_like()
    assert C.homology() == {0: 1, 1: 1}
    assert C.euler() == 0
    assert C.shift(2).homology() == {2: 1, 3: 1}


def test_bad_differential():
    with pytest.raises(ComplexError):
        ChainComplex({0: 1, 1: 1, 2: 1}, {1: Mat.eye(1), 2: Mat.eye(1)})


def test_cone_of_identity_is_acyclic():
    rng = random.Random(3)
    for _ in range(10):
        C = chains.random_complex(rng, 5)
        assert identity_map(C).cone().is_acyclic()
        assert identity_map(C).is_qiso()


def test_chain_map_check():
    A = ChainComplex({0: 1, 1: 1}, {1: Mat.eye(1)})
    B = ChainComplex.concentrated(1, 0)
    with pytest.raises(ComplexError):
        ChainMap(A, B, {0: Mat.eye(1)})      # f∘d ≠ d∘f = 0 in degree 1
    f = ChainMap(B, A, {0: Mat.eye(1)})
    assert not f.is_qiso()
    assert f.cone().homology() == {1: 1}


def test_json_round_trip():
    C = chains.random_complex(random.Random(0), 6)
    D = ChainComplex.from_json(C.to_json())
    assert D.dims == C.dims and D.homology() == C.homology()


def test_punctured_square_suspends():
    L = powerset_lattice(2)
    shape = L.sub([x for x in L.labels if x != L.top])
    rng = random.Random(11)
    for _ in range(10):
        X = chains.random_complex(rng, 5)
        H = chains.hocolim_poset(ChainDiagram(shape, {L.bottom: X}, {}))
        assert H.homology() == {n + 1: v for n, v in X.homology().items()}


def test_constant_square_hocolim_and_holim():
    L = powerset_lattice(2)
    X = ChainComplex.concentrated(2)
    edges = {e: identity_map(X) for e in L.covers}
    D = ChainDiagram(L, {x: X for x in L.labels}, edges)
    assert chains.hocolim_to_colim_top(D, L.top).is_qiso()
    assert chains.holim_from_bottom(D, L.bottom).is_qiso()
    assert chains.holim_poset(D).homology() == {0: 2}


def test_holim_of_cospan_of_zeros_loops():
    # holim of (0 → X ← 0) is X shifted down by one
    L = powerset_lattice(2)
    shape = L.sub([x for x in L.labels if x != L.bottom])
    X = ChainComplex.concentrated(1, 0)
    H = chains.holim_poset(ChainDiagram(shape, {L.top: X}, {}))
    assert H.homology() == {-1: 1}
