import itertools

import pytest
from hypothesis import given, settings, strategies as st

from workbench.lattice import (AmbiguousComplement, ExcisableStructure, FinLattice, LatticeError, NoComplement,
                               NotDisjoint, atom_map_is_iso, chain_lattice, check_distributive, check_galois,
                               complement, complement_decomposition, decomposition_round_trips,
                               decomposition_triple, diamond_m3, disjoint_partners, distributivity_witness,
                               face_colocalisation, face_map, induced_excisable, is_complementable,
                               join_galois_pair, lattice_from_json, lattice_to_json, pentagon_n5,
                               powerset_lattice, product_lattice, singleton_star, size_at_most,
                               smash_adjunctions_hold, smash_localization, smashing_subposet)


def fs(*xs):
    return frozenset(xs)


@pytest.mark.parametrize("n", range(0, 6))
def test_powerset_sizes(n):
    L = powerset_lattice(n)
    assert len(L) == 2 ** n
    # each element has n - |x| upper covers
    assert len(L.covers) == n * 2 ** max(n - 1, 0)
    assert L.bottom == frozenset() and L.top == frozenset(range(1, n + 1))


def test_powerset_meet_join_are_set_operations():
    L = powerset_lattice(3)
    for a, b in itertools.product(L.labels, repeat=2):
        assert L.meet(a, b) == a & b
        assert L.join(a, b) == a | b


def test_m3_is_not_distributive():
    L = diamond_m3()
    a, b, c = distributivity_witness(L)
    assert L.join(L.meet(a, c), L.meet(b, c)) != L.meet(L.join(a, b), c)
    assert not is_complementable(L)
    with pytest.raises(AmbiguousComplement):
        complement(L, "a")


def test_n5_and_chains_are_not_complementable():
    assert not check_distributive(pentagon_n5())
    L = chain_lattice(3)
    assert check_distributive(L)
    with pytest.raises(NoComplement):
        complement(L, 1)
    assert is_complementable(chain_lattice(2))


def test_complement_in_powerset():
    L = powerset_lattice(3)
    assert complement(L, fs(1, 2)) == fs(3)
    assert complement(L, L.bottom) == L.top


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_galois_pair_and_smash_adjunctions(n, data):
    L = powerset_lattice(n)
    x = data.draw(st.sampled_from(L.labels))
    assert check_galois(*join_galois_pair(L, x))
    s = smash_localization(L, x)
    assert smash_adjunctions_hold(s)
    assert len(s.Lx) == 2 ** len(x)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_decomposition_round_trips(n):
    L = powerset_lattice(n)
    for x in L.labels:
        assert decomposition_round_trips(L, x)
        fwd, _ = complement_decomposition(L, x)
        assert len(fwd.target) == len(L)


def test_product_of_boolean_is_boolean():
    P = product_lattice(powerset_lattice(1), powerset_lattice(2))
    assert len(P) == 8 and atom_map_is_iso(P)
    assert not atom_map_is_iso(chain_lattice(3))


def test_excisable_structures():
    L = powerset_lattice(3)
    s = singleton_star(L)
    assert len(s.subset) == 4
    assert len(size_at_most(L, 2).subset) == 7
    with pytest.raises(LatticeError) as e:
        ExcisableStructure(L, [fs(1, 2)])
    assert e.value.axiom == "downward closure"
    with pytest.raises(LatticeError):
        ExcisableStructure(L, [])
    # induced on L_x: meets with x
    sx = induced_excisable(L, s, fs(1, 2))
    assert sx.subset == {fs(), fs(1), fs(2)}


def test_faces():
    L = powerset_lattice(3)
    a = fs(1)
    ds = disjoint_partners(L, a)
    assert sorted(map(sorted, ds)) == [[], [2], [2, 3], [3]]
    t = decomposition_triple(L, a, fs(2))
    assert t.z == fs(3)
    with pytest.raises(NotDisjoint):
        decomposition_triple(L, a, fs(1, 2))
    phi = face_map(L, a, fs(2))
    assert set(phi.image()) == {fs(2), fs(1, 2)}
    assert check_galois(*face_colocalisation(L, a, fs(2)))
    assert len(smashing_subposet(L, a)) == 2


def test_json_round_trip():
    for L in (powerset_lattice(2), diamond_m3(), chain_lattice(4)):
        L2 = lattice_from_json(lattice_to_json(L))
        assert set(L2.labels) == set(L.labels)
        assert all(L.le(a, b) == L2.le(a, b) for a in L.labels for b in L.labels)


def test_non_lattice_rejected():
    # two incomparable maxima
    obj = {"elements": ["0", "a", "b"], "covers": [["0", "a"], ["0", "b"]]}
    with pytest.raises(LatticeError):
        lattice_from_json(obj, cls=FinLattice)
