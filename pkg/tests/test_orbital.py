import pytest

from workbench.orbital import (GroupError, OrbitCat, brute_force_maps, check_atomic, coset_gset, cyclic_group,
                               diagonal_complement, disjoint_union, equivariant_maps, free_orbit, group_by_name,
                               pullback, to_point)

# conjugacy classes of subgroups
SUBGROUP_CLASSES = {"C1": 1, "C2": 2, "C3": 2, "C4": 3, "S3": 4}


def burnside_orbits(X, Y):
    """Orbits of X × Y by the counting lemma, straight from the permutations."""
    G = X.group
    total = 0
    for g in G.elements:
        fx = sum(1 for p in X.points if X.act[g][p] == p)
        fy = sum(1 for p in Y.points if Y.act[g][p] == p)
        total += fx * fy
    assert total % G.order == 0
    return total // G.order


@pytest.mark.parametrize("name", sorted(SUBGROUP_CLASSES))
def test_orbit_category_sizes(name):
    O = OrbitCat(group_by_name(name))
    assert len(O) == SUBGROUP_CLASSES[name]
    assert O.objects[O.terminal].size == 1
    assert check_atomic(O)[0]


@pytest.mark.parametrize("name", ["C2", "C3", "C4", "S3"])
def test_equivariant_maps_match_brute_force(name):
    O = OrbitCat(group_by_name(name))
    for X in O.objects:
        for Y in O.objects:
            fast = sorted(m.map for m in equivariant_maps(X, Y))
            slow = sorted(m.map for m in brute_force_maps(X, Y))
            assert fast == slow
            # |Hom(G/H, G/K)| = |(G/K)^H|
            H = X.orbits[0][1]
            assert len(fast) == len(Y.fixed_points(H))


@pytest.mark.parametrize("name", ["C2", "C4", "S3"])
def test_pullback_orbits_by_counting(name):
    O = OrbitCat(group_by_name(name))
    for X in O.objects:
        for Y in O.objects:
            P, p1, p2 = pullback(to_point(X), to_point(Y))
            assert P.size == X.size * Y.size
            assert len(P.orbits) == burnside_orbits(X, Y)


@pytest.mark.parametrize("name", ["C2", "C3", "S3"])
def test_diagonal_complement_sizes(name):
    G = group_by_name(name)
    O = OrbitCat(G)
    for X in O.objects:
        for Y in O.objects:
            W = disjoint_union(X, Y)[0]
            C, c, cbar = diagonal_complement(to_point(W))
            assert C.size + W.size == W.size ** 2
            assert all(c(p) != cbar(p) for p in C.points)


def test_s3_free_orbit():
    G = group_by_name("S3")
    W = free_orbit(G)
    assert W.size == 6 and W.is_transitive()
    assert len(coset_gset(G, G.generated([1])).points) in (2, 3)


def test_bad_group_tables():
    with pytest.raises(GroupError):
        from workbench.orbital import FiniteGroup
        FiniteGroup([[0, 1], [0, 1]])
    assert cyclic_group(5).order == 5
