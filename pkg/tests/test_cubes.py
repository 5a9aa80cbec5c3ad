import pytest

from workbench.cubes import (SliceCat, build_cube, cube_basechange_iso, downward_closed_everywhere,
                             fibres_complementable, global_points, inclusion, puncture, sections,
                             singleton_basechange_check, singleton_inclusion)
from workbench.lattice import atom_map_is_iso
from workbench.orbital import OrbitCat, disjoint_union, free_orbit, group_by_name, point, to_point


def slice_at_point(name):
    O = OrbitCat(group_by_name(name))
    return O, SliceCat(O, point(O.group))


def test_c2_free_fibre_table():
    O, S = slice_at_point("C2")
    cube = build_cube(O, to_point(free_orbit(O.group)), S)
    by_orbit = {O.name(S.levels[k][0]): n for k, n in cube.sizes().items()}
    assert by_orbit == {"C2/e": 4, "C2/C2": 2}


@pytest.mark.parametrize("name", ["C2", "C3", "C4", "S3"])
def test_free_cube_fibres(name):
    # the fibre at G/H is the powerset of the |G/H| orbits of G/H × G
    O, S = slice_at_point(name)
    G = O.group
    cube = build_cube(O, to_point(free_orbit(G)), S)
    assert cube.check_functorial()
    assert fibres_complementable(cube)
    for k in range(len(S)):
        n = S.source_set(k).size
        assert cube.n_orbits(k) == n
        assert len(cube.fibre(k)) == 2 ** n
        assert atom_map_is_iso(cube.fibre(k))


@pytest.mark.parametrize("name", ["C2", "C4", "S3"])
def test_global_points_are_bottom_and_top(name):
    O, S = slice_at_point(name)
    cube = build_cube(O, to_point(free_orbit(O.group)), S)
    pts = [x for _, x in global_points(cube)]
    assert pts == [frozenset(), frozenset({0})]


@pytest.mark.parametrize("name", ["C2", "C3", "S3"])
def test_singletons(name):
    O, S = slice_at_point(name)
    G = O.group
    w = to_point(free_orbit(G))
    cube = build_cube(O, w, S)
    phi = singleton_inclusion(O, w, cube)
    assert phi.is_natural() and phi.is_fully_faithful()
    assert downward_closed_everywhere(phi)
    for k in range(len(S)):
        # sections of the free orbit exist only over free levels, |G| of them
        expect = G.order if S.source_set(k).size == G.order else 0
        assert len(sections(S, k, w)) == expect


def test_punctured_cube_downward_closed():
    O, S = slice_at_point("C3")
    W = disjoint_union(free_orbit(O.group), point(O.group))[0]
    cube = build_cube(O, to_point(W), S)
    assert downward_closed_everywhere(inclusion(puncture(cube, "top"), cube))
    assert not downward_closed_everywhere(inclusion(puncture(cube, "bottom"), cube))


@pytest.mark.parametrize("name", ["C2", "S3"])
def test_basechange(name):
    O, _ = slice_at_point(name)
    w = to_point(free_orbit(O.group))
    for B in O.objects:
        iso = cube_basechange_iso(O, w, to_point(B))
        assert iso.is_iso()
        assert singleton_basechange_check(O, w, to_point(B))
