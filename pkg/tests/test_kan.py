import random

import pytest

from workbench import kan
from workbench.kan import PosetDiagramV, colim_v, is_cartesian, is_cocartesian, lim_v, lkan
from workbench.lattice import powerset_lattice, singleton_star, size_at_most
from workbench.linalg import Mat

P2 = powerset_lattice(2)
E, A, B, T = P2.labels


def square(dims, edges):
    return PosetDiagramV(P2, dict(zip(P2.labels, dims)), edges)


def test_pushout_of_two_inclusions():
    # Q → Q², Q → Q  glued along the first coordinate
    D = PosetDiagramV(P2.sub([E, A, B]), {E: 1, A: 2, B: 1},
                      {(E, A): Mat.from_rows([[1], [0]]), (E, B): Mat.eye(1)})
    assert colim_v(D).dim == 2
    X = lkan(P2, [E, A, B], D)
    assert X.dims[T] == 2
    assert is_cocartesian(X, singleton_star(P2))
    assert is_cartesian(X)


def test_limit_of_cospan():
    D = PosetDiagramV(P2.sub([A, B, T]), {A: 1, B: 1, T: 1}, {(A, T): Mat.eye(1), (B, T): Mat.eye(1)})
    assert lim_v(D).dim == 1
    D0 = PosetDiagramV(P2.sub([A, B, T]), {A: 1, B: 1, T: 0}, {})
    assert lim_v(D0).dim == 2


def test_constant_square_is_both():
    I = Mat.eye(2)
    X = square([2, 2, 2, 2], {(E, A): I, (E, B): I, (A, T): I, (B, T): I})
    assert is_cartesian(X) and is_cocartesian(X, singleton_star(P2))


def test_zero_top_square_not_cartesian():
    I = Mat.eye(1)
    X = square([1, 1, 1, 0], {(E, A): I, (E, B): I})
    assert not is_cartesian(X)
    assert not is_cocartesian(X, singleton_star(P2))


def test_functoriality_checked():
    with pytest.raises(kan.DiagramError):
        square([1, 1, 1, 1], {(E, A): Mat.eye(1), (E, B): Mat.eye(1), (A, T): Mat.eye(1),
                              (B, T): Mat.eye(1).scale(2)})


@pytest.mark.parametrize("n", [1, 2, 3])
def test_theta_for_constants(n):
    L = powerset_lattice(n)
    s = singleton_star(L)
    for k in (0, 1, 3):
        F = kan.Constant(k)
        assert kan.theta(F, L, s, 2).is_invertible()
        assert kan.t_sigma(F, L, s, 2) == k
        assert kan.p_sigma(F, L, s, 2).stage == 0


@pytest.mark.parametrize("spec", ["identity", "sum:2", "tensor:2", "sym2"])
def test_t_sigma_kills_reduced_functors(spec):
    L = powerset_lattice(2)
    assert kan.t_sigma(kan.functor_from_spec(spec), L, singleton_star(L), 2) == 0


def test_functor_dims():
    assert kan.TensorPower(2).obj(3) == 9
    assert kan.SymmetricSquare().obj(3) == 6
    assert kan.functor_from_spec("sum:3∘tensor:2").obj(2) == 12


def test_excisiveness():
    L = powerset_lattice(2)
    s = singleton_star(L)
    assert kan.check_excisive(kan.Identity(), L, s, samples=20, seed=1, mode="jointly-injective").ok
    # the tensor square is not 1-excisive
    r = kan.check_excisive(kan.TensorPower(2), L, s, samples=20, seed=1, mode="jointly-injective")
    assert r.passed == 14 and r.witness is not None


def test_semiadditive_square():
    assert kan.semiadditive_square_check(2, 1).comparison_iso
    r = kan.semiadditive_square_check(1, 1, kan.TensorPower(2))
    assert r.pushout and not r.comparison_iso and r.dims == (4, 2)


def test_rezk_on_cocartesian_samples():
    rng = random.Random(4)
    L = powerset_lattice(2)
    s = singleton_star(L)
    for _ in range(4):
        D = kan.random_cocartesian(rng, L, s, max_dim=2, mode="injective")
        r = kan.rezk_factorization(kan.TensorPower(2), L, s, D)
        assert r.cartesian and r.composite_ok


@pytest.mark.parametrize("n", [2, 3])
def test_face_transport_and_mutations(n):
    rng = random.Random(n)
    L = powerset_lattice(n)
    rep = kan.FaceReport()
    detected = 0
    for j in range(8):
        s = singleton_star(L) if j % 2 else size_at_most(L, n - 1)
        X = kan.random_cocartesian(rng, L, s, max_dim=2, mode=kan.SAMPLE_MODES[j % 3])
        kan.face_transport_check(X, L, s, functors=(kan.Identity(),), report=rep)
        if X.dims[L.bottom] and any(X.dims[a] for a in L.atoms):
            detected += not is_cocartesian(kan.zero_out_of_bottom(X, L), s)
    assert rep.ok
    assert detected > 0


def test_colimit_decomposition_on_slice_covers():
    rng = random.Random(0)
    for m, n in ((1, 1), (1, 2), (2, 1)):
        shape, cover = kan.punctured_cube_slice_cover(m, n)
        D = kan.random_general_diagram(rng, shape, 2)
        r = kan.appendix_colim_decomposition(cover, D)
        assert r.iso and r.direct == r.decomposed == colim_v(D).dim


def test_bad_cover_rejected():
    shape, cover = kan.span_cover_of_punctured_square()
    cover.pieces["b"] = frozenset([E])
    with pytest.raises(kan.CoverError):
        cover.validate(shape)


def test_diagram_json_round_trip():
    X = kan.random_general_diagram(random.Random(2), P2, 2)
    Y = kan.diagram_from_json(X.to_json())
    assert Y.dims == X.dims and all(Y.map(a, b) == X.map(a, b) for a, b in P2.covers)
