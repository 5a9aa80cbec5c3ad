import pytest

from workbench.chains import ChainComplex, ChainMap
from workbench.eicat import Cat, EIError, Functor, hocolim_ei, holim_ei
from workbench.linalg import Mat


def cyclic_cat(n):
    """One object with automorphism group C_n; morphism k is the generator to the k."""
    comp = {(g, f): (g + f) % n for g in range(n) for f in range(n)}
    return Cat(1, [0] * n, [0] * n, comp, [0])


def rep(C, n, sign):
    X = ChainComplex.concentrated(1)
    maps = {k: ChainMap(X, X, {0: Mat.from_rows([[sign ** k]])}) for k in range(n)}
    return Functor(C, [X], maps)


@pytest.mark.parametrize("n", [2, 3])
def test_rational_group_homology_trivial(n):
    C = cyclic_cat(n)
    F = rep(C, n, 1)
    assert F.check()
    assert holim_ei(F)[0].homology() == {0: 1}
    assert hocolim_ei(F)[0].homology() == {0: 1}


def test_sign_representation_is_invisible_rationally():
    C = cyclic_cat(2)
    F = rep(C, 2, -1)
    assert holim_ei(F)[0].homology() == {}
    assert hocolim_ei(F)[0].homology() == {}


def test_arrow_category():
    # 0 → 1: holim is the value at the source, hocolim the value at the target
    comp = {(0, 0): 0, (1, 1): 1, (2, 0): 2, (1, 2): 2}
    C = Cat(2, [0, 1, 0], [0, 1, 1], comp, [0, 1])
    X, Y = ChainComplex.concentrated(1), ChainComplex.concentrated(2)
    f = ChainMap(X, Y, {0: Mat.from_rows([[1], [0]])})
    F = Functor(C, [X, Y], {0: ChainMap(X, X, {0: Mat.eye(1)}), 1: ChainMap(Y, Y, {0: Mat.eye(2)}), 2: f})
    assert F.check()
    assert holim_ei(F)[0].homology() == {0: 1}
    assert hocolim_ei(F)[0].homology() == {0: 2}


def test_non_ei_rejected():
    # an idempotent non-identity endomorphism
    comp = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1}
    C = Cat(1, [0, 0], [0, 0], comp, [0])
    with pytest.raises(EIError):
        C.check_ei()
