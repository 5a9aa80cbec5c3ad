from fractions import Fraction

from workbench.linalg import Mat, complement_basis, image_in, intersect, kron, parse_rational


def test_inverse_and_solve():
    A = Mat.from_rows([[2, 1], [1, 1]])
    assert A.inverse() == Mat.from_rows([[1, -1], [-1, 2]])
    b = Mat.from_rows([[3], [2]])
    assert A.solve(b) == Mat.from_rows([[1], [1]])
    assert Mat.from_rows([[1, 1], [1, 1]]).solve(Mat.from_rows([[1], [0]])) is None


def test_rank_nullspace():
    A = Mat.from_rows([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert A.rank() == 2
    K = A.nullspace()
    assert K.shape == (3, 1)
    assert (A @ K).is_zero()
    assert Mat.zeros(0, 4).rank() == 0
    assert Mat.zeros(2, 3).nullspace() == Mat.eye(3)


def test_rationals_are_exact():
    A = Mat.from_rows([["1/3", "1/6"], [0, "1/2"]])
    assert A.inverse() @ A == Mat.eye(2)
    assert parse_rational("-7/21") == Fraction(-1, 3)
    assert A.to_strings()[0] == ["1/3", "1/6"]


def test_one_sided_inverses():
    A = Mat.from_rows([[1, 0], [0, 1], [1, 1]])
    assert A.left_inverse() @ A == Mat.eye(2)
    assert A.T @ A.T.right_inverse() == Mat.eye(2)
    assert A.cokernel().shape == (1, 3)
    assert (A.cokernel() @ A).is_zero()


def test_kron_and_subspaces():
    a = Mat.from_rows([[1, 2]])
    b = Mat.from_rows([[0], [1]])
    assert kron(a, b) == Mat.from_rows([[0, 0], [1, 2]])
    U = Mat.from_rows([[1, 0], [0, 1], [0, 0]])
    V = Mat.from_rows([[0, 0], [1, 0], [0, 1]])
    I = intersect(U, V)
    assert I.cols == 1 and image_in(I, U) and image_in(I, V)
    C = complement_basis(U, 3)
    assert Mat.hstack([U, C]).rank() == 3


def test_blocks():
    M = Mat.blocks({(0, 0): Mat.eye(1), (1, 1): Mat.eye(2)}, [1, 2], [1, 2])
    assert M == Mat.eye(3)
    assert Mat.block_diag([Mat.eye(2), Mat.zeros(1, 1)]).rank() == 2
