import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from amc_mimo.errors import InvalidInputError, SingularMatrixError
from amc_mimo.numerics import (
    collapse_vector,
    expand_matrix,
    expand_vector,
    gram,
    min_eigenvalue_sym,
    solve_dense,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def complex_arrays(shape):
    return st.tuples(arrays(float, shape, elements=finite), arrays(float, shape, elements=finite)).map(
        lambda p: p[0] + 1j * p[1]
    )


# gram

def test_gram_scalar():
    assert gram(np.array([[1.0]])) == pytest.approx(np.array([[1.0]]))


def test_gram_row_with_imaginary_unit():
    np.testing.assert_allclose(gram(np.array([[1, 1j]])), [[2.0]])


def test_gram_orthogonal_rows():
    np.testing.assert_allclose(gram(np.array([[1, 1], [1, -1]])), 2 * np.eye(2))


def test_gram_rejects_empty():
    with pytest.raises(InvalidInputError):
        gram(np.zeros((0, 3)))


def test_gram_hermitian_psd(rng):
    for _ in range(20):
        H = rng.standard_normal((5, 9)) + 1j * rng.standard_normal((5, 9))
        Z = gram(H)
        np.testing.assert_array_equal(Z, Z.conj().T)
        assert np.linalg.eigvalsh(Z).min() >= -1e-10


# expansion

def test_expand_real_scalar():
    np.testing.assert_array_equal(expand_matrix(np.array([[1.0]])), np.eye(2))


def test_expand_imaginary_unit():
    np.testing.assert_array_equal(expand_matrix(np.array([[1j]])), [[0, -1], [1, 0]])


def test_expand_vector_definition():
    np.testing.assert_array_equal(expand_vector(np.array([1 + 2j])), [1, 2])
    np.testing.assert_array_equal(collapse_vector(np.array([1.0, 2.0])), [1 + 2j])


def test_collapse_odd_length():
    with pytest.raises(InvalidInputError):
        collapse_vector(np.ones(3))


def test_expand_vector_batch_matches_columns(rng):
    V = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    E = expand_vector(V)
    for j in range(4):
        np.testing.assert_array_equal(E[:, j], expand_vector(V[:, j]))


def test_hermitian_product_through_expansion(rng):
    H = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    y = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    lhs = expand_matrix(H.conj().T) @ expand_vector(y)
    np.testing.assert_allclose(lhs, expand_vector(H.conj().T @ y), atol=1e-12)


@pytest.mark.property
@given(complex_arrays((3, 4)), complex_arrays((4, 2)), complex_arrays((3, 4)))
def test_expansion_homomorphism(A, B, C):
    np.testing.assert_allclose(expand_matrix(A @ B), expand_matrix(A) @ expand_matrix(B), atol=1e-12 * 400)
    np.testing.assert_allclose(expand_matrix(A + C), expand_matrix(A) + expand_matrix(C), atol=1e-12)
    np.testing.assert_array_equal(expand_matrix(A.conj().T), expand_matrix(A).T)


@pytest.mark.property
@given(complex_arrays((5,)))
def test_vector_round_trip(v):
    np.testing.assert_array_equal(collapse_vector(expand_vector(v)), v)


# solve_dense

def test_solve_identity():
    np.testing.assert_allclose(solve_dense(np.eye(3), [1, 2, 3]), [1, 2, 3])


def test_solve_diagonal():
    np.testing.assert_allclose(solve_dense(2 * np.eye(2), [1, 1]), [0.5, 0.5])


def test_solve_singular():
    with pytest.raises(SingularMatrixError):
        solve_dense(np.ones((3, 3)), np.ones(3))


def test_solve_rejects_nan():
    with pytest.raises(InvalidInputError):
        solve_dense(np.array([[np.nan]]), [1.0])


def _residual_ok(A, b, x):
    res = np.abs(A @ x - b).max()
    bound = 1e-9 * (np.abs(A).sum(axis=1).max() * np.abs(x).max() + np.abs(b).max())
    # backward-error bounds only hold above the underflow threshold
    return res <= bound + 10 * np.finfo(float).tiny


def test_solve_random_8x8(rng):
    A = rng.standard_normal((8, 8)) + 8 * np.eye(8)
    b = rng.standard_normal(8)
    assert _residual_ok(A, b, solve_dense(A, b))


@pytest.mark.property
@given(arrays(float, (6, 6), elements=st.floats(-1, 1)), arrays(float, 6, elements=finite))
def test_solve_residual_bound(E, b):
    A = E + 7 * np.eye(6)  # strictly diagonally dominant, well conditioned
    assert _residual_ok(A, b, solve_dense(A, b))


# min_eigenvalue_sym

def test_min_eig_examples():
    assert min_eigenvalue_sym(np.diag([2.0, 4.0])) == pytest.approx(2, rel=1e-6)
    assert min_eigenvalue_sym(np.eye(5)) == pytest.approx(1, rel=1e-6)
    assert min_eigenvalue_sym(np.array([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx(1, rel=1e-6)


def test_min_eig_indefinite():
    assert min_eigenvalue_sym(np.diag([3.0, -2.0, 1.0])) == pytest.approx(-2, rel=1e-6)


def test_min_eig_symmetrizes():
    A = np.array([[2.0, 2.0], [0.0, 2.0]])  # symmetric part [[2,1],[1,2]]
    assert min_eigenvalue_sym(A) == pytest.approx(1, rel=1e-6)


def test_min_eig_rejects_inf():
    with pytest.raises(InvalidInputError):
        min_eigenvalue_sym(np.array([[np.inf]]))


@pytest.mark.property
@given(st.integers(1, 6).flatmap(lambda n: arrays(float, (n, n), elements=finite)))
def test_min_eig_matches_eigh(A):
    S = 0.5 * (A + A.T)
    expected = np.linalg.eigvalsh(S).min()
    # relative to the matrix scale: an eigenvalue near zero has no
    # meaningful relative accuracy of its own
    scale = max(abs(expected), np.abs(S).max(), 1e-300)
    assert abs(min_eigenvalue_sym(A) - expected) <= 1e-6 * scale
