import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gbs_sim.linalg import (
    SingularMatrix,
    inverse,
    is_positive_definite,
    lu_det,
    lu_det_batch,
    min_entry,
    pattern_indices,
    reduce_by_pattern,
    reduce_vector_by_pattern,
    xmat,
)


def cofactor_det(A):
    n = A.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return A[0, 0]
    total = 0
    for j in range(n):
        minor = np.delete(np.delete(A, 0, axis=0), j, axis=1)
        total += (-1) ** j * A[0, j] * cofactor_det(minor)
    return total


def rand_complex(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def test_reduce_drops_the_only_mode():
    assert reduce_by_pattern(np.ones((2, 2)), [0]).shape == (0, 0)


def test_reduce_all_ones_is_identity():
    A = np.arange(36.0).reshape(6, 6)
    np.testing.assert_array_equal(reduce_by_pattern(A, [1, 1, 1]), A)


def test_reduce_hand_example():
    # 1-indexed a_ij = 10 i + j, m = 2, S = (2, 0) keeps rows/cols (1, 1, 3, 3)
    A = np.array([[10 * i + j for j in range(1, 5)] for i in range(1, 5)], dtype=float)
    keep = np.array([1, 1, 3, 3]) - 1
    np.testing.assert_array_equal(reduce_by_pattern(A, [2, 0]), A[np.ix_(keep, keep)])


def test_reduce_vector_examples():
    a, b, c, d = 1.0, 2.0, 3.0, 4.0
    assert reduce_vector_by_pattern(np.array([a, b]), [0]).size == 0
    np.testing.assert_array_equal(reduce_vector_by_pattern(np.array([a, b]), [3]), [a, a, a, b, b, b])
    np.testing.assert_array_equal(reduce_vector_by_pattern(np.array([a, b, c, d]), [1, 2]), [a, b, b, c, d, d])


def test_reduce_shape_errors():
    with pytest.raises(ValueError):
        reduce_by_pattern(np.ones((4, 4)), [1, 1, 1])
    with pytest.raises(ValueError):
        reduce_vector_by_pattern(np.ones(3), [1])
    with pytest.raises(ValueError):
        pattern_indices([1, -1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=4), st.integers(0, 2**32 - 1))
def test_reduce_properties(pattern, seed):
    rng = np.random.default_rng(seed)
    m = len(pattern)
    A = rand_complex(rng, 2 * m)
    A = A + A.T
    R = reduce_by_pattern(A, pattern)
    assert R.shape == (2 * sum(pattern),) * 2
    np.testing.assert_array_equal(R, R.T)
    np.testing.assert_array_equal(reduce_by_pattern(R, [1] * sum(pattern)), R)


def test_lu_det_examples():
    assert lu_det(np.eye(5)) == pytest.approx(1.0)
    assert lu_det(np.diag([2, 3j])) == pytest.approx(6j)
    assert lu_det(np.zeros((0, 0))) == 1.0
    assert lu_det(np.zeros((3, 3))) == 0


def test_lu_det_against_cofactor():
    rng = np.random.default_rng(0)
    for _ in range(10):
        A = rand_complex(rng, 5)
        ref = cofactor_det(A)
        assert abs(lu_det(A) - ref) < 1e-10 * abs(ref)


def test_det_is_multiplicative():
    rng = np.random.default_rng(1)
    for _ in range(10):
        A, B = rand_complex(rng, 6), rand_complex(rng, 6)
        lhs, rhs = lu_det(A @ B), lu_det(A) * lu_det(B)
        assert abs(lhs - rhs) < 1e-8 * abs(rhs)


def test_lu_det_batch_matches_single():
    rng = np.random.default_rng(2)
    stack = np.stack([rand_complex(rng, 4) for _ in range(7)])
    np.testing.assert_allclose(lu_det_batch(stack), [lu_det(A) for A in stack], rtol=1e-12)


def test_inverse():
    np.testing.assert_allclose(inverse(np.eye(3)), np.eye(3))
    rng = np.random.default_rng(3)
    A = rand_complex(rng, 4) + 4 * np.eye(4)
    np.testing.assert_allclose(A @ inverse(A), np.eye(4), atol=1e-8)
    with pytest.raises(SingularMatrix):
        inverse(np.zeros((2, 2)))


def test_predicates():
    assert not is_positive_definite(np.diag([1.0, -0.1]))
    assert is_positive_definite(np.eye(3))
    assert min_entry(np.array([[1.0, -2.0], [0.5, 3.0]])) == -2.0
    X = xmat(2)
    np.testing.assert_array_equal(X @ X, np.eye(4))
