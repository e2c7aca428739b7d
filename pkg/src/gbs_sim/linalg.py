"""Dense complex linear algebra used throughout the simulator.

Reduced matrices follow one fixed ordering: every first-block index
(modes in ascending order, each repeated by its photon count) followed by
every second-block index in the same order.
"""

import numpy as np
from numba import njit

SINGULARITY_FLOOR = 1e-12


class SingularMatrix(np.linalg.LinAlgError):
    """Raised when a matrix is too close to singular to invert."""


def pattern_indices(pattern, m=None):
    """Row/column indices selected by a photon pattern.

    Args:
        pattern (array[int]): photon counts per mode
        m (int): mode count of the matrix being reduced; defaults to ``len(pattern)``

    Returns:
        array[int]: indices of length ``2 * sum(pattern)``
    """
    pattern = np.asarray(pattern, dtype=np.int64)
    if m is None:
        m = len(pattern)
    if pattern.ndim != 1 or len(pattern) != m:
        raise ValueError(f"pattern of length {len(pattern)} does not match {m} modes")
    if np.any(pattern < 0):
        raise ValueError("photon counts must be non-negative")
    first = np.repeat(np.arange(m), pattern)
    return np.concatenate([first, first + m])


def reduce_by_pattern(A, pattern):
    """Repeat rows and columns ``i`` and ``i + m`` of ``A`` ``pattern[i]`` times."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
        raise ValueError(f"expected a square 2m x 2m matrix, got shape {A.shape}")
    idx = pattern_indices(pattern, A.shape[0] // 2)
    return A[np.ix_(idx, idx)]


def reduce_vector_by_pattern(v, pattern):
    """Vector counterpart of :func:`reduce_by_pattern`."""
    v = np.asarray(v)
    if v.ndim != 1 or len(v) % 2:
        raise ValueError(f"expected a vector of even length, got shape {v.shape}")
    return v[pattern_indices(pattern, len(v) // 2)]


@njit(cache=True, nogil=True)
def _lu_det(A):
    n = A.shape[0]
    lu = A.copy()
    det = lu.dtype.type(1)
    for k in range(n):
        p = k
        best = abs(lu[k, k])
        for i in range(k + 1, n):
            if abs(lu[i, k]) > best:
                best = abs(lu[i, k])
                p = i
        if best == 0.0:
            return lu.dtype.type(0)
        if p != k:
            for j in range(n):
                tmp = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = tmp
            det = -det
        pivot = lu[k, k]
        det *= pivot
        for i in range(k + 1, n):
            f = lu[i, k] / pivot
            if f != 0:
                for j in range(k + 1, n):
                    lu[i, j] -= f * lu[k, j]
    return det


@njit(cache=True, nogil=True)
def _lu_det_batch(stack):
    out = np.empty(stack.shape[0], dtype=stack.dtype)
    for b in range(stack.shape[0]):
        out[b] = _lu_det(stack[b])
    return out


def lu_det(A):
    """Determinant by LU factorisation with partial pivoting.

    The determinant of a 0x0 matrix is 1; exactly singular input gives 0.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] == 0:
        return A.dtype.type(1) if A.dtype.kind in "fc" else 1.0
    dtype = np.complex128 if np.iscomplexobj(A) else np.float64
    return _lu_det(np.ascontiguousarray(A, dtype=dtype))


def lu_det_batch(stack):
    """Determinants of a stack of square matrices, shape ``(b, n, n)``."""
    stack = np.asarray(stack)
    dtype = np.complex128 if np.iscomplexobj(stack) else np.float64
    return _lu_det_batch(np.ascontiguousarray(stack, dtype=dtype))


def inverse(A, floor=SINGULARITY_FLOOR):
    """Matrix inverse that refuses near-singular input.

    Raises:
        SingularMatrix: if ``|det(A)|`` is below ``floor``
    """
    A = np.asarray(A)
    if A.shape[0] and abs(lu_det(A)) < floor:
        raise SingularMatrix(f"|det| below singularity floor {floor:g}")
    return np.linalg.inv(A)


def is_hermitian(A, tol=1e-10):
    A = np.asarray(A)
    return A.shape[0] == A.shape[1] and np.allclose(A, A.conj().T, rtol=0, atol=tol)


def is_symmetric(A, tol=1e-10):
    """Entrywise symmetry test ``|a_ij - a_ji| <= tol * max(1, |a_ij|)``."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    scale = np.maximum(1.0, np.abs(A))
    return bool(np.all(np.abs(A - A.T) <= tol * scale))


def is_positive_definite(A, tol=0.0):
    """True when the smallest eigenvalue of Hermitian ``A`` exceeds ``tol``."""
    A = np.asarray(A)
    if A.shape[0] == 0:
        return True
    return bool(np.linalg.eigvalsh((A + A.conj().T) / 2)[0] > tol)


def is_positive_semidefinite(A, tol=1e-8):
    """True when the smallest eigenvalue of Hermitian ``A`` is at least ``-tol``."""
    A = np.asarray(A)
    if A.shape[0] == 0:
        return True
    return bool(np.linalg.eigvalsh((A + A.conj().T) / 2)[0] >= -tol)


def min_entry(A):
    """Smallest real part over all entries; imaginary parts are not compared."""
    A = np.asarray(A)
    if A.size == 0:
        return np.inf
    return float(np.min(A.real))


def xmat(n):
    """Block swap ``[[0, 1], [1, 0]]`` of size 2n."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [eye, zero]])
