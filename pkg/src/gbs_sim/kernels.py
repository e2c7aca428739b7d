"""Hafnian-family matrix functions.

Exact routines come in pairs: a brute-force enumeration over perfect
matchings (capped in size, used as ground truth) and a power-trace
algorithm that runs in ``O(n^3 2^n)`` for a ``2n x 2n`` input.

The power-trace routines pair vertex ``i`` with ``i + n``. Weighting pair
``i`` by ``d_i`` (``D = diag(d, d)``), the ``x^n`` coefficient ``f(d)`` of
``exp(sum_j tr((X A D)^j) x^j / 2j)`` is a polynomial of total degree ``n``
in ``d`` whose ``prod d_i^(s_i)`` coefficient is ``Haf / prod s_i!`` when
pair ``i`` is repeated ``s_i`` times. That coefficient is read off with a
discrete Fourier transform over ``d_i`` on the ``(s_i + 1)``-th roots of
unity: ``prod(s_i + 1)`` eigenvalue problems, ``2^n`` for a plain hafnian.
The total-degree constraint rules out aliasing. Unlike the equivalent
inclusion-exclusion over subsets, the transform does not cancel
catastrophically for large ``s_i``. The loop is serial, so sums are
reproducible.
"""

import math

import numpy as np
from numba import njit

from .linalg import SINGULARITY_FLOOR, lu_det, lu_det_batch

ORACLE_CAP = 12


class InvalidState(ValueError):
    """Raised when a covariance matrix does not describe a physical state."""


def _check_square(A):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def _matchings(vertices, A):
    if not vertices:
        return 1
    first, rest = vertices[0], vertices[1:]
    total = 0
    for pos, partner in enumerate(rest):
        total += A[first][partner] * _matchings(rest[:pos] + rest[pos + 1:], A)
    return total


def _loop_matchings(vertices, A):
    if not vertices:
        return 1
    first, rest = vertices[0], vertices[1:]
    total = A[first][first] * _loop_matchings(rest, A)
    for pos, partner in enumerate(rest):
        total += A[first][partner] * _loop_matchings(rest[:pos] + rest[pos + 1:], A)
    return total


def haf_enum(A, cap=ORACLE_CAP):
    """Hafnian by explicit sum over perfect matchings.

    Args:
        A (array): symmetric matrix of even dimension at most ``cap``
        cap (int): largest dimension accepted

    Returns:
        complex: the hafnian; 1 for the empty matrix
    """
    A = _check_square(A)
    n = A.shape[0]
    if n % 2:
        raise ValueError("hafnian needs an even-dimensional matrix")
    if n > cap:
        raise ValueError(f"dimension {n} exceeds the enumeration cap {cap}")
    return complex(_matchings(tuple(range(n)), A.tolist()))


def loop_haf_enum(A, cap=ORACLE_CAP):
    """Loop hafnian by recursion: vertex 0 either takes its loop or pairs up."""
    A = _check_square(A)
    if A.shape[0] > cap:
        raise ValueError(f"dimension {A.shape[0]} exceeds the enumeration cap {cap}")
    return complex(_loop_matchings(tuple(range(A.shape[0])), A.tolist()))


@njit(cache=True, nogil=True)
def _power_trace_levels(A, loops, use_loops, reps, levels):
    # A is 2k x 2k with pairs (i, i + k). Pairs 0..k-2 stand for reps[i] > 0
    # identical pairs; the last pair is read off at every count 0..levels-1.
    k = A.shape[0] // 2
    n_pre = 0
    for i in range(k - 1):
        n_pre += reps[i]
    n = n_pre + levels - 1
    size = 2 * k
    totals = np.zeros(levels, dtype=np.complex128)
    scales = np.zeros(levels)
    radix = np.empty(k, dtype=np.int64)
    for i in range(k - 1):
        radix[i] = reps[i] + 1
    radix[k - 1] = levels
    w = np.zeros(k, dtype=np.int64)
    d = np.empty(size, dtype=np.complex128)
    B = np.empty((size, size), dtype=np.complex128)
    coeff = np.empty(n + 1, dtype=np.complex128)
    coeff_abs = np.empty(n + 1)
    weights = np.zeros(n + 1, dtype=np.complex128)
    weights_abs = np.zeros(n + 1)
    first = True
    while True:
        if not first:
            # advance the mixed-radix counter w over prod(radix) values
            pos = 0
            while pos < k and w[pos] == radix[pos] - 1:
                w[pos] = 0
                pos += 1
            if pos == k:
                break
            w[pos] += 1
        first = False
        phase = 1.0 + 0.0j
        for i in range(k):
            angle = 2.0 * np.pi * w[i] / radix[i]
            d[i] = np.cos(angle) + 1j * np.sin(angle)
            d[i + k] = d[i]
            if i < k - 1:
                # conjugate of d_i ** reps[i]
                phase *= np.cos(angle * reps[i]) - 1j * np.sin(angle * reps[i])
        # B = X A D
        for r in range(size):
            src = r + k if r < k else r - k
            for q in range(size):
                B[r, q] = A[src, q] * d[q]
        eig = np.linalg.eigvals(B)
        pw = np.ones(size, dtype=np.complex128)
        pw_abs = np.ones(size)
        eig_abs = np.abs(eig)
        for j in range(1, n + 1):
            pw *= eig
            pw_abs *= eig_abs
            weights[j] = 0.5 * pw.sum()
            weights_abs[j] = 0.5 * pw_abs.sum()
        if use_loops:
            # t_j = v^T X D (A X D)^(j-1) v, with A X D = X B X
            xdv = _swap_halves(loops, k) * d
            y = loops.copy()
            for j in range(1, n + 1):
                weights[j] += 0.5 * j * (xdv * y).sum()
                weights_abs[j] += 0.5 * j * (np.abs(xdv) * np.abs(y)).sum()
                y = _swap_halves(B @ _swap_halves(y, k), k)
        coeff[0] = 1.0
        coeff_abs[0] = 1.0
        for j in range(1, n + 1):
            acc = 0.0 + 0.0j
            acc_abs = 0.0
            for t in range(1, j + 1):
                acc += weights[t] * coeff[j - t]
                acc_abs += weights_abs[t] * coeff_abs[j - t]
            coeff[j] = acc / j
            coeff_abs[j] = acc_abs / j
        angle = 2.0 * np.pi * w[k - 1] / levels
        for j in range(levels):
            # homogeneity: level j sits in the coefficient of x^(n_pre + j)
            totals[j] += phase * (np.cos(angle * j) - 1j * np.sin(angle * j)) * coeff[n_pre + j]
            # same series built from |eigenvalues|: bounds the magnitudes that cancel
            scales[j] += coeff_abs[n_pre + j]
    norm = 1.0 / levels
    for i in range(k - 1):
        norm *= math.gamma(reps[i] + 1.0) / (reps[i] + 1)
    for j in range(levels):
        f = norm * math.gamma(j + 1.0)
        totals[j] *= f
        scales[j] *= f
    return totals, scales


@njit(cache=True, nogil=True)
def _power_trace_sum(A, loops, use_loops, reps):
    # every pair has reps[i] > 0; the last pair plays the read-off role
    k = A.shape[0] // 2
    if k == 0:
        return 1.0 + 0.0j, 1.0
    last = reps[k - 1]
    totals, scales = _power_trace_levels(A, loops, use_loops, reps[: k - 1], last + 1)
    return totals[last], scales[last]


@njit(cache=True, nogil=True)
def _swap_halves(y, c):
    out = np.empty_like(y)
    for r in range(2 * c):
        out[r] = y[r + c] if r < c else y[r - c]
    return out


def _reps_array(reps, k):
    reps = np.asarray(reps, dtype=np.int64)
    if reps.shape != (k,):
        raise ValueError(f"need {k} repetition counts, got shape {reps.shape}")
    if np.any(reps < 0):
        raise ValueError("repetition counts must be non-negative")
    return reps


def _drop_empty(A, reps, loops):
    k = len(reps)
    keep = np.flatnonzero(reps)
    sel = np.concatenate([keep, keep + k])
    A = np.ascontiguousarray(A[np.ix_(sel, sel)], dtype=np.complex128)
    return A, np.ascontiguousarray(loops[sel]), np.ascontiguousarray(reps[keep])


def haf_repeated(A, reps, return_scale=False):
    """Hafnian of ``A`` with rows/columns ``i`` and ``i + k`` repeated ``reps[i]`` times.

    Equal to ``haf_fast(reduce_by_pattern(A, reps))`` but runs over
    ``prod(reps[i] + 1)`` points instead of ``2^sum(reps)`` subsets.

    Args:
        A (array): ``2k x 2k`` symmetric matrix
        reps (array): non-negative repetition count per pair
        return_scale (bool): also return a magnitude bound of the summed terms;
            ``eps * scale`` estimates the rounding error

    Returns:
        complex or tuple[complex, float]
    """
    A = _check_square(A)
    if A.shape[0] % 2:
        raise ValueError("hafnian needs an even-dimensional matrix")
    k = A.shape[0] // 2
    reps = _reps_array(reps, k)
    A, loops, reps = _drop_empty(A, reps, np.zeros(2 * k, dtype=np.complex128))
    total, scale = _power_trace_sum(A, loops, False, reps)
    return (complex(total), float(scale)) if return_scale else complex(total)


def loop_haf_repeated(A, reps, loops, return_scale=False):
    """Loop hafnian of the repeated matrix with loop weights ``loops`` (length 2k, repeated alike)."""
    A = _check_square(A)
    if A.shape[0] % 2:
        raise ValueError("loop hafnian with repetitions needs a 2k x 2k matrix")
    k = A.shape[0] // 2
    reps = _reps_array(reps, k)
    loops = np.ascontiguousarray(loops, dtype=np.complex128)
    if loops.shape != (2 * k,):
        raise ValueError(f"need {2 * k} loop weights")
    A, loops, reps = _drop_empty(A, reps, loops)
    total, scale = _power_trace_sum(A, loops, True, reps)
    return (complex(total), float(scale)) if return_scale else complex(total)


def haf_levels(A, reps, levels, loops=None):
    """Repeated (loop) hafnians for every count ``0..levels-1`` of the last pair.

    Pairs ``0..k-2`` are repeated ``reps[i]`` times and the last pair ``j``
    times. All counts come out of one transform over ``prod(reps[i] + 1) * levels``
    points, instead of one transform per count.

    Args:
        A (array): ``2k x 2k`` symmetric matrix, ``k >= 1``
        reps (array): repetition counts of the first ``k - 1`` pairs
        levels (int): number of counts of the last pair
        loops (array): loop weights of length ``2k``; plain hafnians if omitted

    Returns:
        tuple[array, array]: complex hafnians and their magnitude bounds, indexed by count
    """
    A = _check_square(A)
    if A.shape[0] % 2 or A.shape[0] == 0:
        raise ValueError("need a non-empty 2k x 2k matrix")
    if levels < 1:
        raise ValueError("need at least one level")
    k = A.shape[0] // 2
    reps = np.append(_reps_array(reps, k - 1), 1)
    use_loops = loops is not None
    if use_loops:
        loops = np.ascontiguousarray(loops, dtype=np.complex128)
        if loops.shape != (2 * k,):
            raise ValueError(f"need {2 * k} loop weights")
    else:
        loops = np.zeros(2 * k, dtype=np.complex128)
    A, loops, reps = _drop_empty(A, reps, loops)
    return _power_trace_levels(A, loops, use_loops, reps[:-1], int(levels))


def haf_fast(A):
    """Hafnian of a symmetric even-dimensional matrix in ``O(n^3 2^n)``.

    Diagonal entries never enter a perfect matching and are ignored.
    """
    A = _check_square(A)
    if A.shape[0] % 2:
        raise ValueError("hafnian needs an even-dimensional matrix")
    A = np.array(A, dtype=np.complex128)
    np.fill_diagonal(A, 0)
    n = A.shape[0] // 2
    return complex(_power_trace_sum(A, np.zeros(2 * n, dtype=np.complex128), False, np.ones(n, dtype=np.int64))[0])


def loop_haf(A):
    """Loop hafnian: perfect matchings where vertex ``i`` may pair with itself at weight ``a_ii``.

    Odd dimensions are handled by appending an isolated vertex with loop weight 1.
    """
    A = _check_square(A)
    A = np.array(A, dtype=np.complex128)
    if A.shape[0] % 2:
        A = np.pad(A, ((0, 1), (0, 1)))
        A[-1, -1] = 1.0
    loops = np.ascontiguousarray(np.diag(A).copy())
    np.fill_diagonal(A, 0)
    n = A.shape[0] // 2
    return complex(_power_trace_sum(A, loops, True, np.ones(n, dtype=np.int64))[0])


def hafnian(A, loop=False):
    """Dispatch to :func:`haf_fast` or :func:`loop_haf`."""
    return loop_haf(A) if loop else haf_fast(A)


def torontonian(O, floor=SINGULARITY_FLOOR):
    """Torontonian of a reduced ``2k x 2k`` matrix ``O = 1 - Q^-1``.

    Inclusion-exclusion over subsets ``Z`` of the k detected modes:
    ``sum_Z (-1)^(k - |Z|) / sqrt(det(1 - O_Z))``. Divided by ``sqrt(det Q)``
    this is the probability that every mode in the pattern clicks.

    Raises:
        InvalidState: if a subset determinant is non-positive or below ``floor``
    """
    O = _check_square(O)
    if O.shape[0] % 2:
        raise ValueError("torontonian needs a 2k x 2k matrix")
    k = O.shape[0] // 2
    if k == 0:
        return 1.0 + 0.0j
    dets = _subset_dets(np.asarray(O, dtype=np.complex128))
    # mask 0 is the empty subset with determinant 1
    bad = (dets.real <= 0) | (np.abs(dets) < floor)
    if np.any(bad[1:]):
        raise InvalidState("subset determinant of 1 - O is not positive")
    sizes = np.array([bin(mask).count("1") for mask in range(1 << k)])
    signs = np.where((k - sizes) % 2, -1.0, 1.0)
    return complex(np.sum(signs / np.sqrt(dets)))


@njit(cache=True, nogil=True)
def _subset_dets(O):
    k = O.shape[0] // 2
    out = np.empty(1 << k, dtype=np.complex128)
    out[0] = 1.0
    idx = np.empty(2 * k, dtype=np.int64)
    for mask in range(1, 1 << k):
        c = 0
        for i in range(k):
            if (mask >> i) & 1:
                idx[c] = i
                c += 1
        size = 2 * c
        M = np.empty((size, size), dtype=np.complex128)
        for r in range(size):
            rr = idx[r] if r < c else idx[r - c] + k
            for s in range(size):
                ss = idx[s] if s < c else idx[s - c] + k
                M[r, s] = (1.0 if r == s else 0.0) - O[rr, ss]
        out[mask] = np.linalg.det(M)
    return out


def haf_barvinok(A, M, rng, tol=1e-12):
    """Monte Carlo hafnian of a non-negative matrix.

    Each draw takes a skew-symmetric ``G`` with standard normal entries
    above the diagonal and evaluates ``det(W)`` with ``W_ij = G_ij sqrt(a_ij)``;
    the mean over ``M`` draws is an unbiased estimate of ``Haf(A)``.

    Args:
        A (array): non-negative symmetric matrix of even dimension
        M (int): number of determinant draws
        rng (numpy.random.Generator): random source

    Returns:
        tuple[float, float]: estimate and its standard error
    """
    A = _check_square(A)
    if A.shape[0] % 2:
        raise ValueError("hafnian needs an even-dimensional matrix")
    if M < 1:
        raise ValueError("need at least one Monte Carlo draw")
    A = np.asarray(A)
    if np.iscomplexobj(A):
        if np.any(np.abs(A.imag) > tol * np.maximum(1.0, np.abs(A.real))):
            raise ValueError("Monte Carlo hafnian needs a real matrix")
        A = A.real
    if np.any(A < -tol):
        raise ValueError("Monte Carlo hafnian needs non-negative entries")
    dim = A.shape[0]
    if dim == 0:
        return 1.0, 0.0
    root = np.sqrt(np.clip(A, 0.0, None))
    upper = np.triu(np.ones((dim, dim), dtype=bool), 1)
    G = np.zeros((M, dim, dim))
    G[:, upper] = rng.standard_normal((M, int(upper.sum())))
    G -= G.transpose(0, 2, 1)
    dets = lu_det_batch(G * root)
    estimate = float(dets.mean())
    stderr = float(dets.std(ddof=1) / math.sqrt(M)) if M > 1 else 0.0
    return estimate, stderr


def sqrt_det(Q):
    """Principal square root of ``det(Q)`` for a Hermitian positive matrix."""
    d = complex(lu_det(np.asarray(Q, dtype=np.complex128)))
    if d.real <= 0:
        raise InvalidState("covariance determinant is not positive")
    return math.sqrt(d.real)
