"""Brute-force ground truth for small instances.

Two independent routes are provided. Closed forms (squeezed vacuum,
coherent state) and a Fock-space recursion for pure states
``N exp(a^T B a / 2 + c^T a)|0>`` (``a`` meaning creation operators) never
touch a hafnian. The tabulation helpers enumerate the library's own
probability formulas over a cutoff grid for consistency checks.
"""

import csv
import itertools
import math

import numpy as np

from .kernels import haf_enum, loop_haf_enum
from .state import prob_displaced, prob_pnr, prob_threshold

MAX_ORACLE_MODES = 3


def squeezed_vacuum_probability(n, tanh_r):
    """Photon-number distribution of single-mode squeezed vacuum."""
    if n % 2:
        return 0.0
    half = n // 2
    cosh_r = 1 / math.sqrt(1 - tanh_r**2)
    return math.comb(n, half) / 4**half * tanh_r**n / cosh_r


def poisson_probability(n, mean):
    return math.exp(-mean) * mean**n / math.factorial(n)


def fock_amplitudes(B, c=None, cutoff=16, normalize="exact"):
    """Fock amplitudes of ``exp(a^T B a / 2 + c^T a)|0>`` up to ``cutoff`` photons per mode.

    Uses ``sqrt(n_i) psi_n = c_i psi_{n-e_i} + sum_j B_ij sqrt(n_j - d_ij) psi_{n-e_i-e_j}``.

    Args:
        B (array): symmetric ``m x m`` matrix with singular values below 1
        c (array): linear coefficients, zero by default
        cutoff (int): largest photon number kept per mode
        normalize (str): ``"exact"`` fixes the vacuum amplitude from the
            singular values of ``B`` (zero ``c`` only); ``"sum"`` rescales the
            truncated vector to unit norm

    Returns:
        array: amplitude tensor of shape ``(cutoff + 1,) * m``
    """
    B = np.asarray(B, dtype=np.complex128)
    m = B.shape[0]
    c = np.zeros(m, dtype=np.complex128) if c is None else np.asarray(c, dtype=np.complex128)
    shape = (cutoff + 1,) * m
    psi = np.zeros(shape, dtype=np.complex128)
    psi[(0,) * m] = 1.0
    for n in sorted(itertools.product(range(cutoff + 1), repeat=m), key=sum):
        if not any(n):
            continue
        i = next(pos for pos, v in enumerate(n) if v)
        down = list(n)
        down[i] -= 1
        val = c[i] * psi[tuple(down)]
        for j in range(m):
            if down[j]:
                two = list(down)
                two[j] -= 1
                val += B[i, j] * math.sqrt(down[j]) * psi[tuple(two)]
        psi[n] = val / math.sqrt(n[i])
    if normalize == "exact":
        if np.any(c):
            raise ValueError("exact normalisation needs c = 0")
        sv = np.linalg.svd(B, compute_uv=False)
        psi *= np.prod(1 - sv**2) ** 0.25
    elif normalize == "sum":
        psi /= np.linalg.norm(psi)
    else:
        raise ValueError(f"unknown normalisation {normalize!r}")
    return psi


def fock_moments(psi):
    """Mean ``<a_i>``, ``<a_i^+ a_j>`` and ``<a_i a_j>`` (central) of a Fock tensor."""
    m = psi.ndim
    cutoff = psi.shape[0] - 1
    sq = np.sqrt(np.arange(1, cutoff + 1))

    def lower(vec, i):
        out = np.zeros_like(vec)
        src = [slice(None)] * m
        dst = [slice(None)] * m
        src[i] = slice(1, None)
        dst[i] = slice(0, -1)
        shape = [1] * m
        shape[i] = cutoff
        out[tuple(dst)] = vec[tuple(src)] * sq.reshape(shape)
        return out

    low = [lower(psi, i) for i in range(m)]
    mean = np.array([np.vdot(psi, low[i]) for i in range(m)])
    adag_a = np.array([[np.vdot(low[i], low[j]) for j in range(m)] for i in range(m)])
    a_a = np.array([[np.vdot(psi, lower(low[j], i)) for j in range(m)] for i in range(m)])
    adag_a = adag_a - np.outer(mean.conj(), mean)
    a_a = a_a - np.outer(mean, mean)
    return mean, adag_a, a_a


def fock_table(psi):
    """``{pattern: probability}`` from an amplitude tensor."""
    probs = np.abs(psi) ** 2
    return {tuple(int(v) for v in idx): float(probs[idx]) for idx in np.ndindex(probs.shape)}


def fock_distribution(state, cutoff, detector="pnr", max_total=None):
    """Tabulate the library's probability formulas for every pattern under ``cutoff``.

    Args:
        state (GaussianState): at most three modes
        cutoff (int): largest photon number per mode (ignored for threshold detectors)
        max_total (int): optionally skip patterns with more photons in total

    Returns:
        tuple[dict, float]: probabilities keyed by pattern, and their sum
    """
    if state.m > MAX_ORACLE_MODES:
        raise ValueError(f"oracle tabulation is limited to {MAX_ORACLE_MODES} modes")
    levels = range(2) if detector == "threshold" else range(cutoff + 1)
    table = {}
    for pattern in itertools.product(levels, repeat=state.m):
        if max_total is not None and sum(pattern) > max_total:
            continue
        if detector == "threshold":
            table[pattern] = prob_threshold(state, pattern)
        elif state.is_displaced:
            table[pattern] = prob_displaced(state, pattern)
        else:
            table[pattern] = prob_pnr(state, pattern)
    return table, float(sum(table.values()))


def threshold_marginals(table):
    """Collapse a photon-number table onto click patterns."""
    out = {}
    for pattern, p in table.items():
        clicks = tuple(int(s > 0) for s in pattern)
        out[clicks] = out.get(clicks, 0.0) + p
    return out


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def enumerate_haf(A):
    return haf_enum(A)


def enumerate_loop_haf(A):
    return loop_haf_enum(A)


def enumerate_signed_mixture(mixture, cutoff, detector="pnr"):
    """Weighted sum ``sum_i q_i p_i(S)`` of component tables over a cutoff grid."""
    total = {}
    for q, state in mixture.components:
        table, _ = fock_distribution(state, cutoff, detector)
        for pattern, p in table.items():
            total[pattern] = total.get(pattern, 0.0) + q * p
    return total


def write_table_csv(table, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pattern", "probability"])
        for pattern, p in sorted(table.items()):
            writer.writerow([" ".join(str(s) for s in pattern), repr(float(p))])


def read_table_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return {tuple(int(s) for s in row["pattern"].split()): float(row["probability"]) for row in reader}
