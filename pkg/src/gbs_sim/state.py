"""Gaussian states in the complex-amplitude picture and their output probabilities.

Covariances are stored for the amplitude vector ``xi = (a_1..a_m, a_1^+..a_m^+)``
with entries ``Sigma_ij = <{xi_i^+, xi_j}>/2 - <xi_i^+><xi_j>``, so the
upper-left block is ``<a_i^+ a_j> + 1/2`` and the upper-right block is
``<a_i^+ a_j^+>``. A pure state ``exp(a^T B a / 2)|0>`` (``a`` meaning creation
operators here) then has kernel ``A = B (+) B*``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .kernels import InvalidState, haf_levels, haf_repeated, loop_haf_repeated, sqrt_det, torontonian
from .linalg import (
    inverse,
    is_positive_definite,
    is_positive_semidefinite,
    is_symmetric,
    reduce_by_pattern,
    xmat,
)

HERMITIAN_TOL = 1e-10
VALIDITY_TOL = 1e-8
NONNEG_TOL = 1e-10
CLAMP_TOL = 1e-9
ROUNDOFF_FACTOR = 256


@dataclass(frozen=True)
class DisplacementData:
    """Per-reduction data for displaced states.

    ``alpha_vec`` is ``(mean, mean*)``, ``gamma`` supplies the loop weights
    and ``norm`` is the Gaussian envelope ``exp(-alpha Q^-1 alpha^+ / 2) / sqrt(det Q)``
    (the factorials of a pattern are divided out separately).
    """

    alpha_vec: np.ndarray
    gamma: np.ndarray
    norm: float


@dataclass(frozen=True)
class ReducedKernel:
    """Matrices of the first ``k`` modes of a state."""

    k: int
    Q: np.ndarray
    O: np.ndarray
    A: np.ndarray
    sqrt_det_Q: float
    displacement: DisplacementData | None = None


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Gaussian state of ``m`` bosonic modes.

    Args:
        sigma (array): ``2m x 2m`` complex covariance matrix
        mean (array): complex mean amplitudes, length ``m``
        validate (bool): check hermiticity and the uncertainty relation
    """

    sigma: np.ndarray
    mean: np.ndarray = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=np.complex128)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
            raise InvalidState(f"covariance must be 2m x 2m, got shape {sigma.shape}")
        m = sigma.shape[0] // 2
        mean = np.zeros(m, dtype=np.complex128) if self.mean is None else np.array(self.mean, dtype=np.complex128)
        if mean.shape != (m,):
            raise InvalidState(f"mean must have length {m}, got shape {mean.shape}")
        sigma.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mean", mean)
        if self.validate:
            problems = self.validity_problems()
            if problems:
                raise InvalidState("; ".join(problems))

    @property
    def m(self):
        return self.sigma.shape[0] // 2

    @property
    def Q(self):
        return self.sigma + np.eye(2 * self.m) / 2

    @property
    def is_displaced(self):
        return bool(np.any(self.mean != 0))

    def validity_problems(self):
        """Return a list of violated physicality conditions (empty when valid)."""
        problems = []
        scale = max(1.0, float(np.max(np.abs(self.sigma)))) if self.sigma.size else 1.0
        if not np.allclose(self.sigma, self.sigma.conj().T, rtol=0, atol=HERMITIAN_TOL * scale):
            problems.append("covariance is not Hermitian")
            return problems
        z = np.diag(np.concatenate([np.ones(self.m), -np.ones(self.m)]))
        if not is_positive_semidefinite(self.sigma + z / 2, VALIDITY_TOL):
            problems.append("covariance violates the uncertainty relation")
        if not is_positive_definite(self.sigma):
            problems.append("covariance is not positive definite")
        return problems

    def is_valid(self):
        return not self.validity_problems()

    def kernel(self):
        """Full kernel ``A = X (1 - Q^-1)``."""
        return self.reduced(self.m).A

    def mean_photons(self):
        """Expected total photon number."""
        m = self.m
        return float(np.sum(self.sigma.diagonal()[:m].real - 0.5) + np.sum(np.abs(self.mean) ** 2))

    def reduced(self, k):
        """Covariance, ``O``, kernel and displacement data of the first ``k`` modes."""
        m = self.m
        if not 0 <= k <= m:
            raise ValueError(f"k={k} outside 0..{m}")
        idx = np.r_[0:k, m:m + k]
        Qk = self.Q[np.ix_(idx, idx)]
        Qinv = inverse(Qk)
        Ok = np.eye(2 * k) - Qinv
        Ak = xmat(k) @ Ok
        sdet = sqrt_det(Qk)
        disp = None
        if self.is_displaced:
            alpha_vec = np.concatenate([self.mean[:k], self.mean[:k].conj()])
            gamma = Qinv.conj() @ alpha_vec
            quad = (alpha_vec @ Qinv @ alpha_vec.conj()).real
            disp = DisplacementData(alpha_vec, gamma, math.exp(-quad / 2) / sdet)
        return ReducedKernel(k, Qk, Ok, Ak, sdet, disp)

    def with_mean(self, mean):
        return GaussianState(self.sigma, mean, validate=False)

    def to_dict(self):
        return {
            "m": self.m,
            "sigma_re": self.sigma.real.ravel().tolist(),
            "sigma_im": self.sigma.imag.ravel().tolist(),
            "mean_re": self.mean.real.tolist(),
            "mean_im": self.mean.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data, validate=True):
        m = int(data["m"])
        sigma = np.asarray(data["sigma_re"], dtype=float) + 1j * np.asarray(data.get("sigma_im", 0.0), dtype=float)
        sigma = np.broadcast_to(sigma, (4 * m * m,)) if sigma.ndim == 0 else sigma
        sigma = sigma.reshape(2 * m, 2 * m)
        mean_re = np.asarray(data.get("mean_re", np.zeros(m)), dtype=float)
        mean_im = np.asarray(data.get("mean_im", np.zeros(m)), dtype=float)
        return cls(sigma, mean_re + 1j * mean_im, validate=validate)


def vacuum(m):
    return GaussianState(np.eye(2 * m) / 2)


def _from_b(B, mean=None):
    m = B.shape[0]
    A = np.block([[B, np.zeros((m, m))], [np.zeros((m, m)), B.conj()]])
    Q = np.linalg.inv(np.eye(2 * m) - xmat(m) @ A)
    Q = (Q + Q.conj().T) / 2
    return GaussianState(Q - np.eye(2 * m) / 2, mean)


def from_symmetric_b(B, mean=None):
    """Pure state ``exp(a^T B a / 2)|0>`` for symmetric ``B`` with singular values below 1."""
    B = np.asarray(B, dtype=np.complex128)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("B must be square")
    if not is_symmetric(B, 1e-10):
        raise ValueError("B must be symmetric")
    if B.size and np.linalg.svd(B, compute_uv=False)[0] >= 1:
        raise InvalidState("singular values of B must lie below 1")
    return _from_b(B, mean)


def from_squeezing_and_unitary(r, U):
    """Squeezed vacua with parameters ``r`` sent through interferometer ``U``.

    Builds ``B = U diag(tanh r) U^T``; a scalar ``r`` squeezes every mode equally.
    """
    U = np.asarray(U, dtype=np.complex128)
    m = U.shape[0]
    if U.shape != (m, m) or not np.allclose(U.conj().T @ U, np.eye(m), rtol=0, atol=1e-8):
        raise ValueError("U must be unitary")
    r = np.broadcast_to(np.asarray(r, dtype=float), (m,))
    B = U @ np.diag(np.tanh(r)) @ U.T
    return from_symmetric_b(B)


def from_adjacency(adj, scale):
    """Encode a non-negative symmetric matrix as ``B = scale * adj`` (real kernel ``B (+) B``)."""
    adj = np.asarray(adj, dtype=float)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or not np.allclose(adj, adj.T):
        raise ValueError("adjacency matrix must be square and symmetric")
    if np.any(adj < 0):
        raise ValueError("adjacency matrix must be non-negative")
    if adj.size and scale * np.linalg.norm(adj, 2) >= 1:
        raise InvalidState("scale too large: singular values of scale * adj must lie below 1")
    return _from_b(scale * adj)


def _graph_mean_photons(sv, c):
    t2 = (c * sv) ** 2
    return float(np.sum(t2 / (1 - t2)))


def auto_scale(adj, target_mean_photons, rtol=1e-3):
    """Scale ``c`` so that ``from_adjacency(adj, c)`` has the requested mean photon number.

    Bisection over ``(0, 1/sigma_max)``; the result is re-checked on the
    constructed state.
    """
    if target_mean_photons <= 0:
        raise ValueError("target mean photon number must be positive")
    adj = np.asarray(adj, dtype=float)
    sv = np.linalg.svd(adj, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        raise ValueError("target unreachable: adjacency matrix is zero")
    lo, hi = 0.0, 1.0 / sv[0]
    for _ in range(200):
        mid = (lo + hi) / 2
        if _graph_mean_photons(sv, mid) < target_mean_photons:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * hi:
            break
    c = (lo + hi) / 2
    got = from_adjacency(adj, c).mean_photons()
    if abs(got - target_mean_photons) > rtol * target_mean_photons:
        raise ValueError(f"target {target_mean_photons} unreachable (reached {got})")
    return c


def squeezing_for_mean_photons(m, target_mean_photons):
    """Equal squeezing ``r`` giving ``m sinh^2 r`` total mean photons."""
    if target_mean_photons < 0 or m < 1:
        raise ValueError("need m >= 1 and a non-negative target")
    return math.asinh(math.sqrt(target_mean_photons / m))


def from_moments(mean, adag_a, a_a):
    """State from central moments ``<a_i^+ a_j>`` and ``<a_i a_j>``."""
    adag_a = np.asarray(adag_a, dtype=np.complex128)
    a_a = np.asarray(a_a, dtype=np.complex128)
    m = adag_a.shape[0]
    eye = np.eye(m) / 2
    sigma = np.block([[adag_a + eye, a_a.conj()], [a_a, adag_a.T + eye]])
    return GaussianState(sigma, mean)


def _as_pattern(pattern, m, binary=False):
    pattern = np.asarray(pattern, dtype=np.int64)
    if pattern.ndim != 1 or not 0 < len(pattern) <= m:
        raise ValueError(f"pattern must cover between 1 and {m} leading modes")
    if np.any(pattern < 0):
        raise ValueError("photon counts must be non-negative")
    if binary and np.any(pattern > 1):
        raise ValueError("threshold patterns must be binary")
    return pattern


def _clamp(value, noise=0.0):
    """Real part of a computed probability, with round-off negatives set to zero.

    ``noise`` is the rounding-error estimate of ``value`` (same units); residues
    within a few hundred times it are accepted as round-off.
    """
    value = complex(value)
    slack = ROUNDOFF_FACTOR * np.finfo(float).eps * noise
    scale = max(1.0, abs(value.real))
    if abs(value.imag) > max(1e-8 * scale, slack):
        raise ArithmeticError(f"probability has imaginary residue {value.imag:.3g}")
    if value.real < 0:
        if value.real < -max(CLAMP_TOL, slack):
            raise ArithmeticError(f"negative probability {value.real:.3g}")
        return 0.0
    return value.real


def _factorials(pattern):
    # exact integers: an int64 product overflows beyond 20 photons
    return float(math.prod(math.factorial(int(s)) for s in pattern))


def _occupied(red, pattern):
    pattern = np.asarray(pattern, dtype=np.int64)
    modes = np.flatnonzero(pattern)
    idx = np.concatenate([modes, modes + red.k])
    return idx, pattern[modes]


def pnr_from_kernel(red, pattern):
    """``Haf(A_S) / (sqrt(det Q) prod s!)`` for a pattern over the reduced modes.

    Only occupied modes are kept; repetitions go to :func:`haf_repeated`.
    """
    idx, reps = _occupied(red, pattern)
    haf, noise = haf_repeated(red.A[np.ix_(idx, idx)], reps, return_scale=True)
    denom = red.sqrt_det_Q * _factorials(pattern)
    return _clamp(haf / denom, noise / abs(denom))


def displaced_from_kernel(red, pattern):
    """Loop-hafnian probability with the kernel diagonal replaced by ``gamma``."""
    if red.displacement is None:
        return pnr_from_kernel(red, pattern)
    d = red.displacement
    idx, reps = _occupied(red, pattern)
    lhaf, noise = loop_haf_repeated(red.A[np.ix_(idx, idx)], reps, d.gamma[idx], return_scale=True)
    factor = d.norm / _factorials(pattern)
    return _clamp(factor * lhaf, abs(factor) * noise)


def _levels_from_kernel(red, prefix, levels, loops):
    prefix = np.asarray(prefix, dtype=np.int64)
    if len(prefix) != red.k - 1:
        raise ValueError(f"prefix must cover {red.k - 1} modes")
    modes = np.append(np.flatnonzero(prefix), red.k - 1)
    idx = np.concatenate([modes, modes + red.k])
    reps = prefix[modes[:-1]]
    sub = red.A[np.ix_(idx, idx)]
    totals, noise = haf_levels(sub, reps, levels, None if loops is None else loops[idx])
    fact = _factorials(prefix) * np.array([float(math.factorial(j)) for j in range(levels)])
    return totals, noise, fact


def pnr_levels(red, prefix, levels):
    """Joint probabilities of ``prefix + (j,)`` for ``j < levels``, from one batched transform."""
    totals, noise, fact = _levels_from_kernel(red, prefix, levels, None)
    denom = red.sqrt_det_Q * fact
    return np.array([_clamp(t / q, e / abs(q)) for t, e, q in zip(totals, noise, denom)])


def displaced_levels(red, prefix, levels):
    """Batched counterpart of :func:`displaced_from_kernel`."""
    if red.displacement is None:
        return pnr_levels(red, prefix, levels)
    d = red.displacement
    totals, noise, fact = _levels_from_kernel(red, prefix, levels, d.gamma)
    factor = d.norm / fact
    return np.array([_clamp(f * t, abs(f) * e) for t, e, f in zip(totals, noise, factor)])


def threshold_from_kernel(red, pattern):
    """Torontonian probability that exactly the modes flagged 1 click."""
    tor = torontonian(reduce_by_pattern(red.O, pattern))
    return _clamp(tor / red.sqrt_det_Q)


def prob_pnr(state, pattern):
    """Probability of a photon-number pattern on the leading ``len(pattern)`` modes (zero mean)."""
    pattern = _as_pattern(pattern, state.m)
    if state.is_displaced:
        raise ValueError("state is displaced; use prob_displaced")
    return pnr_from_kernel(state.reduced(len(pattern)), pattern)


def prob_displaced(state, pattern):
    """Photon-number pattern probability for a state with non-zero mean."""
    pattern = _as_pattern(pattern, state.m)
    return displaced_from_kernel(state.reduced(len(pattern)), pattern)


def prob_threshold(state, pattern):
    """Click-pattern probability on the leading ``len(pattern)`` modes."""
    pattern = _as_pattern(pattern, state.m, binary=True)
    return threshold_from_kernel(state.reduced(len(pattern)), pattern)


def probability(state, pattern, detector="pnr"):
    if detector == "threshold":
        return prob_threshold(state, pattern)
    if detector != "pnr":
        raise ValueError(f"unknown detector {detector!r}")
    return prob_displaced(state, pattern)


def check_nonneg_kernel(state, tol=NONNEG_TOL):
    """All entries of the kernel are real and at least ``-tol``."""
    A = state.kernel()
    return bool(np.all(A.real >= -tol) and np.all(np.abs(A.imag) <= tol))


def check_nonneg_Q(state, tol=NONNEG_TOL):
    Q = state.Q
    return bool(np.all(Q.real >= -tol) and np.all(np.abs(Q.imag) <= tol))


def o_spectrum_inside(state):
    """Eigenvalues of ``O = 1 - Q^-1`` lie strictly inside (-1, 1)."""
    eig = np.linalg.eigvalsh(state.reduced(state.m).O)
    return bool(np.all(eig > -1) and np.all(eig < 1))
