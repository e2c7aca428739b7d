"""Chain-rule conditional samplers.

Every sampler walks the modes in order. At mode ``k`` it evaluates the
joint probability of the outcomes so far extended by each candidate count,
divides by the joint probability of the chosen history (kept from the
previous step) and draws the next count by inverse CDF with one uniform.
Only the current reduced kernel is held, so working memory is ``O(m^2)``
unless kernel caching is switched on.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os
import time

import numpy as np

from .kernels import InvalidState, haf_barvinok
from .linalg import reduce_by_pattern
from .state import (
    check_nonneg_kernel,
    displaced_from_kernel,
    displaced_levels,
    pnr_from_kernel,
    pnr_levels,
    threshold_from_kernel,
)

TAIL_SILENT = 1e-6
TAIL_FATAL = 1e-3
SIGNED_TOL = 1e-8
APPROX_CLIP = 1e-10


class TailMassError(RuntimeError):
    """Conditional distribution lost too much mass above ``n_max``."""


@dataclass
class SamplerConfig:
    """Knobs shared by all samplers."""

    n_max: int = 14
    halt_total: int = 14
    tail_policy: str = "renormalize"
    seed: int | None = None
    barvinok_M: int = 1000
    cache_kernels: bool = False
    cache_conditionals: bool = False

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.halt_total < 1:
            raise ValueError("halt_total must be at least 1")
        if self.tail_policy not in ("renormalize", "reject", "error"):
            raise ValueError(f"unknown tail policy {self.tail_policy!r}")
        if self.barvinok_M < 1:
            raise ValueError("barvinok_M must be at least 1")


@dataclass
class SampleRecord:
    pattern: tuple
    eta: float
    epsilon: float
    wall_time: float = 0.0
    photons_after_mode: tuple = ()
    halted: bool = False
    conditionals: tuple = field(default=(), repr=False)
    detector: str = "pnr"

    @property
    def N(self):
        return int(sum(self.pattern))


@dataclass
class MixtureSpec:
    """Weighted combination ``sum_i q_i rho_i`` of Gaussian states.

    With ``signed=False`` the weights must form a probability vector; signed
    combinations only need to sum to one.
    """

    components: list
    signed: bool = False

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        weights = np.array([q for q, _ in self.components], dtype=float)
        m = {state.m for _, state in self.components}
        if len(m) != 1:
            raise ValueError("all components must have the same number of modes")
        if abs(weights.sum() - 1) > 1e-8:
            raise ValueError("mixture weights must sum to 1")
        if not self.signed and np.any(weights < 0):
            raise ValueError("negative weight in an unsigned mixture")

    @property
    def ell(self):
        return len(self.components)

    @property
    def m(self):
        return self.components[0][1].m

    @property
    def weights(self):
        return np.array([q for q, _ in self.components], dtype=float)


class _Model:
    """Joint probability of a pattern on the leading modes."""

    detector = "pnr"
    exact = True

    def __init__(self, state, cache_kernels=False):
        self.state = state
        self.m = state.m
        self._cache = {} if cache_kernels else None

    def kernel(self, k):
        if self._cache is None:
            return self.state.reduced(k)
        red = self._cache.get(k)
        if red is None:
            red = self._cache[k] = self.state.reduced(k)
        return red

    def joint(self, red, pattern, rng):
        raise NotImplementedError

    def levels(self, red, prefix, levels, rng):
        """Joint probabilities of ``prefix + (j,)`` for ``j < levels``."""
        return np.array([self.joint(red, prefix + (j,), rng) for j in range(levels)])


class _PNRModel(_Model):
    def joint(self, red, pattern, rng):
        return pnr_from_kernel(red, pattern)

    def levels(self, red, prefix, levels, rng):
        return pnr_levels(red, prefix, levels)


class _DisplacedModel(_Model):
    def joint(self, red, pattern, rng):
        return displaced_from_kernel(red, pattern)

    def levels(self, red, prefix, levels, rng):
        return displaced_levels(red, prefix, levels)


class _ThresholdModel(_Model):
    detector = "threshold"

    def joint(self, red, pattern, rng):
        return threshold_from_kernel(red, pattern)


class _ApproxModel(_Model):
    exact = False

    def __init__(self, state, M, cache_kernels=False):
        super().__init__(state, cache_kernels)
        self.M = M

    def kernel(self, k):
        red = super().kernel(k)
        A = red.A
        if np.any(A.real < -APPROX_CLIP) or np.any(np.abs(A.imag) > APPROX_CLIP):
            raise InvalidState(f"reduced kernel for k={k} is not non-negative")
        return red

    def joint(self, red, pattern, rng):
        As = np.clip(reduce_by_pattern(red.A.real, pattern), 0.0, None)
        est, _ = haf_barvinok(As, self.M, rng)
        fact = math.prod(math.factorial(int(s)) for s in pattern)
        return max(est, 0.0) / (red.sqrt_det_Q * fact)


class _SignedModel:
    """Chain-rule arithmetic on ``sum_i q_i p_i``; every step touches all components."""

    exact = True

    def __init__(self, weights, models):
        self.weights = weights
        self.models = models
        self.m = models[0].m
        self.detector = models[0].detector

    def kernel(self, k):
        return [model.kernel(k) for model in self.models]

    def joint(self, reds, pattern, rng):
        total = 0.0
        for q, model, red in zip(self.weights, self.models, reds):
            total += q * model.joint(red, pattern, rng)
        if total < -SIGNED_TOL:
            raise ValueError(f"signed combination gives negative probability {total:.3g}")
        return max(total, 0.0)

    def levels(self, reds, prefix, levels, rng):
        total = sum(q * model.levels(red, prefix, levels, rng) for q, model, red in zip(self.weights, self.models, reds))
        if np.any(total < -SIGNED_TOL):
            raise ValueError(f"signed combination gives negative probability {total.min():.3g}")
        return np.clip(total, 0.0, None)


def _cumulative_draw(probs, u):
    cdf = np.cumsum(probs)
    j = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(j, len(probs) - 1)


class ChainRuleSampler:
    """Sequential conditional sampler over a probability model."""

    def __init__(self, model, cfg):
        self.model = model
        self.cfg = cfg
        self._conditionals = {} if cfg.cache_conditionals else None

    def _conditional(self, k, prefix, p_prev, rng):
        cfg = self.cfg
        model = self.model
        red = model.kernel(k)
        levels = 2 if model.detector == "threshold" else cfg.n_max + 1
        probs = model.levels(red, prefix, levels, rng)
        return probs / p_prev, probs

    def sample(self, rng):
        cfg = self.cfg
        m = self.model.m
        t0 = time.perf_counter()
        prefix = ()
        photons = 0
        p_prev = 1.0
        after = []
        chosen = []
        eta = 1.0
        halted = False
        for k in range(1, m + 1):
            key = prefix
            hit = self._conditionals.get(key) if self._conditionals is not None else None
            if hit is None:
                cond, joint = self._conditional(k, prefix, p_prev, rng)
                if self._conditionals is not None and self.model.exact:
                    self._conditionals[key] = (cond, joint)
            else:
                cond, joint = hit
            eta = float(cond.sum())
            weights = np.clip(cond, 0.0, None)
            if weights.sum() <= 0:
                raise ArithmeticError(f"all conditional probabilities vanished at mode {k}")
            tail = 1.0 - eta
            u = rng.random()
            if self.model.exact and self.model.detector == "pnr" and tail > TAIL_SILENT:
                if cfg.tail_policy == "error" and tail > TAIL_FATAL:
                    raise TailMassError(f"tail mass {tail:.3g} at mode {k}; raise n_max")
                if cfg.tail_policy == "reject":
                    # the missing mass is an outcome of its own; landing there aborts the sample
                    if u >= eta:
                        halted = True
                        break
                    u /= eta
            j = _cumulative_draw(weights, u)
            chosen.append(float(cond[j]))
            p_prev = float(joint[j])
            prefix = prefix + (j,)
            photons += j
            after.append(photons)
            if photons > cfg.halt_total and k < m:
                halted = True
                break
        pattern = prefix + (0,) * (m - len(prefix))
        after = after + [photons] * (m - len(after))
        return SampleRecord(
            pattern=tuple(int(s) for s in pattern),
            eta=eta,
            epsilon=abs(1.0 - eta),
            wall_time=time.perf_counter() - t0,
            photons_after_mode=tuple(after),
            halted=halted,
            conditionals=tuple(chosen),
            detector=self.model.detector,
        )


class MixtureSampler:
    """Pick a component with probability ``q_i`` and delegate."""

    def __init__(self, weights, samplers):
        self.weights = np.asarray(weights, dtype=float)
        self.samplers = samplers

    def sample(self, rng):
        t0 = time.perf_counter()
        i = _cumulative_draw(self.weights, rng.random())
        rec = self.samplers[i].sample(rng)
        rec.wall_time = time.perf_counter() - t0
        return rec


def _cfg(cfg):
    return SamplerConfig() if cfg is None else cfg


def _rng(rng, cfg):
    if rng is None:
        return np.random.default_rng(cfg.seed)
    return rng


def _require_valid(state):
    problems = state.validity_problems()
    if problems:
        raise InvalidState("; ".join(problems))


def pnr_sampler(state, cfg=None):
    cfg = _cfg(cfg)
    _require_valid(state)
    if state.is_displaced:
        raise ValueError("state is displaced; use the displaced sampler")
    return ChainRuleSampler(_PNRModel(state, cfg.cache_kernels), cfg)


def threshold_sampler(state, cfg=None):
    cfg = _cfg(cfg)
    _require_valid(state)
    return ChainRuleSampler(_ThresholdModel(state, cfg.cache_kernels), cfg)


def displaced_sampler(state, cfg=None):
    cfg = _cfg(cfg)
    _require_valid(state)
    # zero mean goes through the hafnian so both paths draw identically
    model = _DisplacedModel if state.is_displaced else _PNRModel
    return ChainRuleSampler(model(state, cfg.cache_kernels), cfg)


def approx_sampler(state, cfg=None):
    cfg = _cfg(cfg)
    _require_valid(state)
    if state.is_displaced:
        raise ValueError("approximate sampler needs a zero-mean state")
    if not check_nonneg_kernel(state):
        raise InvalidState("kernel matrix has negative entries")
    return ChainRuleSampler(_ApproxModel(state, cfg.barvinok_M, cfg.cache_kernels), cfg)


def _model_for(state, detector, cfg):
    _require_valid(state)
    if detector == "threshold":
        return _ThresholdModel(state, cfg.cache_kernels)
    if detector != "pnr":
        raise ValueError(f"unknown detector {detector!r}")
    return (_DisplacedModel if state.is_displaced else _PNRModel)(state, cfg.cache_kernels)


def mixture_sampler(mix, detector="pnr", cfg=None):
    cfg = _cfg(cfg)
    if mix.signed:
        models = [_model_for(state, detector, cfg) for _, state in mix.components]
        return ChainRuleSampler(_SignedModel(mix.weights, models), cfg)
    samplers = [ChainRuleSampler(_model_for(state, detector, cfg), cfg) for _, state in mix.components]
    return MixtureSampler(mix.weights, samplers)


def sample_pnr(state, cfg=None, rng=None):
    """One exact photon-number-resolved sample of a zero-mean state."""
    cfg = _cfg(cfg)
    return pnr_sampler(state, cfg).sample(_rng(rng, cfg))


def sample_threshold(state, cfg=None, rng=None):
    """One exact click-pattern sample."""
    cfg = _cfg(cfg)
    return threshold_sampler(state, cfg).sample(_rng(rng, cfg))


def sample_displaced(state, cfg=None, rng=None):
    """One exact photon-number sample of a displaced state (loop hafnians)."""
    cfg = _cfg(cfg)
    return displaced_sampler(state, cfg).sample(_rng(rng, cfg))


def sample_mixture(mix, detector="pnr", cfg=None, rng=None):
    cfg = _cfg(cfg)
    return mixture_sampler(mix, detector, cfg).sample(_rng(rng, cfg))


def sample_approx_nonneg(state, cfg=None, rng=None):
    """One sample with every hafnian replaced by a Monte Carlo estimate.

    ``eta`` and ``epsilon`` come from the conditional vector of the last mode
    and measure how far the estimated probabilities are from normalised.
    """
    cfg = _cfg(cfg)
    return approx_sampler(state, cfg).sample(_rng(rng, cfg))


def sample_rng(seed, index):
    """Independent stream for sample ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng([index, seed])


def resolve_threads(threads=None):
    if threads is None:
        threads = int(os.environ.get("GBS_SIM_THREADS", "1"))
    return max(1, int(threads))


def sample_many(sampler, num_samples, seed=0, threads=None, start=0):
    """Draw ``num_samples`` records; output depends only on ``seed``, not on ``threads``."""
    threads = resolve_threads(threads)
    indices = range(start, start + num_samples)

    def one(i):
        return sampler.sample(sample_rng(seed, i))

    if threads == 1:
        return [one(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, indices))
