"""Runtime benchmarks: time samples, bucket by photon number, fit growth curves."""

from dataclasses import asdict, dataclass, field
import json
import time

import numpy as np

from .samplers import sample_rng

# Fit constants reported for the original desktop runs; kept for comparison only.
REFERENCE_FITS = {
    "exp": {"a": 0.594, "b": -2.002},
    "quad": {"a": 0.134, "b": -0.332, "c": 5.210},
}


class FitError(ValueError):
    """Not enough distinct photon numbers to fit a curve."""


@dataclass
class BenchmarkRecord:
    rows: list
    aggregates: dict = field(default_factory=dict)
    fit: dict = field(default_factory=dict)

    def to_json(self):
        data = asdict(self)
        data["aggregates"] = {policy: {str(n): v for n, v in agg.items()} for policy, agg in self.aggregates.items()}
        return json.dumps(data, indent=2)


def time_samples(sampler, num_samples, seed=0, start=0, warmup=True):
    """Run ``sampler.sample`` ``num_samples`` times, timing only the sampling call.

    Args:
        warmup (bool): draw one untimed sample first so JIT compilation is not timed

    Returns:
        list[dict]: one row per sample with ``N``, ``wall_time``, ``halted`` and ``epsilon``
    """
    if warmup:
        sampler.sample(np.random.default_rng([seed, 2**32]))
    rows = []
    for i in range(start, start + num_samples):
        rng = sample_rng(seed, i)
        t0 = time.perf_counter()
        rec = sampler.sample(rng)
        elapsed = time.perf_counter() - t0
        rows.append({"N": rec.N, "wall_time": elapsed, "halted": rec.halted, "epsilon": rec.epsilon})
    return rows


def aggregate(rows, include_halted=True):
    """Mean and standard deviation of wall time per photon number."""
    buckets = {}
    for row in rows:
        if row["halted"] and not include_halted:
            continue
        buckets.setdefault(int(row["N"]), []).append(float(row["wall_time"]))
    return {
        n: {"count": len(ts), "mean": float(np.mean(ts)), "std": float(np.std(ts))}
        for n, ts in sorted(buckets.items())
    }


def _r_squared(y, pred):
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def fit_exp(N, T):
    """Least-squares fit of ``log T = a N + b``; R^2 is computed in the log domain."""
    N, T = np.asarray(N, dtype=float), np.asarray(T, dtype=float)
    if len(np.unique(N)) < 3:
        raise FitError("need at least three distinct photon numbers")
    logT = np.log(T)
    a, b = np.polyfit(N, logT, 1)
    return {"model": "exp", "a": float(a), "b": float(b), "r2": _r_squared(logT, a * N + b)}


def fit_poly(N, T, degree):
    N, T = np.asarray(N, dtype=float), np.asarray(T, dtype=float)
    if len(np.unique(N)) < max(3, degree + 1):
        raise FitError(f"need at least {max(3, degree + 1)} distinct photon numbers")
    coeffs = np.polyfit(N, T, degree)
    return {
        "model": f"poly{degree}",
        "coeffs": [float(c) for c in coeffs],
        "r2": _r_squared(T, np.polyval(coeffs, N)),
    }


def fit_quad(N, T):
    """Least-squares fit of ``T = a N^2 + b N + c``."""
    out = fit_poly(N, T, 2)
    a, b, c = out["coeffs"]
    return {"model": "quad", "a": a, "b": b, "c": c, "r2": out["r2"]}


def fit_aggregates(agg, model="exp", n_range=None):
    ns = [n for n in agg if n_range is None or n_range[0] <= n <= n_range[1]]
    N = np.array(ns, dtype=float)
    T = np.array([agg[n]["mean"] for n in ns])
    if model == "exp":
        return fit_exp(N, T)
    if model == "quad":
        return fit_quad(N, T)
    raise ValueError(f"unknown fit model {model!r}")


def summarize(rows, model="exp", n_range=None):
    """Aggregate under both halted-run policies and fit the inclusive one."""
    aggs = {"all": aggregate(rows, True), "completed": aggregate(rows, False)}
    return BenchmarkRecord(rows, aggs, fit_aggregates(aggs["all"], model, n_range))


def format_table(agg):
    """Plot-ready whitespace table: ``N mean std count``."""
    lines = ["# N mean_s std_s count"]
    for n, v in agg.items():
        lines.append(f"{n} {v['mean']:.9g} {v['std']:.9g} {v['count']}")
    return "\n".join(lines) + "\n"
