import json
import time

import numpy as np
import pytest

from gbs_sim import bench
from gbs_sim.samplers import SampleRecord


class SleepySampler:
    """Stub whose construction is slow but whose samples are instant."""

    def __init__(self):
        time.sleep(0.2)
        self.calls = 0

    def sample(self, rng):
        self.calls += 1
        n = int(rng.integers(0, 4))
        return SampleRecord(pattern=(n,), eta=1.0, epsilon=0.0)


def rows_from(N, T, halted=None):
    halted = [False] * len(N) if halted is None else halted
    return [{"N": n, "wall_time": t, "halted": h, "epsilon": 0.0} for n, t, h in zip(N, T, halted)]


def test_timing_excludes_construction():
    sampler = SleepySampler()
    rows = bench.time_samples(sampler, 50, seed=0)
    assert len(rows) == 50
    assert sum(r["wall_time"] for r in rows) < 0.1


def test_exp_fit_on_exact_data():
    N = np.arange(2, 12)
    fit = bench.fit_exp(N, np.exp(0.5 * N - 1.0))
    assert fit["a"] == pytest.approx(0.5, abs=1e-6)
    assert fit["b"] == pytest.approx(-1.0, abs=1e-6)
    assert fit["r2"] == pytest.approx(1.0)


def test_quad_fit_on_exact_data():
    N = np.arange(10, 40, 2, dtype=float)
    fit = bench.fit_quad(N, 0.134 * N**2 - 0.332 * N + 5.21)
    assert (fit["a"], fit["b"], fit["c"]) == pytest.approx((0.134, -0.332, 5.21), abs=1e-8)


def test_fit_needs_three_points():
    with pytest.raises(bench.FitError):
        bench.fit_exp([1, 2, 2], [1.0, 2.0, 2.0])
    with pytest.raises(bench.FitError):
        bench.fit_poly([1, 2, 3], [1.0, 2.0, 3.0], 3)
    with pytest.raises(ValueError):
        bench.fit_aggregates({1: {"mean": 1.0}}, "cubic")


def test_aggregate_policies():
    rows = rows_from([1, 1, 2, 3], [1.0, 3.0, 2.0, 9.0], [False, False, False, True])
    agg = bench.aggregate(rows)
    assert agg[1] == {"count": 2, "mean": 2.0, "std": 1.0}
    assert 3 not in bench.aggregate(rows, include_halted=False)


def test_summarize_and_outputs():
    N = [2, 3, 4, 5, 6] * 3
    rows = rows_from(N, [np.exp(0.3 * n) for n in N])
    result = bench.summarize(rows, "exp", n_range=(3, 6))
    assert result.fit["a"] == pytest.approx(0.3)
    data = json.loads(result.to_json())
    assert set(data) == {"rows", "aggregates", "fit"}
    assert set(data["aggregates"]) == {"all", "completed"}
    table = bench.format_table(result.aggregates["all"]).splitlines()
    assert table[0].startswith("#") and len(table) == 6
    assert bench.REFERENCE_FITS["exp"] == {"a": 0.594, "b": -2.002}
