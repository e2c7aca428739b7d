"""Command-line interface: ``gbs-sim {sample,benchmark,probability,validate,table}``.

Exit codes: 0 success, 2 invalid configuration, 3 invalid state or failed predicate.
"""

import argparse
import json
import sys

import numpy as np

from . import bench, io, oracle
from .ensembles import haar_unitary
from .kernels import InvalidState
from .samplers import (
    MixtureSpec,
    SamplerConfig,
    approx_sampler,
    displaced_sampler,
    mixture_sampler,
    resolve_threads,
    sample_many,
    threshold_sampler,
)
from .state import (
    GaussianState,
    auto_scale,
    check_nonneg_kernel,
    check_nonneg_Q,
    from_adjacency,
    from_squeezing_and_unitary,
    o_spectrum_inside,
    probability,
    squeezing_for_mean_photons,
)

EXIT_CONFIG = 2
EXIT_STATE = 3


class ConfigError(ValueError):
    pass


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _add_state_args(p):
    g = p.add_argument_group("state")
    g.add_argument("--state", help="Gaussian state JSON file")
    g.add_argument("--modes", type=int, help="number of modes for a squeezed interferometer state")
    g.add_argument("--squeezing", help="squeezing r, scalar or comma-separated per mode")
    g.add_argument("--unitary", default="haar", help="'haar', 'identity' or a .npy/JSON file")
    g.add_argument("--graph", help="adjacency matrix: dense CSV or 'u v' edge list")
    g.add_argument("--scale", type=float, help="graph scale c in B = c * adj")
    g.add_argument("--mean-photons", type=float, help="target mean photon number")
    g.add_argument("--displacement", help="JSON file with mean_re / mean_im")
    g.add_argument("--mixture", help="JSON list of {q, state}")
    g.add_argument("--seed", type=int, default=0)


def _add_sampler_args(p):
    g = p.add_argument_group("sampler")
    g.add_argument("--detector", choices=("pnr", "threshold"), default="pnr")
    g.add_argument("--approx", action="store_true", help="Monte Carlo hafnians (non-negative kernels)")
    g.add_argument("--barvinok-M", type=int, default=1000)
    g.add_argument("--num-samples", type=int, default=10)
    g.add_argument("--n-max", type=int, default=14)
    g.add_argument("--halt-total", type=int, default=14)
    g.add_argument("--tail-policy", choices=("renormalize", "reject", "error"), default="renormalize")
    g.add_argument("--threads", type=int, default=None, help="worker threads (env GBS_SIM_THREADS)")


def build_state(args):
    """Gaussian state (or mixture) described by the state flags."""
    sources = [bool(args.state), bool(args.graph), args.modes is not None, bool(args.mixture)]
    if sum(sources) != 1:
        raise ConfigError("give exactly one of --state, --graph, --modes or --mixture")
    if args.mixture:
        return io.load_mixture(args.mixture)
    rng = np.random.default_rng(args.seed)
    if args.state:
        state = io.load_state(args.state)
    elif args.graph:
        adj = io.load_graph(args.graph)
        if args.scale is not None:
            scale = args.scale
        elif args.mean_photons is not None:
            scale = auto_scale(adj, args.mean_photons)
        else:
            raise ConfigError("--graph needs --scale or --mean-photons")
        state = from_adjacency(adj, scale)
    else:
        m = args.modes
        if m < 1:
            raise ConfigError("--modes must be positive")
        if args.mean_photons is not None:
            r = squeezing_for_mean_photons(m, args.mean_photons)
        elif args.squeezing is not None:
            r = _floats(args.squeezing)
            if len(r) not in (1, m):
                raise ConfigError(f"--squeezing needs 1 or {m} values")
            r = r[0] if len(r) == 1 else np.array(r)
        else:
            raise ConfigError("--modes needs --squeezing or --mean-photons")
        if args.unitary == "haar":
            U = haar_unitary(m, rng)
        elif args.unitary == "identity":
            U = np.eye(m)
        else:
            U = io.load_unitary(args.unitary)
        state = from_squeezing_and_unitary(r, U)
    if args.displacement:
        state = state.with_mean(io.load_mean(args.displacement, state.m))
    return state


def build_config(args):
    return SamplerConfig(
        n_max=args.n_max,
        halt_total=args.halt_total,
        tail_policy=args.tail_policy,
        seed=args.seed,
        barvinok_M=args.barvinok_M,
    )


def build_sampler(args, target, cfg):
    if isinstance(target, MixtureSpec):
        if args.approx:
            raise ConfigError("--approx does not combine with --mixture")
        return mixture_sampler(target, args.detector, cfg)
    if args.approx:
        if args.detector != "pnr":
            raise ConfigError("--approx needs photon-number detectors")
        return approx_sampler(target, cfg)
    if args.detector == "threshold":
        return threshold_sampler(target, cfg)
    return displaced_sampler(target, cfg)


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_sample(args):
    target = build_state(args)
    cfg = build_config(args)
    sampler = build_sampler(args, target, cfg)
    records = sample_many(sampler, args.num_samples, seed=args.seed, threads=resolve_threads(args.threads))
    timing = not args.omit_timing
    text = io.format_csv(records, timing) if args.format == "csv" else io.format_jsonl(records, timing)
    _write(text, args.out)
    return 0


def cmd_benchmark(args):
    if args.from_records:
        records = io.load_records(args.from_records)
        rows = [{"N": r.N, "wall_time": r.wall_time, "halted": r.halted, "epsilon": r.epsilon} for r in records]
    else:
        target = build_state(args)
        cfg = build_config(args)
        cfg.cache_kernels = True
        sampler = build_sampler(args, target, cfg)
        rows = bench.time_samples(sampler, args.num_samples, seed=args.seed)
    n_range = (args.n_min, args.n_max_fit) if args.n_min is not None or args.n_max_fit is not None else None
    if n_range is not None:
        n_range = (n_range[0] if n_range[0] is not None else 0, n_range[1] if n_range[1] is not None else 10**9)
    result = bench.summarize(rows, args.fit, n_range)
    _write(result.to_json() + "\n", args.out)
    if args.table:
        _write(bench.format_table(result.aggregates["all"]), args.table)
    return 0


def _pattern(text):
    try:
        return [int(x) for x in text.replace(" ", ",").split(",") if x != ""]
    except ValueError as exc:
        raise ConfigError(f"cannot parse pattern {text!r}") from exc


def cmd_probability(args):
    target = build_state(args)
    pattern = _pattern(args.pattern)
    if isinstance(target, MixtureSpec):
        p = sum(q * probability(s, pattern, args.detector) for q, s in target.components)
    else:
        p = probability(target, pattern, args.detector)
    print(repr(float(p)))
    return 0


def cmd_validate(args):
    if args.mixture:
        raise ConfigError("validate takes a single state, not --mixture")
    target = build_state_unchecked(args)
    checks = {}
    problems = target.validity_problems()
    checks["valid"] = not problems
    if checks["valid"]:
        checks["nonneg_Q"] = check_nonneg_Q(target)
        checks["nonneg_kernel"] = check_nonneg_kernel(target)
        checks["O_spectrum"] = o_spectrum_inside(target)
        if target.m <= oracle.MAX_ORACLE_MODES and not target.is_displaced:
            _, mass = oracle.fock_distribution(target, args.cutoff, max_total=args.max_total)
            checks["normalization"] = mass >= args.min_mass
    for name, ok in checks.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    for msg in problems:
        print(f"  {msg}")
    if args.strict and not all(checks.get(k, True) for k in ("valid", "O_spectrum", "normalization")):
        return EXIT_STATE
    return 0


def build_state_unchecked(args):
    """Like ``build_state`` but a ``--state`` file is loaded without validation."""
    if args.state and not (args.graph or args.modes is not None or args.mixture):
        with open(args.state) as fh:
            return GaussianState.from_dict(json.load(fh), validate=False)
    return build_state(args)


def cmd_table(args):
    target = build_state(args)
    table, mass = oracle.fock_distribution(target, args.cutoff, args.detector, args.max_total)
    if args.out in (None, "-"):
        print("pattern,probability")
        for pattern, p in sorted(table.items()):
            print(f"{' '.join(map(str, pattern))},{p!r}")
    else:
        oracle.write_table_csv(table, args.out)
    print(f"# captured mass {mass:.12g}", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="gbs-sim", description="Gaussian boson sampling simulator.", epilog=__doc__.splitlines()[2])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="generate samples")
    _add_state_args(p)
    _add_sampler_args(p)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--omit-timing", action="store_true", help="drop wall_time for reproducible output")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("benchmark", help="time samples and fit runtime against photon number")
    _add_state_args(p)
    _add_sampler_args(p)
    p.add_argument("--fit", choices=("exp", "quad"), default="exp")
    p.add_argument("--from", dest="from_records", help="fit existing JSONL/CSV sample records")
    p.add_argument("--n-min", type=int, help="smallest photon number in the fit")
    p.add_argument("--n-max-fit", type=int, help="largest photon number in the fit")
    p.add_argument("--out", default="-")
    p.add_argument("--table", help="write a plot-ready N/mean/std table here")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("probability", help="exact probability of one pattern")
    _add_state_args(p)
    p.add_argument("--pattern", required=True, help="comma-separated counts over the leading modes")
    p.add_argument("--detector", choices=("pnr", "threshold"), default="pnr")
    p.set_defaults(func=cmd_probability)

    p = sub.add_parser("validate", help="check state predicates")
    _add_state_args(p)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--cutoff", type=int, default=14)
    p.add_argument("--max-total", type=int, default=None)
    p.add_argument("--min-mass", type=float, default=0.999)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("table", help="tabulate pattern probabilities (at most 3 modes)")
    _add_state_args(p)
    p.add_argument("--cutoff", type=int, default=8)
    p.add_argument("--max-total", type=int, default=None)
    p.add_argument("--detector", choices=("pnr", "threshold"), default="pnr")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, bench.FitError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidState as exc:
        print(f"invalid state: {exc}", file=sys.stderr)
        return EXIT_STATE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
