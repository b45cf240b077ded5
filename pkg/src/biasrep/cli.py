"""Command-line front end.

Subcommands: simulate, bounds, optimize, channel, oracle, validate.
Sweep-style results are CSV with the resolved configuration echoed in
``#`` header lines; channel reports are JSON.  Identical configuration and
seed give byte-identical output bodies regardless of worker count.

Exit codes: 0 success, 2 configuration error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .bounds import BiasPoint, cnot_bound, optimize_nk
from .channels import (amplitude_damping, bell_phi0, builtin_cphase_kraus,
                       diamond_lower_bound, kraus_from_json, split_channel)
from .gadgets import build_gadget, check_schedule, circuit_from_text
from .montecarlo import RateEstimate, brute_force_oracle, count_trials
from .noise_model import ErrorRateTable, default_rates, zero_rates
from .pauli_frame import LeakPolicy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


class ConfigError(Exception):
    pass


def _load_rates(source: str) -> ErrorRateTable:
    if source == "table1":
        return default_rates()
    if source == "zero":
        return zero_rates()
    try:
        with open(source) as fh:
            return ErrorRateTable.from_json(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read rate table {source!r}: {exc}") from exc
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad rate table {source!r}: {exc}") from exc


def _parse_trials(text: str) -> int:
    value = int(float(text))
    if value < 1:
        raise ConfigError(f"trials must be >= 1, got {text}")
    return value


def _parse_grid(text: str) -> list[float]:
    """``lo:hi[:points]`` log-spaced, or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad grid {text!r}, expected lo:hi[:points]")
        lo, hi = float(parts[0]), float(parts[1])
        points = int(parts[2]) if len(parts) == 3 else 13
        if lo <= 0 or hi <= lo or points < 2:
            raise ConfigError(f"bad grid {text!r}")
        return list(np.geomspace(lo, hi, points))
    return [float(v) for v in text.split(",")]


def _header(config: dict) -> list[str]:
    return [f"# biasrep {__version__}",
            "# config: " + json.dumps(config, sort_keys=True, default=str)]


def _emit(lines: list[str], output: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    rates = _load_rates(args.rates)
    trials = _parse_trials(args.trials)
    gadget = build_gadget(args.gadget, args.n, args.k,
                          pre_teleport=args.pre_teleport)
    workers = max(1, args.workers)
    chunk_edges = [trials * i // workers for i in range(workers + 1)]
    spans = [(lo, hi) for lo, hi in zip(chunk_edges, chunk_edges[1:]) if hi > lo]
    if len(spans) > 1:
        with ProcessPoolExecutor(max_workers=len(spans)) as pool:
            futures = [pool.submit(count_trials, gadget, rates, args.seed, lo, hi,
                                   leak_policy=args.leak_policy)
                       for lo, hi in spans]
            parts = [f.result() for f in futures]
    else:
        parts = [count_trials(gadget, rates, args.seed, lo, hi,
                              leak_policy=args.leak_policy) for lo, hi in spans]
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    eps = RateEstimate.from_counts(total.logical_z, trials, args.seed)
    epsp = RateEstimate.from_counts(total.logical_other, trials, args.seed)

    config = {"command": "simulate", "gadget": args.gadget, "n": args.n,
              "k": args.k, "rates": args.rates, "trials": trials,
              "seed": args.seed, "leak_policy": args.leak_policy.value,
              "pre_teleport": args.pre_teleport, "workers": workers}
    lines = _header(config)
    lines.append("gadget,n,k,trials,seed,eps_L,eps_L_stderr,epsp_L,epsp_L_stderr")
    lines.append(",".join([args.gadget, str(args.n), str(args.k), str(trials),
                           str(args.seed), _fmt(eps.mean), _fmt(eps.stderr),
                           _fmt(epsp.mean), _fmt(epsp.stderr)]))
    _emit(lines, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds / optimize
# ---------------------------------------------------------------------------

_BOUNDS_COLUMNS = "eps,bias,c,n,k,eps_L,epsp_L,total"


def _bound_row(eps: float, bias: float, c: float, n: int, k: int,
               eps_L: float, epsp_L: float) -> str:
    return ",".join([_fmt(eps), _fmt(bias), _fmt(c), str(n), str(k),
                     _fmt(eps_L), _fmt(epsp_L), _fmt(eps_L + epsp_L)])


def cmd_bounds(args: argparse.Namespace) -> int:
    config = {"command": "bounds", "c": args.c, "n_max": args.n_max}
    lines: list[str] = []
    table = _load_rates(args.rates) if args.rates else None

    if args.optimize:
        constraint = args.optimize
        if table is not None:
            result = optimize_nk(table=table, c=args.c, n_max=args.n_max,
                                 constraint=constraint)
            config.update({"rates": args.rates, "optimize": constraint})
            lines.append(_bound_row(float("nan"), float("nan"), args.c,
                                    result.n, result.k, result.eps_L,
                                    result.epsp_L))
        else:
            if not args.bias or not args.eps_grid:
                raise ConfigError("optimizing sweeps need --bias and --eps-grid")
            grid = _parse_grid(args.eps_grid)
            config.update({"bias": args.bias, "eps_grid": args.eps_grid,
                           "optimize": constraint})
            for bias in args.bias:
                for eps in grid:
                    r = optimize_nk(eps=eps, bias=bias, c=args.c,
                                    n_max=args.n_max, constraint=constraint)
                    lines.append(_bound_row(eps, bias, args.c, r.n, r.k,
                                            r.eps_L, r.epsp_L))
    else:
        if args.eps is None or args.n is None:
            raise ConfigError("direct evaluation needs --n and --eps "
                              "(plus --t or --k), or use --optimize")
        n = args.n
        k = args.k if args.k is not None else 1
        bias = args.bias[0] if args.bias else float("inf")
        point = BiasPoint(args.eps, bias if math.isfinite(bias) else 1.0,
                          n, k, args.c, t=args.t)
        report = cnot_bound(point, table)
        epsp = report.epsp_L if (table is not None or math.isfinite(bias)) else 0.0
        config.update({"n": n, "k": k, "t": args.t, "eps": args.eps,
                       "bias": bias, "rates": args.rates})
        lines.append(_bound_row(args.eps, bias, args.c, n, k,
                                report.eps_L, epsp))
    out = _header(config) + [_BOUNDS_COLUMNS] + lines
    _emit(out, args.output)
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    table = _load_rates(args.rates) if args.rates else None
    if table is None and args.eps is None:
        raise ConfigError("optimize needs --rates or (--eps and --bias)")
    bias = args.bias[0] if args.bias else None
    if table is None and bias is None:
        raise ConfigError("optimize without a rate table needs --bias")
    result = optimize_nk(eps=args.eps, bias=bias, table=table, c=args.c,
                         n_max=args.n_max, constraint=args.constraint)
    config = {"command": "optimize", "rates": args.rates, "eps": args.eps,
              "bias": bias, "c": args.c, "n_max": args.n_max,
              "constraint": args.constraint}
    lines = _header(config) + [_BOUNDS_COLUMNS,
                               _bound_row(args.eps if args.eps is not None
                                          else float("nan"),
                                          bias if bias is not None
                                          else float("nan"),
                                          args.c, result.n, result.k,
                                          result.eps_L, result.epsp_L)]
    _emit(lines, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# channel
# ---------------------------------------------------------------------------

def cmd_channel(args: argparse.Namespace) -> int:
    config = {"command": "channel", "builtin": args.builtin,
              "kraus_json": args.kraus_json,
              "amplitude_damping": args.amplitude_damping,
              "input": args.input, "qubit": args.qubit,
              "restarts": args.restarts, "seed": args.seed}
    report: dict = {"version": __version__, "config": config}

    if args.amplitude_damping is not None:
        ad = amplitude_damping(args.amplitude_damping,
                               random_restarts=args.restarts, seed=args.seed)
        report["result"] = {
            "gamma": ad.gamma,
            "other_rate": ad.other_rate,
            "phase_rate": ad.phase_rate,
            "identity_coefficient": ad.ihat_coeff,
            "completeness_error": ad.kraus.completeness_defect(),
        }
    elif args.builtin == "cphase" or args.kraus_json:
        if args.kraus_json:
            with open(args.kraus_json) as fh:
                classified = kraus_from_json(fh.read())
        else:
            classified = builtin_cphase_kraus()
        parts = split_channel(classified, resolve=args.qubit)
        if args.input == "bell" and parts.full.dim == 16:
            probes = [(bell_phi0(), 1)]
        elif args.input == "search":
            probes = None
        else:
            raise ConfigError(f"unknown input {args.input!r} "
                              "(expected 'bell' or 'search')")
        result = {
            "phase_rate": diamond_lower_bound(parts.e_phase, probes,
                                              random_restarts=args.restarts,
                                              seed=args.seed),
            "other_rate": diamond_lower_bound(parts.e_other, probes,
                                              random_restarts=args.restarts,
                                              seed=args.seed),
            "leak_rate": diamond_lower_bound(parts.e_leak, probes,
                                             random_restarts=args.restarts,
                                             seed=args.seed),
            "decomposition_error": parts.decomposition_error(),
        }
        if parts.ihat_coeff is not None:
            result["identity_coefficient"] = parts.ihat_coeff
        if args.qubit:
            result["resolved_qubit"] = args.qubit
        report["result"] = result
    else:
        raise ConfigError("channel needs --builtin cphase, --kraus-json, "
                          "or --amplitude-damping")
    text = json.dumps(report, indent=2, sort_keys=True)
    _emit([text], args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle / validate
# ---------------------------------------------------------------------------

def cmd_oracle(args: argparse.Namespace) -> int:
    rates = _load_rates(args.rates)
    gadget = build_gadget(args.gadget, args.n, args.k)
    result = brute_force_oracle(gadget, rates, args.weight,
                                max_patterns=args.max_patterns)
    config = {"command": "oracle", "gadget": args.gadget, "n": args.n,
              "k": args.k, "rates": args.rates, "weight": args.weight}
    report = {
        "version": __version__, "config": config,
        "result": {
            "sites": result.sites,
            "patterns_run": result.patterns_run,
            "prob_z": result.prob_z,
            "prob_x": result.prob_x,
            "prob_either": result.prob_either,
            "by_weight_z": list(result.by_weight_z),
            "by_weight_x": list(result.by_weight_x),
            "count_z": list(result.count_z),
            "count_x": list(result.count_x),
            "remainder_bound": result.remainder_bound,
        },
    }
    _emit([json.dumps(report, indent=2, sort_keys=True)], args.output)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    if args.circuit:
        try:
            with open(args.circuit) as fh:
                circuit = circuit_from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read circuit {args.circuit!r}: {exc}")
    else:
        circuit = build_gadget(args.gadget, args.n, args.k,
                               pre_teleport=args.pre_teleport)
    violations = check_schedule(circuit)
    if violations:
        for loc, message in violations:
            print(f"violation at location {loc}: {message}", file=sys.stderr)
        return EXIT_INVARIANT
    print(f"ok: {len(circuit.locations)} locations, "
          f"{circuit.n_qubits} qubits")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biasrep",
        description="Repetition-code fault-tolerance toolkit for "
                    "phase-biased qubits")
    parser.add_argument("--version", action="version",
                        version=f"biasrep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo logical error rates")
    sim.add_argument("--gadget", choices=("teleport", "cnot"), required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--k", type=int, required=True)
    sim.add_argument("--rates", default="table1",
                     help="rate table: path, 'table1', or 'zero'")
    sim.add_argument("--trials", default="100000")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--leak-policy", default=LeakPolicy.RANDOM_Z,
                     type=LeakPolicy, choices=list(LeakPolicy))
    sim.add_argument("--pre-teleport", action="store_true",
                     help="teleport each input block onto a fresh block "
                          "first (leakage containment)")
    sim.add_argument("--output", default=None)
    sim.set_defaults(func=cmd_simulate)

    bnd = sub.add_parser("bounds", help="closed-form logical-error bounds")
    bnd.add_argument("--n", type=int, default=None)
    bnd.add_argument("--k", type=int, default=None)
    bnd.add_argument("--t", type=float, default=None)
    bnd.add_argument("--eps", type=float, default=None)
    bnd.add_argument("--bias", type=float, action="append", default=[])
    bnd.add_argument("--eps-grid", default=None)
    bnd.add_argument("--c", type=float, default=3.0)
    bnd.add_argument("--n-max", type=int, default=15)
    bnd.add_argument("--rates", default=None)
    bnd.add_argument("--optimize", choices=("n=k", "free"), default=None)
    bnd.add_argument("--output", default=None)
    bnd.set_defaults(func=cmd_bounds)

    opt = sub.add_parser("optimize", help="search the best odd (n, k)")
    opt.add_argument("--eps", type=float, default=None)
    opt.add_argument("--bias", type=float, action="append", default=[])
    opt.add_argument("--rates", default=None)
    opt.add_argument("--c", type=float, default=3.0)
    opt.add_argument("--n-max", type=int, default=15)
    opt.add_argument("--constraint", choices=("n=k", "free"), default="free")
    opt.add_argument("--output", default=None)
    opt.set_defaults(func=cmd_optimize)

    chan = sub.add_parser("channel", help="superoperator norms and rates")
    chan.add_argument("--builtin", choices=("cphase",), default=None)
    chan.add_argument("--kraus-json", default=None)
    chan.add_argument("--amplitude-damping", type=float, default=None)
    chan.add_argument("--input", default="bell",
                      help="'bell' or 'search' (canonical + random probes)")
    chan.add_argument("--qubit", choices=("A", "B"), default=None)
    chan.add_argument("--restarts", type=int, default=0)
    chan.add_argument("--seed", type=int, default=0)
    chan.add_argument("--output", default=None)
    chan.set_defaults(func=cmd_channel)

    orc = sub.add_parser("oracle", help="exhaustive low-weight fault enumeration")
    orc.add_argument("--gadget", choices=("teleport", "cnot"), required=True)
    orc.add_argument("--n", type=int, required=True)
    orc.add_argument("--k", type=int, required=True)
    orc.add_argument("--rates", default="table1")
    orc.add_argument("--weight", type=int, default=2)
    orc.add_argument("--max-patterns", type=int, default=2_000_000)
    orc.add_argument("--output", default=None)
    orc.set_defaults(func=cmd_oracle)

    val = sub.add_parser("validate", help="schedule and species checks")
    val.add_argument("--gadget", choices=("teleport", "cnot"), default=None)
    val.add_argument("--n", type=int, default=3)
    val.add_argument("--k", type=int, default=3)
    val.add_argument("--pre-teleport", action="store_true")
    val.add_argument("--circuit", default=None,
                     help="circuit text file instead of a built gadget")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # invariant violations and internal failures
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
