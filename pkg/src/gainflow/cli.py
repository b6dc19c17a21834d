"""Command-line entry point.

Subcommands: care (policy-iteration oracle), eval (objective at one gain),
flow (trajectory integration to CSV), grid (2-d objective grid to CSV), and
bench (the comparative convergence study).

Exit codes are a stable contract: 0 success, 2 input error, 3 domain or
precondition error, 4 numerical failure. Structured results go to standard
output as JSON; time and grid series go to CSV files. Every float is
emitted with 17 significant digits so parsing the text recovers the exact
binary value.
"""

from __future__ import annotations

import argparse
import json
import math
import sys as _sys
from pathlib import Path

import numpy as np

from . import bellman, bench, cost_flow, flow, lqr_core, matlin
from .errors import GainflowError, NotInSigmaSet, NotStabilizing, SamplingFailure
from .lqr_core import SystemInstance

_INPUT_ERRORS = (OSError, ValueError, json.JSONDecodeError)


def fmt_float(x: float) -> str:
    """17-significant-digit decimal text; round-trips float64 exactly."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _emit_json(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    if isinstance(value, np.ndarray):
        return _emit_json(value.tolist())
    if isinstance(value, dict):
        inner = ",".join(f"{json.dumps(str(k))}:{_emit_json(v)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_emit_json(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dump_json(value) -> str:
    return _emit_json(value)


def _rows(m: np.ndarray) -> list[list[float]]:
    return [[float(x) for x in row] for row in np.asarray(m)]


def _print(value) -> None:
    _sys.stdout.write(dump_json(value) + "\n")


def _fail(code: int, name: str, message) -> int:
    _sys.stderr.write(dump_json({"error": name, "message": str(message)}) + "\n")
    return code


def load_instance(path) -> tuple[SystemInstance, np.ndarray | None]:
    """Read an instance file: JSON with n, m and row-major a, b, q, r arrays
    (all required; there are no weight defaults) plus an optional k0."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("instance file must be a JSON object")
    for key in ("n", "m", "a", "b", "q", "r"):
        if key not in data:
            raise ValueError(f"instance file is missing required field {key!r}")
    n, m = int(data["n"]), int(data["m"])
    if n <= 0 or m <= 0:
        raise ValueError("n and m must be positive")

    def grab(name: str, rows: int, cols: int) -> np.ndarray:
        raw = data[name]
        if not isinstance(raw, list) or len(raw) != rows * cols:
            raise ValueError(f"field {name!r} must be a flat array of {rows * cols} numbers")
        return np.array([float(x) for x in raw]).reshape(rows, cols)

    sys_ = SystemInstance(a=grab("a", n, n), b=grab("b", n, m),
                          q=grab("q", n, n), r=grab("r", m, m))
    k0 = None
    if data.get("k0") is not None:
        k0 = grab("k0", m, n)
    return sys_, k0


def _parse_gain(text: str, m: int, n: int) -> np.ndarray:
    entries = [float(x) for x in text.split(",")]
    if len(entries) != m * n:
        raise ValueError(f"gain needs {m * n} comma-separated entries, got {len(entries)}")
    return np.array(entries).reshape(m, n)


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_care(args) -> int:
    try:
        sys_, k0_file = load_instance(args.instance)
        if args.k0 is not None:
            k0 = _parse_gain(args.k0, sys_.m, sys_.n)
        elif k0_file is not None:
            k0 = k0_file
        else:
            k0 = None
    except _INPUT_ERRORS as exc:
        return _fail(2, "InputError", exc)
    try:
        if k0 is None:
            k0 = bench.sample_stabilizing_gain(sys_, np.random.default_rng(args.seed))
        result = lqr_core.kleinman(sys_, k0, tol=args.tol, max_iter=args.max_iter)
    except GainflowError as exc:
        return _fail(3, type(exc).__name__, exc)
    _print({
        "p_star": _rows(result.p_star),
        "k_star": _rows(result.k_star),
        "residual": result.residual,
        "iterations": result.iterations,
    })
    return 0


def cmd_eval(args) -> int:
    try:
        sys_, _ = load_instance(args.instance)
        k = _parse_gain(args.k, sys_.m, sys_.n)
    except _INPUT_ERRORS as exc:
        return _fail(2, "InputError", exc)
    in_k = lqr_core.in_stabilizing_set(sys_, k)
    in_k_sigma = lqr_core.in_sigma_set(sys_, k)
    abscissa = matlin.spectrum(lqr_core.closed_loop(sys_, k)).abscissa
    out: dict = {}
    try:
        if args.objective == "bellman":
            if not in_k_sigma:
                return _fail(3, "NotInSigmaSet", "gain is outside the effective domain")
            ev = bellman.bellman_error(sys_, k)
            out["value"] = ev.e
            out["grad"] = _rows(bellman.bellman_gradient(sys_, k).grad) if in_k else None
            if not in_k:
                out["grad_reason"] = "gain is not in the stabilizing set"
            out["m_eigs"] = [float(w) for w in np.linalg.eigvalsh(ev.m_matrix)]
        else:
            if not in_k:
                return _fail(3, "NotStabilizing", "the cost needs a stabilizing gain")
            ce = cost_flow.lqr_cost(sys_, k)
            out["value"] = ce.f
            out["grad"] = _rows(cost_flow.lqr_gradient(sys_, k))
            out["y_eigs"] = [float(w) for w in np.linalg.eigvalsh(ce.y_matrix)]
    except GainflowError as exc:
        return _fail(3, type(exc).__name__, exc)
    out["abscissa"] = abscissa
    out["in_K"] = in_k
    out["in_K_sigma"] = in_k_sigma
    _print(out)
    return 0


def _trajectory_csv(sys_: SystemInstance, traj: flow.FlowTrajectory) -> str:
    gain_cols = [f"k_{i + 1}{j + 1}" for i in range(sys_.m) for j in range(sys_.n)]
    lines = ["t," + ",".join(gain_cols) + ",objective,grad_norm,abscissa"]
    for s in traj.samples:
        cells = [fmt_float(s.t)]
        cells += [fmt_float(x) for x in s.k.ravel()]
        cells += [fmt_float(s.objective), fmt_float(s.grad_norm), fmt_float(s.abscissa)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_flow(args) -> int:
    try:
        sys_, k0_file = load_instance(args.instance)
        k0 = _parse_gain(args.k0, sys_.m, sys_.n) if args.k0 is not None else k0_file
        if k0 is None:
            raise ValueError("no initial gain: pass --k0 or put k0 in the instance file")
        config = flow.FlowConfig(kind=args.kind, beta=args.beta, gamma=args.gamma,
                                 rtol=args.rtol, atol=args.atol, t_max=args.tmax,
                                 grad_tol=args.grad_tol)
    except _INPUT_ERRORS as exc:
        return _fail(2, "InputError", exc)
    try:
        traj = flow.integrate(sys_, k0, config)
    except GainflowError as exc:
        return _fail(3, type(exc).__name__, exc)
    _write_text(args.out, _trajectory_csv(sys_, traj))
    last = traj.samples[-1]
    _print({
        "status": traj.status,
        "t": last.t,
        "k_final": _rows(traj.k_final),
        "objective": last.objective,
        "grad_norm": last.grad_norm,
        "abscissa": last.abscissa,
        "samples": len(traj.samples),
        "csv": str(args.out),
    })
    return 4 if traj.status == flow.STEP_FAILURE else 0


def _parse_axis(spec: str) -> tuple[float, float, int]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"axis spec must be min:max:steps, got {spec!r}")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return lo, hi, steps


def cmd_grid(args) -> int:
    try:
        sys_, _ = load_instance(args.instance)
        k1_lo, k1_hi, n1 = _parse_axis(args.k1)
        k2_lo, k2_hi, n2 = _parse_axis(args.k2)
    except _INPUT_ERRORS as exc:
        return _fail(2, "InputError", exc)
    if sys_.n != 2 or sys_.m != 1:
        return _fail(3, "DomainError", "grid evaluation needs n = 2, m = 1")
    result = bench.grid_eval(sys_, (k1_lo, k1_hi), (k2_lo, k2_hi), (n1, n2),
                             objective=args.objective)
    lines = ["k1,k2,value,stable"]
    for i, k1 in enumerate(result.k1):
        for j, k2 in enumerate(result.k2):
            lines.append(",".join([
                fmt_float(k1), fmt_float(k2),
                fmt_float(result.values[i, j]),
                "1" if result.stable[i, j] else "0",
            ]))
    _write_text(args.out, "\n".join(lines) + "\n")
    singular = int(np.isnan(result.values).sum())
    _print({"csv": str(args.out), "cells": int(result.values.size), "singular_cells": singular})
    return 0


def _bench_csv(kinds, grid, record) -> str:
    header = "t," + ",".join(f"rho_{kind}" for kind in kinds)
    lines = [header]
    for idx, t in enumerate(grid):
        cells = [fmt_float(t)]
        cells += [fmt_float(record.curves[kind][idx]) for kind in kinds]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    try:
        data = {}
        if args.config is not None:
            with open(args.config, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            if not isinstance(data, dict):
                raise ValueError("bench config must be a JSON object")
            allowed = {"num_instances", "n", "m", "seed", "flows",
                       "q_scale", "r_scale", "time_grid"}
            unknown = set(data) - allowed
            if unknown:
                raise ValueError(f"unknown config fields: {sorted(unknown)}")
            if "flows" in data:
                data["flows"] = tuple(data["flows"])
            if "time_grid" in data:
                data["time_grid"] = tuple(data["time_grid"])
        if args.seed is not None:
            data["seed"] = args.seed
        config = bench.BenchConfig(**data)
    except (*_INPUT_ERRORS, TypeError) as exc:
        return _fail(2, "InputError", exc)
    result = bench.run_benchmark(config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = list(config.time_grid)
    for record in result.records:
        _write_text(out_dir / f"instance_{record.instance_id:04d}.csv",
                    _bench_csv(config.flows, grid, record))
    summary = result.summary
    summary_json = {
        "config": {
            "num_instances": config.num_instances, "n": config.n, "m": config.m,
            "seed": config.seed, "flows": list(config.flows),
            "q_scale": config.q_scale, "r_scale": config.r_scale,
            "time_grid": grid,
        },
        "median": {kind: list(summary.median[kind]) for kind in config.flows},
        "q1": {kind: list(summary.q1[kind]) for kind in config.flows},
        "q3": {kind: list(summary.q3[kind]) for kind in config.flows},
        "converged_counts": summary.converged_counts,
        "num_instances": summary.num_instances,
        "num_failed_instances": summary.num_failed_instances,
        "instances": [
            {
                "id": r.instance_id,
                "seed": r.seed,
                "error": r.error,
                "k_star": _rows(r.k_star) if r.k_star is not None else None,
                "statuses": r.statuses,
                "converged": r.converged,
                "t_hit": r.t_hit,
            }
            for r in result.records
        ],
    }
    _write_text(out_dir / "summary.json", dump_json(summary_json) + "\n")
    _print({
        "out": str(out_dir),
        "instances": summary.num_instances,
        "failed_instances": summary.num_failed_instances,
        "converged_counts": summary.converged_counts,
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gainflow",
        description="Optimal LQR gains via gradient flows of a feedback-parametrized "
                    "Bellman error, with baseline flows and a policy-iteration oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("care", help="optimal gain via policy iteration")
    p.add_argument("instance")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--k0", help="comma-separated initial gain entries (row-major)")
    p.add_argument("--seed", type=int, default=0, help="seed for sampling k0 when absent")
    p.set_defaults(func=cmd_care)

    p = sub.add_parser("eval", help="objective value and gradient at one gain")
    p.add_argument("instance")
    p.add_argument("--k", required=True, help="comma-separated gain entries (row-major)")
    p.add_argument("--objective", choices=("bellman", "lqr"), default="bellman")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("flow", help="integrate a gradient flow, write trajectory CSV")
    p.add_argument("instance")
    p.add_argument("--kind", choices=flow.FLOW_KINDS, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--atol", type=float, default=1e-10)
    p.add_argument("--tmax", type=float, default=1e4)
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--k0", help="comma-separated initial gain entries (row-major)")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("grid", help="evaluate an objective over a 2-d gain grid")
    p.add_argument("instance")
    p.add_argument("--objective", choices=("bellman", "lqr"), default="bellman")
    p.add_argument("--k1", required=True, help="axis spec min:max:steps")
    p.add_argument("--k2", required=True, help="axis spec min:max:steps")
    p.add_argument("--out", required=True, help="grid CSV path")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("bench", help="comparative convergence study")
    p.add_argument("--config", help="BenchConfig JSON path (defaults apply)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    _sys.exit(main())
