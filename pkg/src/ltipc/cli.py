"""Batch front end: JSON problem files in, CSV reports out.

Exit codes: 0 success, 1 invalid input (one machine-parsable line on
stderr), 2 solver non-convergence.  Outputs are deterministic for fixed
inputs and seeds, except the wallclock_ms diagnostic column.

Caveat stated here because the reports depend on it: bounds computed on an
input grid are bounds for the grid-restricted channel.  The "grid lower
bound" rows are valid lower bounds for the true capacity; the "grid upper
bound of the discretized problem" rows under-estimate the true C_r, since
restricting inputs to a grid can only shrink the maximum.  Refine --grid to
tighten them.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import capacity_ordering_check
from .bounds import (
    block_sandwich_bounds,
    poisson_sym_bound_closed_form,
    stationary_lower_bound,
    stationary_upper_bound,
    sym_kl_max,
)
from .channel import (
    BlockChannelSpec,
    ChannelSpec,
    ImpulseResponse,
    InputGrid,
    build_block_channel,
    load_instance,
)
from .errors import BudgetExceededError, ConvergenceError
from .report import (
    GRID_UPPER_LABEL,
    BoundRow,
    fmt,
    instance_hash,
    sandwich_rows,
    verdict_rows,
    write_bound_report,
    write_sweep_report,
    write_trace,
)
from .simulate import SimConfig, simulate_p2p
from .solver import SolverConfig

COMMANDS = ("capacity", "bounds", "symkl", "sweep", "simulate", "degrade-check")

_SIM_TRIALS = 200
_SIM_SLOTS = 32


@dataclass(frozen=True)
class RunManifest:
    command: str
    instance: str
    out: str
    grid: int | None = None
    r: tuple = ()
    tol: float | None = None
    seed: int = 0
    axis: str | None = None
    values: tuple = ()

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not os.path.exists(self.instance):
            raise ValueError(f"instance file not found: {self.instance}")


class _UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_values(raw: str) -> tuple:
    """Comma list of floats; 'a..b' and 'a..b..step' ranges are expanded."""
    out = []
    for part in raw.split(","):
        part = part.strip()
        if ".." in part:
            pieces = part.split("..")
            if len(pieces) == 2:
                a, b = float(pieces[0]), float(pieces[1])
                step = 1.0
            elif len(pieces) == 3:
                a, b = float(pieces[0]), float(pieces[1])
                step = float(pieces[2])
            else:
                raise ValueError(f"bad range syntax: {part!r}")
            if step <= 0 or b < a:
                raise ValueError(f"bad range bounds: {part!r}")
            out.extend(np.arange(a, b + step * 0.5, step).tolist())
        elif part:
            out.append(float(part))
    if not out:
        raise ValueError("empty --values list")
    return tuple(out)


def thread_cap() -> int:
    raw = os.environ.get("LTIPC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map(fn, items):
    cap = thread_cap()
    if cap == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(fn, items))


def _load(manifest: RunManifest):
    spec, grid_points, tail_eps = load_instance(manifest.instance)
    if manifest.grid is not None:
        if manifest.grid < 2:
            raise ValueError("--grid must be >= 2")
        grid_points = manifest.grid
    config = SolverConfig() if manifest.tol is None else SolverConfig(tol=manifest.tol)
    with open(manifest.instance, "rb") as fh:
        inst_hash = instance_hash(fh.read())
    inst_id = os.path.splitext(os.path.basename(manifest.instance))[0]
    return spec, grid_points, tail_eps, config, inst_hash, inst_id


def _config_desc(manifest: RunManifest, grid_points: int, tol: float) -> str:
    rs = ";".join(str(r) for r in manifest.r) or "1"
    vals = ";".join(fmt(float(v)) for v in manifest.values)
    return (f"config: cmd={manifest.command} grid={grid_points} r={rs} "
            f"tol={fmt(tol)} seed={manifest.seed} axis={manifest.axis or '-'} "
            f"values={vals or '-'}")


def _r_list(manifest: RunManifest) -> tuple:
    rs = manifest.r or (1,)
    if any(r < 1 for r in rs):
        raise ValueError("--r must be >= 1")
    return tuple(rs)


def _cmd_capacity(manifest: RunManifest) -> int:
    spec, m, tail_eps, config, inst_hash, inst_id = _load(manifest)
    r = _r_list(manifest)[0]
    grid = InputGrid.uniform(spec.amax, m)
    t0 = time.perf_counter()
    bound = block_sandwich_bounds(BlockChannelSpec(spec, grid, r=r, tail_eps=tail_eps),
                                  config)
    ms = int((time.perf_counter() - t0) * 1000)
    k = spec.impulse.order
    name = "capacity" if k == 0 else GRID_UPPER_LABEL
    rows = [BoundRow(inst_id, name, r, bound.upper, gap=bound.gap,
                     iterations=bound.iterations, wallclock_ms=ms)]
    write_bound_report(manifest.out, rows, inst_hash,
                       _config_desc(manifest, m, config.tol))
    return 0


def _cmd_bounds(manifest: RunManifest) -> int:
    spec, m, tail_eps, config, inst_hash, inst_id = _load(manifest)
    grid = InputGrid.uniform(spec.amax, m)
    rows = []
    for r in _r_list(manifest):
        t0 = time.perf_counter()
        bound = block_sandwich_bounds(
            BlockChannelSpec(spec, grid, r=r, tail_eps=tail_eps), config)
        ms = int((time.perf_counter() - t0) * 1000)
        rows.extend(sandwich_rows(inst_id, bound, wallclock_ms=ms))
    write_bound_report(manifest.out, rows, inst_hash,
                       _config_desc(manifest, m, config.tol))
    return 0


def _cmd_symkl(manifest: RunManifest) -> int:
    spec, m, tail_eps, config, inst_hash, inst_id = _load(manifest)
    grid = InputGrid.uniform(spec.amax, m)
    channel = build_block_channel(BlockChannelSpec(spec, grid, r=1, tail_eps=tail_eps))
    t0 = time.perf_counter()
    res = sym_kl_max(channel, alpha=spec.alpha, config=config, seed=manifest.seed)
    ms = int((time.perf_counter() - t0) * 1000)
    rows = [BoundRow(inst_id, "sym-kl upper bound", 1, res.value, wallclock_ms=ms)]
    if spec.impulse.order == 0 and spec.lambda0 > 0:
        closed = poisson_sym_bound_closed_form(spec.amax, spec.alpha, spec.lambda0)
        rows.append(BoundRow(inst_id, "sym-kl closed form", 0, closed))
    write_bound_report(manifest.out, rows, inst_hash,
                       _config_desc(manifest, m, config.tol))
    return 0


def _sweep_spec(spec: ChannelSpec, axis: str, v: float) -> ChannelSpec:
    lam0, amax, alpha = spec.lambda0, spec.amax, spec.alpha
    if axis == "alpha":
        alpha = v
    elif axis == "amax":
        amax = v
    elif axis == "lambda0":
        lam0 = v
    else:
        raise ValueError(f"--axis must be one of alpha, amax, lambda0, got {axis!r}")
    return ChannelSpec(impulse=spec.impulse, lambda0=lam0, amax=amax, alpha=alpha)


def _cmd_sweep(manifest: RunManifest) -> int:
    spec, m, tail_eps, config, inst_hash, inst_id = _load(manifest)
    if manifest.axis is None:
        raise ValueError("sweep requires --axis")
    if not manifest.values:
        raise ValueError("sweep requires --values")
    values = manifest.values
    rs = _r_list(manifest)

    def solve(v: float) -> dict:
        svspec = _sweep_spec(spec, manifest.axis, v)
        grid = InputGrid.uniform(svspec.amax, m)
        out = {}
        for r in rs:
            bound = block_sandwich_bounds(
                BlockChannelSpec(svspec, grid, r=r, tail_eps=tail_eps), config)
            out[f"lower_r{r}"] = bound.lower
            out[f"upper_r{r}"] = bound.upper
        out["stationary_lower"] = stationary_lower_bound(
            svspec, grid, config, tail_eps).lower
        out["stationary_upper"] = stationary_upper_bound(
            svspec, grid, config, tail_eps).upper
        return out

    solved = _map(solve, list(values))
    columns = {name: [row[name] for row in solved] for name in solved[0]}
    write_sweep_report(manifest.out, manifest.axis, values, columns, inst_hash,
                       _config_desc(manifest, m, config.tol))
    return 0


def _cmd_simulate(manifest: RunManifest) -> int:
    spec, m, tail_eps, config, inst_hash, inst_id = _load(manifest)
    if manifest.values:
        inputs = np.asarray(manifest.values, dtype=np.float64)
    else:
        inputs = np.full(_SIM_SLOTS, spec.alpha)
    sim = SimConfig(seed=manifest.seed, n_slots=inputs.size, n_trials=_SIM_TRIALS)
    trace = simulate_p2p(spec, inputs, sim)
    write_trace(manifest.out, trace, inst_hash,
                _config_desc(manifest, m, config.tol))
    return 0


def _cmd_degrade_check(manifest: RunManifest) -> int:
    spec, m, tail_eps, config, inst_hash, inst_id = _load(manifest)
    if not manifest.values:
        raise ValueError("degrade-check requires --values with the taps of p'")
    p = spec.impulse.normalize()
    p_prime = ImpulseResponse(tuple(manifest.values)).normalize()
    grid = InputGrid.uniform(spec.amax, m)
    r = _r_list(manifest)[0]
    t0 = time.perf_counter()
    verdict = capacity_ordering_check(
        p, p_prime, spec.lambda0, spec.amax, spec.alpha, grid, r=r, config=config)
    ms = int((time.perf_counter() - t0) * 1000)
    rows = verdict_rows(inst_id, verdict)
    if verdict.status != "not-applicable":
        rows.extend(sandwich_rows(f"{inst_id}|p", verdict.bound_p, wallclock_ms=ms))
        rows.extend(sandwich_rows(f"{inst_id}|p'", verdict.bound_p_prime))
    write_bound_report(manifest.out, rows, inst_hash,
                       _config_desc(manifest, m, config.tol))
    return 0


_DISPATCH = {
    "capacity": _cmd_capacity,
    "bounds": _cmd_bounds,
    "symkl": _cmd_symkl,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "degrade-check": _cmd_degrade_check,
}


def run(manifest: RunManifest) -> int:
    """Execute one manifest; artifacts land at manifest.out."""
    return _DISPATCH[manifest.command](manifest)


def build_parser() -> _Parser:
    parser = _Parser(prog="ltipc", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"ltipc {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--instance", required=True, help="JSON problem file")
    parser.add_argument("--out", required=True, help="output CSV path (or prefix for simulate)")
    parser.add_argument("--grid", type=int, default=None, help="input grid points")
    parser.add_argument("--r", action="append", type=int, default=None,
                        help="block length r; repeatable")
    parser.add_argument("--tol", type=float, default=None, help="solver gap tolerance, nats")
    parser.add_argument("--seed", type=int, default=0, help="simulation seed")
    parser.add_argument("--axis", default=None, help="sweep axis: alpha, amax or lambda0")
    parser.add_argument("--values", default=None,
                        help="comma list, ranges a..b or a..b..step allowed")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        manifest = RunManifest(
            command=args.command,
            instance=args.instance,
            out=args.out,
            grid=args.grid,
            r=tuple(args.r) if args.r else (),
            tol=args.tol,
            seed=args.seed,
            axis=args.axis,
            values=_parse_values(args.values) if args.values else (),
        )
        return run(manifest)
    except ConvergenceError as e:
        print(f"LTIPC-ERROR non-convergence: {e}", file=sys.stderr)
        return 2
    except (BudgetExceededError, ValueError, OSError) as e:
        print(f"LTIPC-ERROR invalid-input: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
