"""Blahut-Arimoto capacity and capacity-cost solvers for finite channels.

All information quantities are in nats.  The constrained solver wraps the
standard iteration in an outer bisection on the cost multiplier, which is
safe because the capacity-cost function is concave in the budget.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import DiscreteChannel
from .errors import ConvergenceError

_TINY = 1e-300
_WEIGHT_FLOOR = 1e-300  # BA weights below this are clamped to zero


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9             # duality-gap stopping threshold, nats
    max_iters: int = 200_000
    lagrange_bisect_tol: float = 1e-6  # relative tolerance on |E[cost] - alpha|

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.lagrange_bisect_tol <= 0:
            raise ValueError("lagrange_bisect_tol must be positive")


@dataclass(frozen=True)
class CapacityResult:
    """Solver output: optimal value plus diagnostics.

    history holds the running objective (mutual information for
    unconstrained runs, the cost-tilted objective otherwise), one entry per
    iteration; it is non-decreasing for the standard iteration.
    """

    value: float
    input_dist: np.ndarray
    achieved_cost: float
    iterations: int
    gap: float
    history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        p = np.asarray(self.input_dist, dtype=np.float64)
        p.flags.writeable = False
        object.__setattr__(self, "input_dist", p)


def _check_input_dist(channel: DiscreteChannel, input_dist) -> np.ndarray:
    p = np.asarray(input_dist, dtype=np.float64)
    if p.shape != (channel.n_inputs,):
        raise ValueError(
            f"input distribution has length {p.shape}, channel has {channel.n_inputs} inputs")
    if np.any(p < -1e-12):
        raise ValueError("input distribution has negative entries")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"input distribution sums to {p.sum()}, expected 1")
    return np.maximum(p, 0.0)


def _mi(W: np.ndarray, p: np.ndarray) -> float:
    """I(X;Y) in nats for channel W and input p; 0*log0 terms are dropped."""
    q = p @ W
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(W > 0, W / np.maximum(q[None, :], _TINY), 1.0)
        contrib = np.where(W > 0, W * np.log(ratio), 0.0)
    return float(p @ contrib.sum(axis=1))


def mutual_information(channel: DiscreteChannel, input_dist) -> float:
    """Exact mutual information of the channel under the given input law."""
    p = _check_input_dist(channel, input_dist)
    return _mi(channel.transition, p)


def _row_relents(W: np.ndarray, wlogw: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D(W(.|x) || q) for every row x."""
    logq = np.log(np.maximum(q, _TINY))
    return wlogw - W @ logq


def _ba(W: np.ndarray, cost: np.ndarray, s: float, tol: float, max_iters: int):
    """Blahut-Arimoto for max_p [I(p) - s * E_p[cost]], uniform start.

    Stops on the duality gap max_x(D_x - s c_x) - E_p[D_x - s c_x] <= tol,
    which certifies the tilted objective to within tol.  Returns
    (p, iterations, gap, history of the running objective).
    """
    n = W.shape[0]
    p = np.full(n, 1.0 / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        wlogw = np.where(W > 0, W * np.log(np.maximum(W, _TINY)), 0.0).sum(axis=1)
    tilt = s * cost if s != 0 else 0.0
    history = []
    gap = np.inf
    for it in range(1, max_iters + 1):
        q = p @ W
        d = _row_relents(W, wlogw, q)
        obj = d - tilt
        f = float(p @ obj)
        history.append(f)
        gap = float(np.max(obj) - f)
        if gap <= tol:
            return p, it, gap, history
        w = p * np.exp(obj - np.max(obj))
        w[w < _WEIGHT_FLOOR] = 0.0
        p = w / w.sum()
    raise ConvergenceError(
        f"Blahut-Arimoto did not reach gap {tol} in {max_iters} iterations "
        f"(last gap {gap:.3e})", gap=gap, iterations=max_iters)


def _result(channel: DiscreteChannel, p: np.ndarray, iterations: int, gap: float,
            history) -> CapacityResult:
    return CapacityResult(
        value=_mi(channel.transition, p),
        input_dist=p,
        achieved_cost=float(p @ channel.cost),
        iterations=iterations,
        gap=gap,
        history=tuple(history),
    )


def _duplicate_row_reps(channel: DiscreteChannel):
    """Representative indices for groups of bit-identical transition rows.

    Identical rows (windows filtering to the same intensity, or inputs the
    filter ignores) create flat optimal faces that stall the iteration.  The
    reduction is exact: moving a group's mass onto its cheapest member keeps
    the mutual information and can only lower the cost, so some optimizer of
    the original problem lives on the representatives.
    """
    _, inverse = np.unique(np.ascontiguousarray(channel.transition), axis=0,
                           return_inverse=True)
    if inverse.max() + 1 == channel.n_inputs:
        return None
    reps = np.empty(inverse.max() + 1, dtype=np.int64)
    for g in range(reps.size):
        members = np.flatnonzero(inverse == g)
        reps[g] = members[np.argmin(channel.cost[members])]
    return np.sort(reps), inverse


def ba_capacity(channel: DiscreteChannel, alpha: float | None = None,
                config: SolverConfig = SolverConfig()) -> CapacityResult:
    """Capacity (alpha=None) or capacity-cost value at average budget alpha.

    The constrained path first tries the unconstrained optimum; if its cost
    exceeds alpha it bisects the Lagrange multiplier until the achieved cost
    matches alpha within the configured relative tolerance, blending the two
    bracketing solutions when the cost jumps across a support change.
    """
    merged = _duplicate_row_reps(channel)
    if merged is not None:
        reps, _ = merged
        reduced = DiscreteChannel(
            transition=channel.transition[reps], cost=channel.cost[reps],
            input_labels=tuple(channel.input_labels[i] for i in reps),
            output_labels=channel.output_labels)
        res = ba_capacity(reduced, alpha=alpha, config=config)
        p_full = np.zeros(channel.n_inputs)
        p_full[reps] = res.input_dist
        return CapacityResult(
            value=res.value, input_dist=p_full,
            achieved_cost=res.achieved_cost, iterations=res.iterations,
            gap=res.gap, history=res.history)

    W = channel.transition
    cost = channel.cost

    if alpha is None:
        p0, it0, gap0, hist0 = _ba(W, cost, 0.0, config.tol, config.max_iters)
        return _result(channel, p0, it0, gap0, hist0)

    # Probe the unconstrained cost at loose tolerance; the full-accuracy
    # unconstrained solve is only needed when the constraint may be inactive.
    probe_tol = max(config.tol, 1e-5)
    p0, it0, gap0, hist0 = _ba(W, cost, 0.0, probe_tol, config.max_iters)
    cost0 = float(p0 @ cost)
    if cost0 <= 1.05 * alpha + 1e-2:
        p0, it0, gap0, hist0 = _ba(W, cost, 0.0, config.tol, config.max_iters)
        res0 = _result(channel, p0, it0, gap0, hist0)
        if res0.achieved_cost <= alpha + 1e-12:
            return res0

    min_cost = float(np.min(cost))
    if alpha < min_cost - 1e-12:
        raise ValueError(f"alpha={alpha} below the cheapest input cost {min_cost}")
    if alpha <= min_cost + 1e-12:
        # Only the cheapest inputs are feasible; solve on that subchannel.
        idx = np.flatnonzero(cost <= min_cost + 1e-12)
        sub = W[idx]
        ps, its, gaps, hists = _ba(sub, cost[idx], 0.0, config.tol, config.max_iters)
        p = np.zeros(channel.n_inputs)
        p[idx] = ps
        return _result(channel, p, it0 + its, gaps, hists)

    rel = config.lagrange_bisect_tol
    iters_total = it0

    # Bracket: cost at s=0 is above alpha; double s until it drops below.
    s_lo, p_lo, cost_lo = 0.0, p0, float(p0 @ cost)
    s_hi = 1.0
    for _ in range(200):
        p_hi, it, gap_hi, hist_hi = _ba(W, cost, s_hi, config.tol, config.max_iters)
        iters_total += it
        cost_hi = float(p_hi @ cost)
        if cost_hi <= alpha:
            break
        s_lo, p_lo, cost_lo = s_hi, p_hi, cost_hi
        s_hi *= 2.0
    else:
        raise ConvergenceError(
            f"could not bracket the cost constraint at alpha={alpha}",
            gap=np.inf, iterations=iters_total)

    last = (p_hi, gap_hi, hist_hi)
    while True:
        if alpha - cost_hi <= rel * alpha:
            return _result(channel, p_hi, iters_total, last[1], last[2])
        if s_hi - s_lo < 1e-13 * (1.0 + s_hi):
            # Optimal support changes at this multiplier; the maximizer set is
            # convex, so blend the bracketing solutions to land on alpha.
            theta = (alpha - cost_hi) / max(cost_lo - cost_hi, _TINY)
            p = theta * p_lo + (1.0 - theta) * p_hi
            return _result(channel, p, iters_total, last[1], last[2])
        s_mid = 0.5 * (s_lo + s_hi)
        p_mid, it, gap_mid, hist_mid = _ba(W, cost, s_mid, config.tol, config.max_iters)
        iters_total += it
        cost_mid = float(p_mid @ cost)
        if cost_mid > alpha:
            s_lo, p_lo, cost_lo = s_mid, p_mid, cost_mid
        else:
            s_hi, p_hi, cost_hi = s_mid, p_mid, cost_mid
            last = (p_mid, gap_mid, hist_mid)


def capacity_cost_curve(channel: DiscreteChannel, alphas,
                        config: SolverConfig = SolverConfig()) -> list:
    """ba_capacity along an ascending list of budgets."""
    alphas = list(alphas)
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be sorted ascending")
    return [ba_capacity(channel, alpha=a, config=config) for a in alphas]
