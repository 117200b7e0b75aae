"""Shared oracles and fixtures: brute-force searches and small channels used
to cross-check the solvers."""
import itertools

import numpy as np
from scipy.stats import norm

from ltipc import DiscreteChannel


def poisson_mean_by_recurrence(pmf: np.ndarray) -> float:
    """Mean of a pmf vector over {0..ymax}; the caller builds the vector via
    the exact recurrence pmf(k) = pmf(k-1) * lam / k."""
    return float(np.arange(pmf.size) @ pmf)


def poisson_pmf_recurrence(lam: float, ymax: int) -> np.ndarray:
    """Poisson pmf by the multiplicative recurrence, independent of the
    production implementation."""
    out = np.empty(ymax + 1)
    out[0] = np.exp(-lam)
    for k in range(1, ymax + 1):
        out[k] = out[k - 1] * lam / k
    return out


def simplex_grid(n: int, step: float):
    """All pmfs on n atoms with coordinates on a uniform grid of the given
    step (n <= 3 keeps this affordable)."""
    ticks = int(round(1.0 / step))
    if n == 1:
        yield np.array([1.0])
        return
    if n == 2:
        for i in range(ticks + 1):
            yield np.array([i * step, 1.0 - i * step])
        return
    if n == 3:
        for i in range(ticks + 1):
            rest = ticks - i
            for j in range(rest + 1):
                yield np.array([i * step, j * step, (rest - j) * step])
        return
    raise ValueError("grid search oracle only supports up to 3 inputs")


def _mi_batch(W: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Mutual information of each input pmf in the rows of P."""
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(W > 0, W * np.log(W), 0.0).sum(axis=1)
    Q = P @ W
    with np.errstate(divide="ignore", invalid="ignore"):
        hq = np.where(Q > 0, Q * np.log(Q), 0.0).sum(axis=1)
    return P @ d - hq


def grid_search_capacity(W: np.ndarray, step: float = 1e-3, cost=None,
                         alpha=None) -> float:
    """Dense grid search over the input simplex; the independent oracle for
    small Blahut-Arimoto runs."""
    P = np.array(list(simplex_grid(W.shape[0], step)))
    if alpha is not None:
        P = P[P @ np.asarray(cost) <= alpha + 1e-12]
    return float(_mi_batch(W, P).max())


def _symkl_batch(W: np.ndarray, P: np.ndarray) -> np.ndarray:
    logW = np.log(W)
    d = (W * logW).sum(axis=1)
    G = logW @ W.T
    return P @ d - np.einsum("ki,ij,kj->k", P, G, P)


def grid_search_symkl(W: np.ndarray, step: float = 1e-3, cost=None,
                      alpha=None, two_point_steps: int = 200_001) -> float:
    """Exhaustive two-point search plus a dense simplex grid search for the
    quadratic symmetrized-KL objective (strictly positive channels only)."""
    n = W.shape[0]
    best = 0.0
    t = np.linspace(0.0, 1.0, two_point_steps)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            tt = t
            if alpha is not None:
                costs = t * cost[i] + (1 - t) * cost[j]
                tt = t[costs <= alpha + 1e-12]
                if tt.size == 0:
                    continue
            P = np.zeros((tt.size, n))
            P[:, i] = tt
            P[:, j] = 1 - tt
            best = max(best, float(_symkl_batch(W, P).max()))
    P = np.array(list(simplex_grid(n, step)))
    if alpha is not None:
        P = P[P @ np.asarray(cost) <= alpha + 1e-12]
    best = max(best, float(_symkl_batch(W, P).max()))
    return best


def gaussian_channel(support, sigma: float, mu: float = 0.0,
                     step: float = 0.01, halfwidth: float = 10.0) -> DiscreteChannel:
    """Additive Gaussian channel discretized on a fine output grid."""
    x = np.asarray(support, dtype=np.float64)
    lo = x.min() + mu - halfwidth * sigma
    hi = x.max() + mu + halfwidth * sigma
    y = np.arange(lo, hi + step * 0.5, step)
    rows = norm.pdf(y[None, :], loc=x[:, None] + mu, scale=sigma)
    rows = rows / rows.sum(axis=1, keepdims=True)
    return DiscreteChannel(transition=rows, cost=x.copy(),
                           input_labels=tuple(x), output_labels=tuple(y))


def random_channel(rng, n_in: int, n_out: int, cost=None) -> DiscreteChannel:
    """Strictly positive random channel with unit-spaced costs by default."""
    W = rng.dirichlet(np.ones(n_out), size=n_in) + 1e-3
    W = W / W.sum(axis=1, keepdims=True)
    c = np.arange(n_in, dtype=np.float64) if cost is None else np.asarray(cost)
    return DiscreteChannel(transition=W, cost=c,
                           input_labels=tuple(range(n_in)),
                           output_labels=tuple(range(n_out)))


def bsc(p: float) -> DiscreteChannel:
    W = np.array([[1 - p, p], [p, 1 - p]])
    return DiscreteChannel(transition=W, cost=np.array([0.0, 1.0]),
                           input_labels=(0, 1), output_labels=(0, 1))


def small_corpus(seed: int = 2024):
    """Channels with <= 3 inputs and <= 4 outputs for oracle comparisons."""
    rng = np.random.default_rng(seed)
    chans = [
        bsc(0.11),
        bsc(0.25),
        # zero-capacity: identical rows
        DiscreteChannel(np.tile(rng.dirichlet(np.ones(3)), (2, 1)),
                        np.array([0.0, 1.0]), (0, 1), (0, 1, 2)),
        random_channel(rng, 2, 3),
        random_channel(rng, 3, 3),
        random_channel(rng, 3, 4),
        random_channel(rng, 3, 4, cost=np.array([0.0, 2.0, 5.0])),
    ]
    return chans
