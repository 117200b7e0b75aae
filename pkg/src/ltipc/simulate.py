"""Monte Carlo simulation of the filtered-Poisson channel and the
multi-terminal network law, plus a plug-in mutual-information estimator.

Reproducibility contract: all randomness flows through Philox (a counter
based generator) keyed by (seed, stream), and Poisson variates are drawn by
a fixed, documented algorithm: inversion by sequential search below
intensity 30, Atkinson's logistic-envelope accept-reject above.  Trial
number and a purpose tag select the stream, so traces are independent of
execution order and identical across platforms for a given seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .channel import ChannelSpec, DiscreteChannel, NetworkSpec, convolve

_INVERSION_CUTOFF = 30.0

# Stream tags keep the trial substreams of different operations disjoint.
_STREAM_P2P = 1
_STREAM_NETWORK = 2
_STREAM_PLUGIN = 3


@dataclass(frozen=True)
class SimConfig:
    seed: int
    n_slots: int
    n_trials: int

    def __post_init__(self):
        if self.n_slots < 1 or self.n_trials < 1:
            raise ValueError("n_slots and n_trials must be >= 1")
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class Trace:
    """Simulated realizations: inputs[tx, slot] intensities and
    outputs[trial, rx, slot] counts."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=np.float64)
        y = np.asarray(self.outputs)
        if x.ndim != 2 or y.ndim != 3:
            raise ValueError("inputs must be (tx, slot), outputs (trial, rx, slot)")
        if y.shape[2] != x.shape[1]:
            raise ValueError("output slot count must match input slot count")
        if np.any(y < 0) or not np.issubdtype(y.dtype, np.integer):
            raise ValueError("outputs must be nonnegative integer counts")
        x.flags.writeable = False
        yy = np.ascontiguousarray(y)
        yy.flags.writeable = False
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", yy)

    def input_rows(self):
        """CSV rows (trial, slot, tx_id, x); inputs repeat across trials."""
        n_trials = self.outputs.shape[0]
        for trial in range(n_trials):
            for tx in range(self.inputs.shape[0]):
                for slot in range(self.inputs.shape[1]):
                    yield trial, slot, tx, self.inputs[tx, slot]

    def output_rows(self):
        """CSV rows (trial, slot, rx_id, y)."""
        n_trials, n_rx, n_slots = self.outputs.shape
        for trial in range(n_trials):
            for rx in range(n_rx):
                for slot in range(n_slots):
                    yield trial, slot, rx, int(self.outputs[trial, rx, slot])


def substream(seed: int, stream: int) -> np.random.Generator:
    """Philox generator keyed directly by (seed, stream)."""
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _poisson_inversion(gen: np.random.Generator, lam: float, size: int) -> np.ndarray:
    """Inversion by sequential search; one uniform per variate."""
    u = gen.random(size)
    counts = np.zeros(size, dtype=np.int64)
    pmf = math.exp(-lam)
    cdf = np.full(size, pmf)
    k = 0
    # Search depth is bounded: the cdf reaches 1 - 1e-15 well before this cap.
    kmax = int(lam + 40.0 * math.sqrt(lam + 1.0) + 50)
    pending = u > cdf
    while pending.any() and k < kmax:
        k += 1
        pmf *= lam / k
        cdf[pending] += pmf
        counts[pending] = k
        pending = u > cdf
    return counts


def _poisson_atkinson(gen: np.random.Generator, lam: float, size: int) -> np.ndarray:
    """Atkinson's logistic-envelope accept-reject for large intensities.

    Proposals are drawn in deterministic rounds so the uniform consumption
    order, and hence the output, is fixed by the generator state alone.
    """
    beta = math.pi / math.sqrt(3.0 * lam)
    alpha = beta * lam
    c = 0.767 - 3.36 / lam
    k = math.log(c) - lam - math.log(beta)
    out = np.empty(size, dtype=np.int64)
    filled = 0
    while filled < size:
        n_draw = max(size - filled, 16)
        u = gen.random(n_draw)
        v = gen.random(n_draw)
        ok_u = (u > 0.0) & (u < 1.0)
        x = np.where(ok_u, (alpha - np.log((1.0 - u) / np.where(ok_u, u, 0.5))) / beta, -1.0)
        n = np.floor(x + 0.5)
        valid = ok_u & (n >= 0)
        y = alpha - beta * x
        with np.errstate(divide="ignore", invalid="ignore"):
            lhs = y + np.log(v) - 2.0 * np.logaddexp(0.0, y)
            rhs = k + n * math.log(lam) - gammaln(n + 1.0)
        accept = valid & (lhs <= rhs)
        picked = np.flatnonzero(accept)[: size - filled]
        out[filled: filled + picked.size] = n[picked].astype(np.int64)
        filled += picked.size
    return out


def poisson_draw(gen: np.random.Generator, lam: float, size: int) -> np.ndarray:
    """size iid Poisson(lam) variates from the given generator."""
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"intensity must be finite and >= 0, got {lam}")
    if lam == 0:
        return np.zeros(size, dtype=np.int64)
    if lam < _INVERSION_CUTOFF:
        return _poisson_inversion(gen, lam, size)
    return _poisson_atkinson(gen, lam, size)


def simulate_p2p(spec: ChannelSpec, inputs, sim: SimConfig) -> Trace:
    """Simulate the point-to-point channel for a fixed input waveform.

    Given the inputs, slot counts are independent Poisson with intensity
    lambda0 + (x * taps)_i.  Each trial uses its own (seed, trial) substream,
    so parallel and serial execution agree.
    """
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 1 or x.size != sim.n_slots:
        raise ValueError("inputs must be a 1-D sequence of length n_slots")
    if np.any(x < 0) or np.any(x > spec.amax + 1e-12):
        raise ValueError("inputs must lie in [0, amax]")
    lam = spec.lambda0 + convolve(x, spec.impulse)
    outputs = np.empty((sim.n_trials, 1, sim.n_slots), dtype=np.int64)
    # Slots sharing an intensity are drawn in one batch; the grouping is a
    # pure function of the inputs, so traces stay reproducible.
    uniq, inv = np.unique(lam, return_inverse=True)
    groups = [np.flatnonzero(inv == gi) for gi in range(uniq.size)]
    for trial in range(sim.n_trials):
        gen = substream(sim.seed, (_STREAM_P2P << 32) + trial)
        for lam_val, slots in zip(uniq, groups):
            outputs[trial, 0, slots] = poisson_draw(gen, lam_val, slots.size)
    return Trace(inputs=x[None, :], outputs=outputs)


def simulate_network(net: NetworkSpec, inputs, sim: SimConfig) -> Trace:
    """Simulate the single-hop network law: receiver j sees Poisson counts
    with intensity lambda0 plus the superposition of every transmitter's
    filtered contribution; receivers are independent given the inputs."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (net.n_tx, sim.n_slots):
        raise ValueError(f"inputs must have shape ({net.n_tx}, {sim.n_slots})")
    if np.any(x < 0) or np.any(x > net.amax[:, None] + 1e-12):
        raise ValueError("inputs must lie in [0, amax] per transmitter")
    lam = np.full((net.n_rx, sim.n_slots), float(net.lambda0))
    for j in range(net.n_rx):
        for l in range(net.n_tx):
            taps = net.impulses[l, j]
            lam[j] += np.convolve(x[l], taps)[: sim.n_slots]
    outputs = np.empty((sim.n_trials, net.n_rx, sim.n_slots), dtype=np.int64)
    per_rx = []
    for j in range(net.n_rx):
        uniq, inv = np.unique(lam[j], return_inverse=True)
        per_rx.append((uniq, [np.flatnonzero(inv == gi) for gi in range(uniq.size)]))
    for trial in range(sim.n_trials):
        gen = substream(sim.seed, (_STREAM_NETWORK << 32) + trial)
        for j in range(net.n_rx):
            uniq, groups = per_rx[j]
            for lam_val, slots in zip(uniq, groups):
                outputs[trial, j, slots] = poisson_draw(gen, lam_val, slots.size)
    return Trace(inputs=x, outputs=outputs)


@dataclass(frozen=True)
class PluginMiEstimate:
    """Plug-in estimate with jackknife standard error.

    The plug-in estimator is positively biased by about
    (|X|-1)(|Y|-1)/(2n) nats; `bias` records that figure, it is not
    subtracted from `value`.
    """

    value: float
    stderr: float
    bias: float
    n_samples: int


def _plugin_mi(counts: np.ndarray, n: int) -> float:
    p = counts / n
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p / np.maximum(px * py, 1e-300)), 0.0)
    return float(terms.sum())


def plugin_mi_estimate(channel: DiscreteChannel, input_dist, n_samples: int,
                       seed: int) -> PluginMiEstimate:
    """Sample (x, y) pairs iid from p(x)W(y|x), return the mutual information
    of the empirical joint histogram plus a jackknife standard error."""
    p = np.asarray(input_dist, dtype=np.float64)
    if p.shape != (channel.n_inputs,):
        raise ValueError("input distribution length mismatch")
    if abs(p.sum() - 1.0) > 1e-9 or np.any(p < -1e-12):
        raise ValueError("input distribution must be a pmf")
    min_n = 10 * channel.n_inputs * channel.n_outputs
    if n_samples < min_n:
        raise ValueError(f"need at least {min_n} samples for this alphabet")

    gen = substream(seed, _STREAM_PLUGIN << 32)
    cum_p = np.cumsum(np.maximum(p, 0.0))
    cum_p[-1] = 1.0
    xs = np.searchsorted(cum_p, gen.random(n_samples), side="right")
    cum_w = np.cumsum(channel.transition, axis=1)
    cum_w[:, -1] = 1.0
    u = gen.random(n_samples)
    ys = np.empty(n_samples, dtype=np.int64)
    for xv in np.unique(xs):
        mask = xs == xv
        ys[mask] = np.searchsorted(cum_w[xv], u[mask], side="right")

    counts = np.zeros((channel.n_inputs, channel.n_outputs), dtype=np.int64)
    np.add.at(counts, (xs, ys), 1)

    mi = _plugin_mi(counts, n_samples)

    # Jackknife over samples: leave-one-out estimates coincide within a
    # cell, so loop over occupied cells rather than samples.
    occupied = np.argwhere(counts > 0)
    loo = np.empty(occupied.shape[0])
    weights = np.empty(occupied.shape[0])
    scratch = counts.astype(np.float64)
    for idx, (i, j) in enumerate(occupied):
        scratch[i, j] -= 1.0
        loo[idx] = _plugin_mi(scratch, n_samples - 1)
        scratch[i, j] += 1.0
        weights[idx] = counts[i, j]
    loo_mean = float(weights @ loo) / n_samples
    var_jack = (n_samples - 1) / n_samples * float(weights @ (loo - loo_mean) ** 2)
    bias = (channel.n_inputs - 1) * (channel.n_outputs - 1) / (2.0 * n_samples)
    return PluginMiEstimate(value=mi, stderr=math.sqrt(max(var_jack, 0.0)),
                            bias=bias, n_samples=n_samples)
