"""Monte Carlo rollouts of a strategy pair.

Randomness comes from a counter-based splitmix64 hash of
``(seed, rollout, round, player)``, so every rollout owns a fixed
substream. Results do not depend on chunking or on the number of workers.
"""
from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .finite import _check_owned, _finite_setup
from .model import FINITE, MATRIX, PLAYER_I, PLAYER_II, BehavioralStrategy, GameSpec

CHUNK = 4096
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer applied to ``z + golden``."""
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, rollouts: np.ndarray, step: int, player: int) -> np.ndarray:
    """Uniform [0, 1) draws for the given rollout indices, round and player (0 or 1)."""
    with np.errstate(over="ignore"):
        h = _mix(np.full(rollouts.shape, np.uint64(seed % 2**64), dtype=np.uint64))
        h = _mix(h ^ rollouts.astype(np.uint64))
        h = _mix(h ^ np.uint64(2 * step + player))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 2**53)


class _Chain:
    """Interned (sigma key, tau key, arena state) triples with cached moves."""

    def __init__(self, arena, sigma, tau, ny):
        self.arena, self.sigma, self.tau, self.ny = arena, sigma, tau, ny
        self.ids, self.comps = {}, []
        self.cum = {}
        self.next = {}
        self.lock = threading.Lock()

    def intern(self, comp) -> int:
        i = self.ids.get(comp)
        if i is None:
            i = self.ids[comp] = len(self.comps)
            self.comps.append(comp)
        return i

    def cumulative(self, i):
        if i in self.cum:
            return self.cum[i]
        with self.lock:
            ks, kt, _ = self.comps[i]
            self.cum[i] = tuple(np.cumsum([float(p) for p in d])
                                for d in (self.sigma.distribution(ks), self.tau.distribution(kt)))
        return self.cum[i]

    def advance(self, i, z) -> int:
        key = (i, z)
        if key in self.next:
            return self.next[key]
        with self.lock:
            ks, kt, s = self.comps[i]
            self.next[key] = self.intern((self.sigma.advance(ks, z), self.tau.advance(kt, z),
                                          self.arena.succ[s][z]))
        return self.next[key]


def _sample(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)


def _run_chunk(chain: _Chain, start: int, lo: int, hi: int, rounds: int, seed: int) -> np.ndarray:
    arena = chain.arena
    idx = np.arange(lo, hi, dtype=np.int64)
    state = np.full(hi - lo, start, dtype=np.int64)
    for t in range(rounds):
        live = np.array([not arena.stop[c[2]] for c in list(chain.comps)])
        active = live[state]
        if not active.any():
            break
        ux = uniforms(seed, idx, t, 0)
        uy = uniforms(seed, idx, t, 1)
        groups, inverse = np.unique(state, return_inverse=True)
        new = state.copy()
        for g, c in enumerate(groups):
            if not live[c]:
                continue
            members = np.nonzero(inverse == g)[0]
            cx, cy = chain.cumulative(int(c))
            z = _sample(cx, ux[members]) * chain.ny + _sample(cy, uy[members])
            for zz in np.unique(z):
                new[members[z == zz]] = chain.advance(int(c), int(zz))
        state = new
    final = np.unique(state)
    labels = np.zeros(len(chain.comps))
    for c in final:
        v = arena.label[chain.comps[c][2]]
        if v is None:
            raise ValueError(f"missing payoff label at horizon: state {arena.names[chain.comps[c][2]]!r}")
        labels[c] = float(v)
    return labels[state]


def simulate(spec: GameSpec, sigma: BehavioralStrategy, tau: BehavioralStrategy, rollouts: int,
             depth: int | None = None, seed: int = 0, workers: int = 1) -> tuple[float, float]:
    """Mean payoff over ``rollouts`` independent plays and its standard error.

    Finite kinds play out their horizon (``depth`` must cover it); infinite
    kinds are cut after ``depth`` rounds and paid the lower truncation, so the
    mean estimates a lower bound of the expected payoff. The standard error is
    ``nan`` for a single rollout.
    """
    if rollouts < 1:
        raise ValueError("rollouts must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    _check_owned(spec, sigma, PLAYER_I)
    _check_owned(spec, tau, PLAYER_II)
    if spec.kind in (FINITE, MATRIX):
        arena, s0, horizon = _finite_setup(spec, None, "lower")
        if depth is not None and depth < horizon:
            raise ValueError(f"depth {depth} does not cover the horizon {horizon}")
        rounds = horizon
    else:
        if depth is None or depth < 0:
            raise ValueError(f"{spec.kind} games need a simulation depth >= 0")
        arena, s0, rounds = _finite_setup(spec, depth, "lower")
    chain = _Chain(arena, sigma, tau, len(spec.alphabets.y_moves))
    start = chain.intern((sigma.initial(), tau.initial(), s0))
    bounds = [(lo, min(lo + CHUNK, rollouts)) for lo in range(0, rollouts, CHUNK)]
    if workers == 1 or len(bounds) == 1:
        parts = [_run_chunk(chain, start, lo, hi, rounds, seed) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _run_chunk(chain, start, b[0], b[1], rounds, seed), bounds))
    sums = [(float(p.sum()), float((p * p).sum())) for p in parts]
    total = math.fsum(s for s, _ in sums)
    total_sq = math.fsum(q for _, q in sums)
    mean = total / rollouts
    if rollouts == 1:
        return mean, float("nan")
    var = max(total_sq - rollouts * mean * mean, 0.0) / (rollouts - 1)
    return mean, math.sqrt(var / rollouts)
