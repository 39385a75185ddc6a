"""Synthetic ensemble/surrogate matrix pairs with controlled signal and sparsity.

The ensemble matrix is fuzzy and block-structured: within-group entries
follow N(0.7, 0.15^2) and between-group entries N(0.1, 0.15^2), both
truncated to [0, 1].  The surrogate is a binary block-diagonal matrix built
from a noisy copy of the true groups.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .matrix import Partition, ProximityMatrix, crisp_from_partition


def derive_seed(parent: int, *keys: int) -> int:
    """Child 64-bit seed for the stream identified by `keys` under `parent`."""
    ss = np.random.SeedSequence(int(parent), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class SimScenario:
    n: int
    K: int
    signal: float = 0.0
    sparsity: float = 0.0
    mu_within: float = 0.7
    mu_between: float = 0.1
    sigma: float = 0.15
    seed: int = 0
    null_mode: str = "fresh"

    def __post_init__(self):
        if not (int(self.n) >= int(self.K) >= 2):
            raise ValueError(f"need n >= K >= 2, got n={self.n}, K={self.K}")
        if not 0.0 <= self.signal <= 1.0:
            raise ValueError(f"signal must lie in [0, 1], got {self.signal}")
        if not 0.0 <= self.sparsity < 1.0:
            raise ValueError(f"sparsity must lie in [0, 1), got {self.sparsity}")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.null_mode not in ("fresh", "permute"):
            raise ValueError("null_mode must be 'fresh' or 'permute'")

    def with_seed(self, seed: int) -> "SimScenario":
        return replace(self, seed=int(seed))


def truncated_normal(rng: np.random.Generator, mean: float, sd: float, size: int) -> np.ndarray:
    """Draws from N(mean, sd^2) conditioned on [0, 1], by rejection."""
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        draw = rng.normal(mean, sd, size=need + need // 2 + 8)
        ok = draw[(draw >= 0.0) & (draw <= 1.0)][:need]
        out[filled : filled + ok.size] = ok
        filled += ok.size
    return out


def balanced_groups(n: int, K: int, rng: np.random.Generator) -> np.ndarray:
    """Labels 1..K with sizes differing by at most one, in shuffled order."""
    labels = np.arange(n) % K + 1
    return rng.permutation(labels)


def gen_ensemble_matrix(sc: SimScenario, groups, rng: np.random.Generator | None = None) -> ProximityMatrix:
    """Fuzzy block-structured ensemble matrix over `groups`.

    A fraction ``sc.sparsity`` of the between-group pairs, chosen uniformly
    without replacement, is set to exactly 0.
    """
    rng = rng if rng is not None else make_rng(sc.seed)
    g = np.asarray(groups)
    n = g.size
    iu, ju = np.triu_indices(n, 1)
    same = g[iu] == g[ju]
    vals = np.empty(iu.size)
    vals[same] = truncated_normal(rng, sc.mu_within, sc.sigma, int(same.sum()))
    between = np.flatnonzero(~same)
    vals[between] = truncated_normal(rng, sc.mu_between, sc.sigma, between.size)
    n_zero = _round_half_up(sc.sparsity * between.size)
    if n_zero:
        vals[rng.choice(between, size=n_zero, replace=False)] = 0.0
    out = np.eye(n)
    out[iu, ju] = vals
    out[ju, iu] = vals
    return ProximityMatrix(out)


def gen_crisp_matrix(groups) -> ProximityMatrix:
    """Binary block-diagonal matrix: 1 within groups, 0 between.

    Group identifiers need not be contiguous; only equality matters.
    """
    return crisp_from_partition(Partition.from_labels(groups))


def apply_signal(true_groups, s: float, K: int, rng: np.random.Generator, null_mode: str = "fresh") -> np.ndarray:
    """Noisy copy of `true_groups` keeping a fraction `s` of the assignments.

    round((1 - s) n) observations, chosen uniformly, get a fresh label drawn
    uniformly from 1..K (which may equal the old one).  At s = 0 every label
    is fresh; with ``null_mode="permute"`` the true labels are shuffled
    across observations instead.
    """
    g = np.array(true_groups, copy=True)
    n = g.size
    if s >= 1.0:
        return g
    if s <= 0.0:
        if null_mode == "permute":
            return rng.permutation(g)
        return rng.integers(1, K + 1, size=n)
    k = _round_half_up((1.0 - s) * n)
    idx = rng.choice(n, size=k, replace=False)
    g[idx] = rng.integers(1, K + 1, size=k)
    return g


@dataclass(frozen=True)
class SimPair:
    o: ProximityMatrix
    ohat: ProximityMatrix
    true_groups: np.ndarray
    surrogate_groups: np.ndarray


def generate(sc: SimScenario) -> SimPair:
    """Draw one matrix pair along with the labels that produced it."""
    rng = make_rng(sc.seed)
    truth = balanced_groups(sc.n, sc.K, rng)
    o = gen_ensemble_matrix(sc, truth, rng)
    noisy = apply_signal(truth, sc.signal, sc.K, rng, sc.null_mode)
    return SimPair(o=o, ohat=gen_crisp_matrix(noisy), true_groups=truth, surrogate_groups=noisy)


def gen_pair(sc: SimScenario) -> tuple[ProximityMatrix, ProximityMatrix]:
    pair = generate(sc)
    return pair.o, pair.ohat
