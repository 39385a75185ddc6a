"""Unified row/column permutation test for several measures at once.

One set of R permutations is drawn; every requested measure is evaluated
on the same permuted surrogate for each replicate.  Permutations are drawn
in fixed-size chunks, each from its own seed-derived stream, so the null
samples do not depend on how many worker threads evaluate them.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateMatrixError, DimensionMismatchError
from .measures import (
    ALL_MEASURES,
    DEFAULT_EPSILON,
    MeasureKind,
    Orientation,
    resolve_window,
    ssim,
)
from .matrix import ProximityMatrix

CHUNK = 128
SCHEMES = ("rowcol", "value_shuffle")


@dataclass(frozen=True)
class PermTestConfig:
    """Settings for :func:`run_permutation_test`.

    ``scheme="value_shuffle"`` shuffles the surrogate's off-diagonal values
    instead of relabelling observations; it destroys the block structure and
    is kept only for scheme-comparison experiments, not for inference.
    """

    R: int = 999
    alpha: float = 0.05
    seed: int = 0
    measures: tuple = ALL_MEASURES
    keep_null: bool = False
    epsilon: float = DEFAULT_EPSILON
    ssim_window: int | None = None
    scheme: str = "rowcol"
    workers: int = 1

    def __post_init__(self):
        if int(self.R) < 1:
            raise ValueError("R must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        kinds = tuple(dict.fromkeys(MeasureKind(m) for m in self.measures))
        if not kinds:
            raise ValueError("at least one measure is required")
        object.__setattr__(self, "measures", kinds)
        object.__setattr__(self, "R", int(self.R))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class MeasureTest:
    measure: MeasureKind
    observed: float
    null_mean: float
    null_sd: float
    z: float | None
    p: float
    ci_lower: float
    ci_upper: float
    n_extreme: int
    null_samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def orientation(self) -> Orientation:
        return self.measure.orientation

    def as_dict(self) -> dict:
        return {
            "method": self.measure.label,
            "type": self.orientation.short,
            "observed": self.observed,
            "null_mean": self.null_mean,
            "null_sd": self.null_sd,
            "z": self.z,
            "p": self.p,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
        }


@dataclass(frozen=True)
class TestReport:
    n: int
    config: PermTestConfig
    results: dict

    __test__ = False  # not a pytest class

    def __getitem__(self, key) -> MeasureTest:
        return self.results[MeasureKind.parse(key) if isinstance(key, str) else key]

    def __iter__(self):
        return iter(self.results.values())


def phipson_smyth_p(count_extreme: int, R: int) -> float:
    """Monte Carlo p-value (1 + count) / (1 + R)."""
    if not 0 <= count_extreme <= R:
        raise ValueError("count_extreme must lie in 0..R")
    return (1.0 + count_extreme) / (1.0 + R)


def count_extreme(observed: float, null_samples, orientation: Orientation) -> int:
    """Replicates at least as extreme as `observed` in the favourable direction."""
    null = np.asarray(null_samples)
    if Orientation(orientation) is Orientation.DIVERGENCE:
        return int(np.count_nonzero(null <= observed))
    return int(np.count_nonzero(null >= observed))


def permutation_ci(
    observed: float,
    null_samples,
    alpha: float,
    orientation: Orientation,
    range_lo: float,
    range_hi: float,
) -> tuple[float, float]:
    """Interval [obs + mean - Q(1 - a/2), obs + mean - Q(a/2)] clamped to the range.

    Quantiles interpolate linearly between order statistics.  `orientation`
    is accepted for symmetry with the p-value; clamping to the measure's own
    range already truncates divergences at 0.
    """
    null = np.asarray(null_samples, dtype=np.float64)
    if null.size == 0:
        raise ValueError("null_samples must be non-empty")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    Orientation(orientation)
    q_lo, q_hi = np.quantile(null, [alpha / 2.0, 1.0 - alpha / 2.0])
    mu = float(null.mean())
    lower = observed + (mu - q_hi)
    upper = observed + (mu - q_lo)
    lower = min(range_hi, max(range_lo, lower))
    upper = min(range_hi, max(range_lo, upper))
    return float(lower), float(upper)


def draw_permutations(seed: int, R: int, size: int) -> np.ndarray:
    """The R permutations of 0..size-1 used by the engine for `seed`."""
    return np.concatenate([_chunk_perms(seed, c, R, size) for c in range(_n_chunks(R))])


def _n_chunks(R: int) -> int:
    return -(-R // CHUNK)


def _chunk_perms(seed: int, chunk: int, R: int, size: int) -> np.ndarray:
    rows = min(CHUNK, R - chunk * CHUNK)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))
    perms = np.tile(np.arange(size, dtype=np.intp), (rows, 1))
    rng.permuted(perms, axis=1, out=perms)
    return perms


class _Engine:
    """Precomputed views of (o, ohat) shared by every permutation chunk."""

    def __init__(self, o: np.ndarray, oh: np.ndarray, cfg: PermTestConfig):
        self.cfg = cfg
        self.n = o.shape[0]
        self.m = self.n * (self.n - 1) // 2
        self.o, self.oh = o, oh
        iu, ju = np.triu_indices(self.n, 1)
        a, b = o[iu, ju], oh[iu, ju]
        self.sum_aa = float(np.dot(a, a))
        self.sum_bb = float(np.dot(b, b))
        self.mean_b = float(b.mean())
        ca = a - a.mean()
        cb = b - self.mean_b
        self.sum_ca = float(ca.sum())
        self.sum_caca = float(np.dot(ca, ca))
        self.sum_cbcb = float(np.dot(cb, cb))
        self.pair_kinds = [k for k in cfg.measures if k is not MeasureKind.SSIM]
        self.want_ssim = MeasureKind.SSIM in cfg.measures
        if MeasureKind.RV in self.pair_kinds and (self.sum_aa == 0.0 or self.sum_bb == 0.0):
            raise DegenerateMatrixError("RV is undefined: a matrix has no nonzero off-diagonal entry")
        constant = np.ptp(a) == 0.0 or np.ptp(b) == 0.0
        if MeasureKind.MANTEL in self.pair_kinds and (constant or self.sum_caca * self.sum_cbcb == 0.0):
            raise DegenerateMatrixError("Mantel correlation is undefined: constant off-diagonal")
        if self.want_ssim:
            self.window = resolve_window(self.n, cfg.ssim_window)
        if cfg.scheme == "rowcol":
            cent = np.zeros_like(o)
            cent[iu, ju] = ca
            self.o_args = (o, np.sqrt(o), cent)
            self.oh_args = (oh, np.sqrt(oh))
        else:
            self.iu, self.ju = iu, ju
            self.a_args = (a, np.sqrt(a), ca)
            self.b_args = (b, np.sqrt(b))
            self.b = b

    @property
    def perm_size(self) -> int:
        return self.n if self.cfg.scheme == "rowcol" else self.m

    def evaluate(self, perms: np.ndarray) -> np.ndarray:
        """Statistics for each permutation, one column per configured measure."""
        out = np.empty((perms.shape[0], len(self.cfg.measures)))
        if self.pair_kinds:
            sums = np.empty((perms.shape[0], _kernels.N_SUMS))
            if self.cfg.scheme == "rowcol":
                _kernels.rowcol_sums(*self.o_args, *self.oh_args, perms, self.cfg.epsilon, sums)
            else:
                _kernels.shuffle_sums(*self.a_args, *self.b_args, perms, self.cfg.epsilon, sums)
            for col, kind in enumerate(self.cfg.measures):
                if kind is not MeasureKind.SSIM:
                    out[:, col] = self._finish(kind, sums)
        if self.want_ssim:
            col = self.cfg.measures.index(MeasureKind.SSIM)
            for r, p in enumerate(perms):
                out[r, col] = ssim(self.o, self._permuted_full(p), self.window)
        return out

    def _permuted_full(self, p: np.ndarray) -> np.ndarray:
        if self.cfg.scheme == "rowcol":
            return self.oh[np.ix_(p, p)]
        full = np.eye(self.n)
        vals = self.b[p]
        full[self.iu, self.ju] = vals
        full[self.ju, self.iu] = vals
        return full

    def _finish(self, kind: MeasureKind, s: np.ndarray) -> np.ndarray:
        if kind is MeasureKind.NLOI:
            return s[:, 0] / self.m
        if kind is MeasureKind.HELLINGER:
            return np.sqrt(s[:, 1] / self.m)
        if kind is MeasureKind.WRMSE:
            return np.sqrt(s[:, 2] / s[:, 3])
        if kind is MeasureKind.RV:
            return s[:, 4] / math.sqrt(self.sum_aa * self.sum_bb)
        num = s[:, 5] - self.mean_b * self.sum_ca
        return np.clip(num / math.sqrt(self.sum_caca * self.sum_cbcb), -1.0, 1.0)


def run_permutation_test(
    o: ProximityMatrix, ohat: ProximityMatrix, cfg: PermTestConfig | None = None
) -> TestReport:
    """Permutation test of `ohat` against `o` for every measure in `cfg`.

    Divergences count null values <= observed, similarities >= observed;
    p-values use the (1 + count) / (1 + R) correction.  Observed values go
    through the same code path as the null replicates so that exact ties
    (e.g. permutations that leave `ohat` unchanged) are counted.
    """
    cfg = cfg or PermTestConfig()
    a = np.ascontiguousarray(np.asarray(o, dtype=np.float64))
    b = np.ascontiguousarray(np.asarray(ohat, dtype=np.float64))
    if a.shape != b.shape:
        raise DimensionMismatchError(a.shape[0], b.shape[0])
    eng = _Engine(a, b, cfg)

    identity = np.arange(eng.perm_size, dtype=np.intp)[None, :]
    observed = eng.evaluate(identity)[0]

    null = np.empty((cfg.R, len(cfg.measures)))

    def work(chunk: int) -> None:
        perms = _chunk_perms(cfg.seed, chunk, cfg.R, eng.perm_size)
        start = chunk * CHUNK
        null[start : start + perms.shape[0]] = eng.evaluate(perms)

    chunks = range(_n_chunks(cfg.R))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            list(pool.map(work, chunks))
    else:
        for c in chunks:
            work(c)

    results = {}
    for col, kind in enumerate(cfg.measures):
        results[kind] = _summarize(kind, float(observed[col]), null[:, col].copy(), cfg)
    return TestReport(n=eng.n, config=cfg, results=results)


def _summarize(kind: MeasureKind, obs: float, samples: np.ndarray, cfg: PermTestConfig) -> MeasureTest:
    mu = float(samples.mean())
    sd = float(samples.std(ddof=1)) if samples.size > 1 else 0.0
    z = (obs - mu) / sd if sd > 0.0 else None
    k = count_extreme(obs, samples, kind.orientation)
    lo, hi = permutation_ci(obs, samples, cfg.alpha, kind.orientation, *kind.value_range)
    return MeasureTest(
        measure=kind,
        observed=obs,
        null_mean=mu,
        null_sd=sd,
        z=z,
        p=phipson_smyth_p(k, cfg.R),
        ci_lower=lo,
        ci_upper=hi,
        n_extreme=k,
        null_samples=samples if cfg.keep_null else None,
    )
