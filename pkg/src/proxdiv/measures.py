"""Divergence and similarity measures between two proximity matrices.

Pair-based measures (nLoI, Hellinger, wRMSE, RV, Mantel) only look at the
strict upper triangle; SSIM treats both matrices as images, diagonal
included.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateMatrixError,
    DimensionMismatchError,
    InconsistentPartitionError,
    WindowTooLargeError,
)
from .matrix import Partition, ProximityMatrix, within_mask

DEFAULT_EPSILON = 1e-8
DEFAULT_SSIM_WINDOW = 8
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


class Orientation(str, enum.Enum):
    DIVERGENCE = "divergence"
    SIMILARITY = "similarity"

    @property
    def short(self) -> str:
        return "div" if self is Orientation.DIVERGENCE else "sim"


class MeasureKind(str, enum.Enum):
    NLOI = "nloi"
    HELLINGER = "hellinger"
    WRMSE = "wrmse"
    RV = "rv"
    SSIM = "ssim"
    MANTEL = "mantel"

    @property
    def orientation(self) -> Orientation:
        if self in (MeasureKind.NLOI, MeasureKind.HELLINGER, MeasureKind.WRMSE):
            return Orientation.DIVERGENCE
        return Orientation.SIMILARITY

    @property
    def value_range(self) -> tuple[float, float]:
        if self in (MeasureKind.SSIM, MeasureKind.MANTEL):
            return (-1.0, 1.0)
        return (0.0, 1.0)

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, name: str) -> "MeasureKind":
        key = name.strip().lower()
        for kind in cls:
            if key in (kind.value, kind.label.lower()):
                return kind
        raise ValueError(f"unknown measure {name!r}; choose from {', '.join(k.value for k in cls)}")


_LABELS = {
    MeasureKind.NLOI: "nLoI",
    MeasureKind.HELLINGER: "Hellinger",
    MeasureKind.WRMSE: "wRMSE",
    MeasureKind.RV: "RV",
    MeasureKind.SSIM: "SSIM",
    MeasureKind.MANTEL: "Mantel",
}

ALL_MEASURES = tuple(MeasureKind)
SIMULATION_MEASURES = (
    MeasureKind.NLOI,
    MeasureKind.HELLINGER,
    MeasureKind.WRMSE,
    MeasureKind.RV,
    MeasureKind.MANTEL,
)


def _matrices(o, ohat) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(o, dtype=np.float64)
    b = np.asarray(ohat, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(a.shape[0], b.shape[0])
    return a, b


def _pairs(o, ohat) -> tuple[np.ndarray, np.ndarray]:
    a, b = _matrices(o, ohat)
    iu, ju = np.triu_indices(a.shape[0], 1)
    return a[iu, ju], b[iu, ju]


def loi_terms(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-pair contributions (a - b)^2 / max(a, b), with 0/0 taken as 0."""
    m = np.maximum(a, b)
    out = np.zeros_like(m)
    pos = m > 0
    d = a[pos] - b[pos]
    out[pos] = d * d / m[pos]
    return out


def loi(o: ProximityMatrix, ohat: ProximityMatrix) -> float:
    """Loss of Interpretability: sum over pairs of (o - ohat)^2 / max(o, ohat)."""
    a, b = _pairs(o, ohat)
    return float(loi_terms(a, b).sum())


def nloi(o: ProximityMatrix, ohat: ProximityMatrix) -> float:
    """LoI averaged over the n(n-1)/2 pairs; lies in [0, 1]."""
    a, b = _pairs(o, ohat)
    return float(loi_terms(a, b).sum()) / a.size


@dataclass(frozen=True)
class LoIDecomposition:
    """Within-node / between-node split of the LoI.

    ``mean_in`` and ``mean_out`` are None when the corresponding pair set is
    empty, so an empty class never reads as a perfect score.
    """

    loi_total: float
    loi_in: float
    loi_out: float
    n_in: int
    n_out: int
    mean_in: float | None
    mean_out: float | None

    @property
    def n_pairs(self) -> int:
        return self.n_in + self.n_out

    def as_dict(self) -> dict:
        return {
            "loi_total": self.loi_total,
            "loi_in": self.loi_in,
            "loi_out": self.loi_out,
            "n_in": self.n_in,
            "n_out": self.n_out,
            "mean_in": self.mean_in,
            "mean_out": self.mean_out,
        }


def loi_decompose(o: ProximityMatrix, ohat: ProximityMatrix, p: Partition) -> LoIDecomposition:
    """Split the LoI into within-node and between-node parts.

    Raises InconsistentPartitionError if `ohat` is nonzero on a pair that
    `p` places in different nodes.
    """
    a, b = _pairs(o, ohat)
    if p.n != int(np.asarray(o).shape[0]):
        raise DimensionMismatchError(p.n, np.asarray(o).shape[0])
    inside = within_mask(p)
    leak = np.flatnonzero(~inside & (b != 0.0))
    if leak.size:
        iu, ju = np.triu_indices(p.n, 1)
        k = leak[0]
        raise InconsistentPartitionError(iu[k], ju[k], b[k])
    loi_in = float(loi_terms(a[inside], b[inside]).sum())
    loi_out = float(a[~inside].sum())
    n_in = int(inside.sum())
    n_out = int(inside.size - n_in)
    return LoIDecomposition(
        loi_total=float(loi_terms(a, b).sum()),
        loi_in=loi_in,
        loi_out=loi_out,
        n_in=n_in,
        n_out=n_out,
        mean_in=loi_in / n_in if n_in else None,
        mean_out=loi_out / n_out if n_out else None,
    )


def hellinger(o: ProximityMatrix, ohat: ProximityMatrix) -> float:
    a, b = _pairs(o, ohat)
    d = np.sqrt(a) - np.sqrt(b)
    return math.sqrt(float(np.dot(d, d)) / a.size)


def freeman_tukey(o: ProximityMatrix, ohat: ProximityMatrix) -> float:
    """Freeman-Tukey statistic, 4 M H^2 with M the pair count."""
    n = np.asarray(o).shape[0]
    m = n * (n - 1) // 2
    return 4.0 * m * hellinger(o, ohat) ** 2


def wrmse(o: ProximityMatrix, ohat: ProximityMatrix, epsilon: float = DEFAULT_EPSILON) -> float:
    """Root mean squared error weighted by max(o, ohat, epsilon)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    a, b = _pairs(o, ohat)
    w = np.maximum(np.maximum(a, b), epsilon)
    d = a - b
    return math.sqrt(float(np.dot(w, d * d)) / float(w.sum()))


def rv_coefficient(o: ProximityMatrix, ohat: ProximityMatrix) -> float:
    """RV coefficient of the zero-diagonal matrices.

    For symmetric inputs tr(A B) over the zero-diagonal copies is twice the
    sum over i < j of a_ij b_ij, and the factor cancels.
    """
    a, b = _pairs(o, ohat)
    saa, sbb = float(np.dot(a, a)), float(np.dot(b, b))
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateMatrixError("RV is undefined: a matrix has no nonzero off-diagonal entry")
    return float(np.dot(a, b)) / math.sqrt(saa * sbb)


def mantel(o: ProximityMatrix, ohat: ProximityMatrix) -> float:
    """Pearson correlation between the two upper-triangle vectors."""
    a, b = _pairs(o, ohat)
    # test constancy exactly; the centred values of a constant vector can be
    # rounding noise rather than zero
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        raise DegenerateMatrixError("Mantel correlation is undefined: constant off-diagonal")
    ca = a - a.mean()
    cb = b - b.mean()
    den = math.sqrt(float(np.dot(ca, ca)) * float(np.dot(cb, cb)))
    if den == 0.0:
        raise DegenerateMatrixError("Mantel correlation is undefined: constant off-diagonal")
    return min(1.0, max(-1.0, float(np.dot(ca, cb)) / den))


def _box_sums(x: np.ndarray, k: int) -> np.ndarray:
    """Sums over every k x k window fully inside `x`, via running sums."""
    c = np.cumsum(x, axis=0)
    rows = np.concatenate([c[k - 1 : k], c[k:] - c[:-k]], axis=0)
    c = np.cumsum(rows, axis=1)
    return np.concatenate([c[:, k - 1 : k], c[:, k:] - c[:, :-k]], axis=1)


def resolve_window(n: int, window: int | None) -> int:
    if window is None:
        return min(n, DEFAULT_SSIM_WINDOW)
    window = int(window)
    if window < 1:
        raise ValueError("window must be a positive integer")
    if window > n:
        raise WindowTooLargeError(f"window {window} exceeds matrix size {n}")
    return window


def ssim(
    o: ProximityMatrix,
    ohat: ProximityMatrix,
    window: int | None = None,
    c1: float = SSIM_C1,
    c2: float = SSIM_C2,
) -> float:
    """Mean structural similarity over all square windows fully inside the matrix.

    Window statistics are unweighted with population variances.  `window`
    defaults to min(n, 8).  Runs in O(n^2) regardless of window size.
    """
    a, b = _matrices(o, ohat)
    k = resolve_window(a.shape[0], window)
    # Shifting by 0.5 leaves variances unchanged and limits cancellation.
    x, y = a - 0.5, b - 0.5
    npix = float(k * k)
    mx = _box_sums(x, k) / npix
    my = _box_sums(y, k) / npix
    vx = _box_sums(x * x, k) / npix - mx * mx
    vy = _box_sums(y * y, k) / npix - my * my
    cxy = _box_sums(x * y, k) / npix - mx * my
    mx += 0.5
    my += 0.5
    num = (2.0 * mx * my + c1) * (2.0 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def evaluate(
    kind: MeasureKind,
    o: ProximityMatrix,
    ohat: ProximityMatrix,
    epsilon: float = DEFAULT_EPSILON,
    window: int | None = None,
) -> float:
    kind = MeasureKind(kind)
    if kind is MeasureKind.NLOI:
        return nloi(o, ohat)
    if kind is MeasureKind.HELLINGER:
        return hellinger(o, ohat)
    if kind is MeasureKind.WRMSE:
        return wrmse(o, ohat, epsilon)
    if kind is MeasureKind.RV:
        return rv_coefficient(o, ohat)
    if kind is MeasureKind.SSIM:
        return ssim(o, ohat, window)
    return mantel(o, ohat)
