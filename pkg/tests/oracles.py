"""Slow, loop-based reference implementations used only by the tests.

Written directly from the definitions with plain Python floats so they share
no code path with the vectorised library.
"""
import math

import numpy as np


def pairs(m):
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    return [float(m[i, j]) for i in range(n) for j in range(i + 1, n)]


def loi(o, oh):
    total = 0.0
    for a, b in zip(pairs(o), pairs(oh)):
        m = max(a, b)
        if m > 0:
            total += (a - b) ** 2 / m
    return total


def nloi(o, oh):
    return loi(o, oh) / len(pairs(o))


def hellinger(o, oh):
    a, b = pairs(o), pairs(oh)
    return math.sqrt(sum((math.sqrt(x) - math.sqrt(y)) ** 2 for x, y in zip(a, b)) / len(a))


def wrmse(o, oh, eps=1e-8):
    num = den = 0.0
    for a, b in zip(pairs(o), pairs(oh)):
        w = max(a, b, eps)
        num += w * (a - b) ** 2
        den += w
    return math.sqrt(num / den)


def rv(o, oh):
    # trace form on zero-diagonal copies
    a = np.array(o, dtype=float)
    b = np.array(oh, dtype=float)
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(b, 0.0)
    return float(np.trace(a @ b) / math.sqrt(np.trace(a @ a) * np.trace(b @ b)))


def mantel(o, oh):
    a, b = pairs(o), pairs(oh)
    ma, mb = sum(a) / len(a), sum(b) / len(b)
    sab = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    saa = sum((x - ma) ** 2 for x in a)
    sbb = sum((y - mb) ** 2 for y in b)
    return sab / math.sqrt(saa * sbb)


def ssim(o, oh, k=None, c1=1e-4, c2=9e-4):
    x = np.asarray(o, dtype=float)
    y = np.asarray(oh, dtype=float)
    n = x.shape[0]
    k = min(n, 8) if k is None else k
    vals = []
    for r in range(n - k + 1):
        for c in range(n - k + 1):
            wx = [float(v) for v in x[r : r + k, c : c + k].ravel()]
            wy = [float(v) for v in y[r : r + k, c : c + k].ravel()]
            N = len(wx)
            mx, my = sum(wx) / N, sum(wy) / N
            vx = sum((v - mx) ** 2 for v in wx) / N
            vy = sum((v - my) ** 2 for v in wy) / N
            cxy = sum((u - mx) * (v - my) for u, v in zip(wx, wy)) / N
            vals.append(((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx**2 + my**2 + c1) * (vx + vy + c2)))
    return sum(vals) / len(vals)


def crisp(labels):
    g = np.asarray(labels)
    return (g[:, None] == g[None, :]).astype(float)


def random_fuzzy(rng, n, zero_frac=0.0):
    """Random valid proximity matrix; `zero_frac` of the pairs set to 0."""
    iu, ju = np.triu_indices(n, 1)
    v = rng.uniform(size=iu.size)
    if zero_frac:
        v[rng.uniform(size=iu.size) < zero_frac] = 0.0
    m = np.eye(n)
    m[iu, ju] = v
    m[ju, iu] = v
    return m
