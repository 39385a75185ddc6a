"""Compiled inner loops for the permutation engine.

Each kernel returns, per permutation, the raw pair sums from which the
pair-based measures are finished in Python:

    0: sum of (a - b)^2 / max(a, b)          (LoI)
    1: sum of (sqrt a - sqrt b)^2            (Hellinger)
    2: sum of w (a - b)^2, w = max(a, b, eps)  (wRMSE numerator)
    3: sum of w                              (wRMSE denominator)
    4: sum of a b                            (RV)
    5: sum of (a - mean a) b                 (Mantel)
"""
from numba import njit

N_SUMS = 6
TINY = 5e-324  # smallest positive double; max(m, TINY) == m for any m > 0


@njit(nogil=True, cache=True, inline="always")
def _pair(a, sa, ca, b, sb, eps):
    d = a - b
    m = a if a > b else b
    # a == b == 0 gives 0 / TINY == 0, which is the 0/0 = 0 convention without a branch
    t = d * d / (m if m > TINY else TINY)
    e = sa - sb
    w = m if m > eps else eps
    return t, e * e, w * d * d, w, a * b, ca * b


@njit(nogil=True, cache=True)
def rowcol_sums(o, o_sqrt, o_cent, oh, oh_sqrt, perms, eps, out):
    """Pair sums of (o, oh[p][:, p]) for each row p of `perms`."""
    n = o.shape[0]
    for r in range(perms.shape[0]):
        p = perms[r]
        s0 = s1 = s2 = s3 = s4 = s5 = 0.0
        for i in range(n):
            pi = p[i]
            for j in range(i + 1, n):
                pj = p[j]
                t0, t1, t2, t3, t4, t5 = _pair(
                    o[i, j], o_sqrt[i, j], o_cent[i, j], oh[pi, pj], oh_sqrt[pi, pj], eps
                )
                s0 += t0
                s1 += t1
                s2 += t2
                s3 += t3
                s4 += t4
                s5 += t5
        out[r, 0] = s0
        out[r, 1] = s1
        out[r, 2] = s2
        out[r, 3] = s3
        out[r, 4] = s4
        out[r, 5] = s5


@njit(nogil=True, cache=True)
def shuffle_sums(a, sa, ca, b, sb, perms, eps, out):
    """Pair sums of (a, b[q]) for each row q of `perms` (value shuffle)."""
    m = a.shape[0]
    for r in range(perms.shape[0]):
        q = perms[r]
        s0 = s1 = s2 = s3 = s4 = s5 = 0.0
        for k in range(m):
            t0, t1, t2, t3, t4, t5 = _pair(a[k], sa[k], ca[k], b[q[k]], sb[q[k]], eps)
            s0 += t0
            s1 += t1
            s2 += t2
            s3 += t3
            s4 += t4
            s5 += t5
        out[r, 0] = s0
        out[r, 1] = s1
        out[r, 2] = s2
        out[r, 3] = s3
        out[r, 4] = s4
        out[r, 5] = s5
