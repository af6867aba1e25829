"""Farey sweep kernels.

The stream state is an int64 array ``[a, q, a1, q1, idx]``: the current
fraction a/q of F(Q), its successor a1/q1, and the position of a/q in F(Q).
Kernels advance the state in place.  Block rows are
``(a, q, a1, q1, idx)`` for the retained fractions.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .._backend import njit

BLOCK_COLS = 5


@njit
def coset_code(x11, x12, x21, x22, m):
    return ((x11 * m + x12) * m + x21) * m + x22


@njit
def in_codes(code, codes):
    i = np.searchsorted(codes, code)
    return i < codes.shape[0] and codes[i] == code


@njit
def _w_member(a, q, a1, q1, m, codes):
    # W = [[q1, a1], [-q, -a]] mod m
    code = coset_code(q1 % m, a1 % m, (-q) % m, (-a) % m, m)
    return in_codes(code, codes)


@njit
def sweep_block_nb(state, Q, hi_num, hi_den, m, codes, out):
    a, q, a1, q1, idx = state[0], state[1], state[2], state[3], state[4]
    cap = out.shape[0]
    n = 0
    finished = False
    while n < cap:
        if a * hi_den > hi_num * q:
            finished = True
            break
        if _w_member(a, q, a1, q1, m, codes):
            out[n, 0] = a
            out[n, 1] = q
            out[n, 2] = a1
            out[n, 3] = q1
            out[n, 4] = idx
            n += 1
        K = (Q + q) // q1
        a, q, a1, q1 = a1, q1, K * a1 - a, K * q1 - q
        idx += 1
    if not finished and a * hi_den > hi_num * q:
        finished = True
    state[0], state[1], state[2], state[3], state[4] = a, q, a1, q1, idx
    return n, finished


@njit
def count_sweep_nb(state, Q, hi_num, hi_den, m, codes, counts, acc):
    """Count retained fractions up to hi, binning and tracking the max gap.

    ``acc`` = [count, prev_a, prev_q, first_a, first_q, gap_num, gap_den]
    where prev/first are -1 until set and gap_num/gap_den is the largest
    gap between consecutive retained fractions seen so far.
    """
    a, q, a1, q1, idx = state[0], state[1], state[2], state[3], state[4]
    bins = counts.shape[0]
    while a * hi_den <= hi_num * q:
        if _w_member(a, q, a1, q1, m, codes):
            acc[0] += 1
            if acc[1] < 0:
                acc[3] = a
                acc[4] = q
            else:
                pa, pq = acc[1], acc[2]
                gn = a * pq - pa * q
                gd = pq * q
                if gn * acc[6] > acc[5] * gd:
                    acc[5] = gn
                    acc[6] = gd
            acc[1] = a
            acc[2] = q
            if bins > 0:
                k = (bins * a) // q
                if k >= bins:
                    k = bins - 1
                counts[k] += 1
        K = (Q + q) // q1
        a, q, a1, q1 = a1, q1, K * a1 - a, K * q1 - q
        idx += 1
    state[0], state[1], state[2], state[3], state[4] = a, q, a1, q1, idx


# ---------------------------------------------------------------- numpy path


def farey_between(Q: int, lo_num: int, lo_den: int, hi_num: int, hi_den: int):
    """All reduced a/q with q <= Q and lo <= a/q <= hi, sorted ascending."""
    qs = np.arange(1, Q + 1, dtype=np.int64)
    amin = -((-qs * lo_num) // lo_den)
    amax = (qs * hi_num) // hi_den
    cnt = np.maximum(amax - amin + 1, 0)
    total = int(cnt.sum())
    if total == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    start = np.cumsum(cnt) - cnt
    qv = np.repeat(qs, cnt)
    av = np.repeat(amin - start, cnt) + np.arange(total, dtype=np.int64)
    keep = np.gcd(av, qv) == 1
    av, qv = av[keep], qv[keep]
    # distinct fractions with q <= Q differ by >= 1/Q^2, far above rounding
    order = np.argsort(av / qv, kind="stable")
    return av[order], qv[order]


def members_np(a, q, a1, q1, m, codes):
    code = (((q1 % m) * m + a1 % m) * m + (-q) % m) * m + (-a) % m
    pos = np.searchsorted(codes, code)
    pos = np.minimum(pos, codes.size - 1)
    return codes[pos] == code


def _block_np(state, Q, hi_num, hi_den, cap):
    """Next run of consecutive F(Q) elements (unfiltered) as block rows."""
    a, q, a1, q1, idx = (int(v) for v in state)
    hi = Fraction(hi_num, hi_den)
    if Fraction(a, q) > hi:
        return np.empty((0, BLOCK_COLS), np.int64), True
    scale = 1 << 30
    end = Fraction(int((a / q + cap / (0.3 * Q * Q)) * scale) + 1, scale)
    end = min(max(end, Fraction(a1, q1)), hi)
    fa, fq = farey_between(Q, a, q, end.numerator, end.denominator)
    L = fa.size
    if L <= 1:
        rows = np.array([[a, q, a1, q1, idx]], dtype=np.int64)
        K = (Q + q) // q1
        new = (a1, q1, K * a1 - a, K * q1 - q, idx + 1)
    else:
        rows = np.empty((L - 1, BLOCK_COLS), np.int64)
        rows[:, 0] = fa[:-1]
        rows[:, 1] = fq[:-1]
        rows[:, 2] = fa[1:]
        rows[:, 3] = fq[1:]
        rows[:, 4] = idx + np.arange(L - 1, dtype=np.int64)
        pa, pq, la, lq = int(fa[-2]), int(fq[-2]), int(fa[-1]), int(fq[-1])
        K = (Q + pq) // lq
        new = (la, lq, K * la - pa, K * lq - pq, idx + L - 1)
    state[:] = new
    finished = Fraction(new[0], new[1]) > hi
    return rows, finished


def sweep_block_np(state, Q, hi_num, hi_den, m, codes, cap):
    rows, finished = _block_np(state, Q, hi_num, hi_den, cap)
    if rows.shape[0]:
        keep = members_np(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], m, codes)
        rows = rows[keep]
    return rows, finished


def count_sweep_np(state, Q, hi_num, hi_den, m, codes, counts, acc, cap=1 << 20):
    bins = counts.shape[0]
    finished = False
    while not finished:
        rows, finished = sweep_block_np(state, Q, hi_num, hi_den, m, codes, cap)
        if rows.shape[0] == 0:
            continue
        a, q = rows[:, 0], rows[:, 1]
        if acc[1] >= 0:
            a = np.concatenate(([acc[1]], a))
            q = np.concatenate(([acc[2]], q))
        else:
            acc[3], acc[4] = rows[0, 0], rows[0, 1]
        acc[0] += rows.shape[0]
        if a.size > 1:
            gn = a[1:] * q[:-1] - a[:-1] * q[1:]
            gd = q[:-1] * q[1:]
            j = exact_argmax(gn, gd)
            if int(gn[j]) * int(acc[6]) > int(acc[5]) * int(gd[j]):
                acc[5], acc[6] = gn[j], gd[j]
        acc[1], acc[2] = rows[-1, 0], rows[-1, 1]
        if bins > 0:
            k = np.minimum((bins * rows[:, 0]) // rows[:, 1], bins - 1)
            counts += np.bincount(k, minlength=bins).astype(counts.dtype)


def exact_argmax(num, den) -> int:
    """Index of the largest num/den, exact among float near-ties."""
    vals = num / den
    top = vals.max()
    cand = np.flatnonzero(vals >= top * (1 - 1e-12))
    best = int(cand[0])
    for j in cand[1:]:
        if int(num[j]) * int(den[best]) > int(num[best]) * int(den[j]):
            best = int(j)
    return best
