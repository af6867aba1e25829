"""Interval-union kernels for sets of the form U [a/q - w/q^2, a/q + w/q^2].

The half-width numerator is the rational w = an/ad.  All overlap and ordering
decisions are exact: a float test settles clear cases and an int64
cross-multiplication settles the rest.  The exact branch only runs when the
two centres are within a few interval widths of each other, which keeps the
products far below 2^63 (callers check the bound).
"""

from __future__ import annotations

import numpy as np

from .._backend import njit

_MARGIN = 1e-9


@njit
def meets(au, qu, av, qv, an, ad):
    """True iff the closed intervals around au/qu and av/qv intersect."""
    w = an / ad
    d = abs(au / qu - av / qv) - w * (1.0 / (qu * qu) + 1.0 / (qv * qv))
    if d > _MARGIN:
        return False
    if d < -_MARGIN:
        return True
    D = abs(au * qv - av * qu)
    return D * qu * qv * ad <= an * (qu * qu + qv * qv)


@njit
def lo_lt(au, qu, av, qv, an, ad):
    """Left end of interval u strictly left of that of v."""
    w = an / ad
    d = (au / qu - w / (qu * qu)) - (av / qv - w / (qv * qv))
    if d > _MARGIN:
        return False
    if d < -_MARGIN:
        return True
    D = au * qv - av * qu
    return D * qu * qv * ad < an * (qv * qv - qu * qu)


@njit
def hi_gt(au, qu, av, qv, an, ad):
    """Right end of interval u strictly right of that of v."""
    w = an / ad
    d = (au / qu + w / (qu * qu)) - (av / qv + w / (qv * qv))
    if d > _MARGIN:
        return True
    if d < -_MARGIN:
        return False
    D = au * qv - av * qu
    return D * qu * qv * ad > an * (qu * qu - qv * qv)


@njit
def left_end_beyond(au, qu, av, qv, an, ad):
    """Left end of interval u strictly right of the right end of v."""
    w = an / ad
    d = (au / qu - w / (qu * qu)) - (av / qv + w / (qv * qv))
    if d > _MARGIN:
        return True
    if d < -_MARGIN:
        return False
    D = au * qv - av * qu
    return D * qu * qv * ad > an * (qu * qu + qv * qv)


@njit
def clusters_nb(a, q, nmin, an, ad):
    """Connected components of the union, for centres sorted ascending.

    Only rows with q >= nmin take part.  Returns (lo_idx, hi_idx): for each
    component, the row owning its left end and the row owning its right end.
    Touching intervals share a component.
    """
    n = a.shape[0]
    slo = np.empty(n, np.int64)
    shi = np.empty(n, np.int64)
    top = -1
    for k in range(n):
        if q[k] < nmin:
            continue
        lo = k
        hi = k
        # a later centre can only reach back over earlier components
        while top >= 0:
            t = shi[top]
            if left_end_beyond(a[lo], q[lo], a[t], q[t], an, ad):
                break
            s = slo[top]
            if lo_lt(a[s], q[s], a[lo], q[lo], an, ad):
                lo = s
            if hi_gt(a[t], q[t], a[hi], q[hi], an, ad):
                hi = t
            top -= 1
        top += 1
        slo[top] = lo
        shi[top] = hi
    return slo[: top + 1].copy(), shi[: top + 1].copy()


def clusters_np(a, q, nmin, an, ad):
    # the stack merge is sequential; run it uncompiled
    return clusters_nb.py_func(a, q, nmin, an, ad)


@njit
def overlap_depth_nb(a, q, nmin, an, ad):
    """Largest index gap j with intersecting intervals among rows q >= nmin."""
    n = a.shape[0]
    w = an / ad
    reach = 2.0 * w / (nmin * nmin) + _MARGIN
    depth = 0
    for i in range(n):
        if q[i] < nmin:
            continue
        ci = a[i] / q[i]
        j = i + 1
        while j < n and a[j] / q[j] - ci <= reach:
            if q[j] >= nmin and j - i > depth and meets(a[i], q[i], a[j], q[j], an, ad):
                depth = j - i
            j += 1
    return depth


def overlap_depth_np(a, q, nmin, an, ad):
    n = a.shape[0]
    reach = 2.0 * (an / ad) / (nmin * nmin) + _MARGIN
    c = a / q
    ok = q >= nmin
    depth = 0
    s = 1
    while s < n:
        near = (c[s:] - c[:-s]) <= reach
        if not near.any():
            break
        rows = np.flatnonzero(near & ok[s:] & ok[:-s])
        if rows.size:
            au, qu = a[rows], q[rows]
            av, qv = a[rows + s], q[rows + s]
            D = np.abs(au * qv - av * qu)
            hit = D * qu * qv * ad <= an * (qu * qu + qv * qv)
            if hit.any():
                depth = s
        s += 1
    return depth


@njit
def accumulate_nb(a, q, lo_idx, hi_idx, an, ad, L, U, qmax):
    """Integer accumulators for the measure of the union inside [L, U].

    A component spanning rows u (left end) and v (right end) has length
    a_v/q_v - a_u/q_u + w/q_u^2 + w/q_v^2; those terms are tallied per
    denominator in S (numerators of a/q) and W (multiples of w/q^2).
    Components that straddle L or U are returned for exact clipping.
    """
    w = an / ad
    W = np.zeros(qmax + 1, np.int64)
    S = np.zeros(qmax + 1, np.int64)
    straddle = np.empty(lo_idx.shape[0], np.int64)
    ns = 0
    for k in range(lo_idx.shape[0]):
        u = lo_idx[k]
        v = hi_idx[k]
        lo = a[u] / q[u] - w / (q[u] * q[u])
        hi = a[v] / q[v] + w / (q[v] * q[v])
        if hi < L - _MARGIN or lo > U + _MARGIN:
            continue
        if lo >= L + _MARGIN and hi <= U - _MARGIN:
            W[q[u]] += 1
            W[q[v]] += 1
            S[q[v]] += a[v]
            S[q[u]] -= a[u]
        else:
            straddle[ns] = k
            ns += 1
    return W, S, straddle[:ns].copy()


def accumulate_np(a, q, lo_idx, hi_idx, an, ad, L, U, qmax):
    w = an / ad
    au, qu, av, qv = a[lo_idx], q[lo_idx], a[hi_idx], q[hi_idx]
    lo = au / qu - w / (qu * qu)
    hi = av / qv + w / (qv * qv)
    outside = (hi < L - _MARGIN) | (lo > U + _MARGIN)
    inside = (lo >= L + _MARGIN) & (hi <= U - _MARGIN)
    straddle = np.flatnonzero(~outside & ~inside)
    W = np.zeros(qmax + 1, np.int64)
    S = np.zeros(qmax + 1, np.int64)
    np.add.at(W, qu[inside], 1)
    np.add.at(W, qv[inside], 1)
    np.add.at(S, qv[inside], av[inside])
    np.add.at(S, qu[inside], -au[inside])
    return W, S, straddle
