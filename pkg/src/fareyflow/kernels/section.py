"""Return-map kernels on the lifted section.

Cosets travel as four residues (x11, x12, x21, x22) mod m.  One r' step sends
(a, b, X) to (b, K b - a, [[K, 1], [-1, 0]] X) with K = floor((1 + a) / b).

Status codes: 0 ok, 1 step budget exhausted, 2 rejected because (1 + a) / b
came within ``tol`` (relative) of an integer.
"""

from __future__ import annotations

import numpy as np

from .._backend import njit
from .farey import coset_code, in_codes

OK, TRUNCATED, REJECTED = 0, 1, 2


@njit
def _first_return(a, b, x11, x12, x21, x22, m, codes, max_steps, tol):
    t = 0.0
    s = 0
    status = 0
    while True:
        if s >= max_steps:
            status = 1
            break
        ratio = (1.0 + a) / b
        K = np.floor(ratio)
        if ratio - K < tol * ratio or K + 1.0 - ratio < tol * ratio:
            status = 2
            break
        t += 1.0 / (a * b)
        km = np.int64(K) % m
        a, b = b, K * b - a
        x11, x12, x21, x22 = (km * x11 + x21) % m, (km * x12 + x22) % m, (-x11) % m, (-x12) % m
        s += 1
        if in_codes(coset_code(x11, x12, x21, x22, m), codes):
            break
    return t, s, a, b, x11, x12, x21, x22, status


@njit
def mc_return_nb(a0, b0, cidx, mats, codes, m, max_steps, tol):
    n = a0.shape[0]
    times = np.empty(n)
    steps = np.empty(n, np.int64)
    status = np.empty(n, np.int8)
    for i in range(n):
        c = cidx[i]
        t, s, _, _, _, _, _, _, st = _first_return(
            a0[i], b0[i], mats[c, 0], mats[c, 1], mats[c, 2], mats[c, 3],
            m, codes, max_steps, tol)
        times[i] = t
        steps[i] = s
        status[i] = st
    return times, steps, status


def _members(x11, x12, x21, x22, m, codes):
    code = ((x11 * m + x12) * m + x21) * m + x22
    pos = np.minimum(np.searchsorted(codes, code), codes.size - 1)
    return codes[pos] == code


def mc_return_np(a0, b0, cidx, mats, codes, m, max_steps, tol):
    cos = mats[cidx].astype(np.int64)
    times, steps, _, _, _, status = _vector_return(
        a0.astype(np.float64), b0.astype(np.float64), cos, m, codes, max_steps, tol)
    return times, steps, status


# ------------------------------------------------------------ exact twin


@njit
def _gcd(x, y):
    while y:
        x, y = y, x % y
    return x


@njit
def exact_return_nb(A, B, cos, Q, m, codes, max_steps):
    """First return from W-points (A/Q, B/Q) in exact integer arithmetic.

    The return time is kept as a reduced fraction tn/td of the sum of
    Q^2 / (A_k B_k) over the visited r'-orbit.
    """
    n = A.shape[0]
    tn = np.zeros(n, np.int64)
    td = np.ones(n, np.int64)
    steps = np.zeros(n, np.int64)
    landA = np.empty(n, np.int64)
    landB = np.empty(n, np.int64)
    land = np.empty((n, 4), np.int64)
    QQ = Q * Q
    for i in range(n):
        x, y = A[i], B[i]
        x11, x12, x21, x22 = cos[i, 0], cos[i, 1], cos[i, 2], cos[i, 3]
        num, den = 0, 1
        s = 0
        while s < max_steps:
            K = (Q + x) // y
            r = x * y
            num = num * r + QQ * den
            den = den * r
            g = _gcd(num, den)
            num //= g
            den //= g
            km = K % m
            x, y = y, K * y - x
            x11, x12, x21, x22 = (km * x11 + x21) % m, (km * x12 + x22) % m, (-x11) % m, (-x12) % m
            s += 1
            if in_codes(coset_code(x11, x12, x21, x22, m), codes):
                break
        tn[i], td[i], steps[i] = num, den, s
        landA[i], landB[i] = x, y
        land[i, 0], land[i, 1], land[i, 2], land[i, 3] = x11, x12, x21, x22
    return tn, td, steps, landA, landB, land


def exact_return_np(A, B, cos, Q, m, codes, max_steps):
    n = A.shape[0]
    x = A.astype(np.int64).copy()
    y = B.astype(np.int64).copy()
    c = cos.astype(np.int64).copy()
    tn = np.zeros(n, np.int64)
    td = np.ones(n, np.int64)
    steps = np.zeros(n, np.int64)
    QQ = Q * Q
    active = np.arange(n)
    while active.size:
        active = active[steps[active] < max_steps]
        if not active.size:
            break
        xa, ya = x[active], y[active]
        K = (Q + xa) // ya
        r = xa * ya
        num = tn[active] * r + QQ * td[active]
        den = td[active] * r
        g = np.gcd(num, den)
        tn[active], td[active] = num // g, den // g
        km = K % m
        x[active], y[active] = ya, K * ya - xa
        y11, y12 = c[active, 0], c[active, 1]
        c[active, 0] = (km * y11 + c[active, 2]) % m
        c[active, 1] = (km * y12 + c[active, 3]) % m
        c[active, 2] = (-y11) % m
        c[active, 3] = (-y12) % m
        steps[active] += 1
        back = _members(c[active, 0], c[active, 1], c[active, 2], c[active, 3], m, codes)
        active = active[~back]
    return tn, td, steps, x, y, c


# ------------------------------------------------------ EST section estimator


@njit
def _subset_sum(acoord, T, K, t, alpha):
    total = 0.0
    js = np.empty(K + 1, np.int64)
    for mask in range(1 << K):
        r = 0
        js[0] = 0
        for bit in range(K):
            if mask >> bit & 1:
                r += 1
                js[r] = bit + 1
        inside = True
        for s in range(r + 1):
            if acoord[js[s]] < t:
                inside = False
                break
        if not inside:
            continue
        f = np.inf
        for s in range(r + 1):
            u = js[s]
            for s2 in range(s, r + 1):
                v = js[s2]
                val = alpha * (1.0 / acoord[u] ** 2 + 1.0 / acoord[v] ** 2) - (T[v] - T[u])
                if val < f:
                    f = val
        if f > 0.0:
            total += -f if r % 2 else f
    return total


@njit
def est_section_nb(a0, b0, cidx, mats, codes, m, K, t, alpha, max_steps, tol):
    n = a0.shape[0]
    out = np.zeros(n)
    status = np.zeros(n, np.int8)
    acoord = np.empty(K + 1)
    T = np.zeros(K + 1)
    for i in range(n):
        if a0[i] < t:
            continue
        a, b = a0[i], b0[i]
        c = cidx[i]
        x11, x12, x21, x22 = mats[c, 0], mats[c, 1], mats[c, 2], mats[c, 3]
        acoord[0] = a
        T[0] = 0.0
        bad = 0
        for j in range(1, K + 1):
            dt, _, a, b, x11, x12, x21, x22, st = _first_return(
                a, b, x11, x12, x21, x22, m, codes, max_steps, tol)
            if st != 0:
                bad = st
                break
            acoord[j] = a
            T[j] = T[j - 1] + dt
        if bad:
            status[i] = bad
            continue
        out[i] = _subset_sum(acoord, T, K, t, alpha)
    return out, status


def est_section_np(a0, b0, cidx, mats, codes, m, K, t, alpha, max_steps, tol):
    n = a0.shape[0]
    out = np.zeros(n)
    status = np.zeros(n, np.int8)
    live = np.flatnonzero(a0 >= t)
    acoord = np.empty((live.size, K + 1))
    T = np.zeros((live.size, K + 1))
    acoord[:, 0] = a0[live]
    a, b = a0[live].copy(), b0[live].copy()
    cos = mats[cidx[live]].astype(np.int64)
    ok = np.ones(live.size, bool)
    for j in range(1, K + 1):
        res = _vector_return(a, b, cos, m, codes, max_steps, tol)
        dt, _, a, b, cos, st = res
        bad = st != OK
        status[live[bad & ok]] = st[bad & ok]
        ok &= ~bad
        acoord[:, j] = a
        T[:, j] = T[:, j - 1] + dt
    acoord, T, rows = acoord[ok], T[ok], live[ok]
    total = np.zeros(rows.size)
    for mask in range(1 << K):
        js = [0] + [bit + 1 for bit in range(K) if mask >> bit & 1]
        r = len(js) - 1
        inside = np.all(acoord[:, js] >= t, axis=1)
        f = np.full(rows.size, np.inf)
        for s, u in enumerate(js):
            for v in js[s:]:
                val = alpha * (1.0 / acoord[:, u] ** 2 + 1.0 / acoord[:, v] ** 2) - (T[:, v] - T[:, u])
                f = np.minimum(f, val)
        f = np.where(inside & (f > 0.0), f, 0.0)
        total += -f if r % 2 else f
    out[rows] = total
    return out, status


def _vector_return(a, b, cos, m, codes, max_steps, tol):
    """Vectorised single first return for every row; returns the landing."""
    n = a.shape[0]
    a, b, cos = a.copy(), b.copy(), cos.copy()
    times = np.zeros(n)
    steps = np.zeros(n, np.int64)
    status = np.zeros(n, np.int8)
    active = np.arange(n)
    while active.size:
        over = steps[active] >= max_steps
        status[active[over]] = TRUNCATED
        active = active[~over]
        if not active.size:
            break
        aa, bb = a[active], b[active]
        ratio = (1.0 + aa) / bb
        K = np.floor(ratio)
        near = (ratio - K < tol * ratio) | (K + 1.0 - ratio < tol * ratio)
        status[active[near]] = REJECTED
        keep = ~near
        active, aa, bb, K = active[keep], aa[keep], bb[keep], K[keep]
        times[active] += 1.0 / (aa * bb)
        km = K.astype(np.int64) % m
        a[active], b[active] = bb, K * bb - aa
        y11, y12 = cos[active, 0], cos[active, 1]
        cos[active, 0] = (km * y11 + cos[active, 2]) % m
        cos[active, 1] = (km * y12 + cos[active, 3]) % m
        cos[active, 2] = (-y11) % m
        cos[active, 3] = (-y12) % m
        steps[active] += 1
        back = _members(cos[active, 0], cos[active, 1], cos[active, 2], cos[active, 3], m, codes)
        active = active[~back]
    return times, steps, a, b, cos, status
