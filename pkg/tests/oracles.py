"""Independent brute-force references.  Nothing here imports fareyflow."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

import numpy as np
from scipy import integrate


def farey_brute(Q: int) -> list[Fraction]:
    return sorted({Fraction(a, q) for q in range(1, Q + 1) for a in range(q + 1)})


def farey_arrays(Q: int) -> tuple[np.ndarray, np.ndarray]:
    """F(Q) as (numerators, denominators), sorted exactly."""
    fr = farey_brute(Q)
    return (np.array([f.numerator for f in fr], np.int64),
            np.array([f.denominator for f in fr], np.int64))


def phi_naive(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def sl2_count(m: int) -> int:
    return sum(1 for e in product(range(m), repeat=4) if (e[0] * e[3] - e[1] * e[2]) % m == 1 % m)


def subset_brute(Q: int, m: int, A) -> list[Fraction]:
    """Fractions of F(Q) whose (numerator, denominator) mod m lies in A."""
    A = {(x % m, y % m) for x, y in A}
    return [f for f in farey_brute(Q) if (f.numerator % m, f.denominator % m) in A]


def union_measure(intervals) -> Fraction:
    """Lebesgue measure of a union of closed Fraction intervals."""
    total = Fraction(0)
    cur = None
    for lo, hi in sorted(intervals):
        if cur is None or lo > cur[1]:
            if cur is not None:
                total += cur[1] - cur[0]
            cur = [lo, hi]
        else:
            cur[1] = max(cur[1], hi)
    if cur is not None:
        total += cur[1] - cur[0]
    return total


def est_brute(n, alpha, c, m=1, A=None, I=(0, 1)) -> Fraction:
    alpha, c = Fraction(alpha), Fraction(c)
    Q = math.floor(n * c)
    A = A if A is not None else [(x, y) for x in range(m) for y in range(m)]
    L, U = max(Fraction(I[0]), Fraction(0)), min(Fraction(I[1]), Fraction(1))
    ivs = []
    for f in subset_brute(Q, m, A):
        q = f.denominator
        if q < n:
            continue
        lo, hi = max(f - alpha / q**2, L), min(f + alpha / q**2, U)
        if lo <= hi:
            ivs.append((lo, hi))
    return union_measure(ivs)


def depth_brute(n, alpha, c, m=1, A=None) -> int:
    alpha, c = Fraction(alpha), Fraction(c)
    Q = math.floor(n * c)
    A = A if A is not None else [(x, y) for x in range(m) for y in range(m)]
    fr = subset_brute(Q, m, A)
    best = 0
    for i, f in enumerate(fr):
        if f.denominator < n:
            continue
        for j in range(i + 1, len(fr)):
            g = fr[j]
            if g - f > 2 * alpha / n**2:
                break
            if g.denominator >= n and g - f <= alpha / f.denominator**2 + alpha / g.denominator**2:
                best = max(best, j - i)
    return best


def roof_cdf(c: float) -> float:
    """P(1/(ab) <= c) for (a, b) uniform on the Farey triangle (density 2)."""
    if c <= 1:
        return 0.0

    def height(a):
        return max(0.0, 1.0 - max(1.0 - a, 1.0 / (c * a)))

    val, _ = integrate.quad(height, 1.0 / c, 1.0, limit=200)
    return 2.0 * val
