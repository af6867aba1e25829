"""Farey sequences via the next-term recurrence, and the BCZ map.

Fractions are :class:`fractions.Fraction`.  A :class:`FareyPairState` is a
consecutive pair a/q < a1/q1 of F(Q); :func:`farey_next` steps it with
K = floor((Q + q) / q1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

INT64_MAX = (1 << 63) - 1
# kernels hold q, a and products like a * hi_den in int64
MAX_ORDER = (1 << 31) - 1


class DomainError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class FareyPairState:
    a: int
    q: int
    a1: int
    q1: int
    Q: int

    @property
    def current(self) -> Fraction:
        return Fraction(self.a, self.q)

    @property
    def successor(self) -> Fraction:
        return Fraction(self.a1, self.q1)

    def is_valid(self) -> bool:
        return (
            self.a1 * self.q - self.a * self.q1 == 1
            and 1 <= self.q <= self.Q
            and 1 <= self.q1 <= self.Q
            and self.q + self.q1 > self.Q
        )


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # decimal literal semantics: 0.3 means 3/10, not the binary double
        return Fraction(repr(x))
    return Fraction(x)


def _check_order(Q: int) -> None:
    if Q < 1:
        raise DomainError(f"order Q must be >= 1, got {Q}")
    if Q > MAX_ORDER:
        raise OverflowError(f"order Q={Q} exceeds the 64-bit kernel bound {MAX_ORDER}")


def successor_of(a: int, q: int, Q: int) -> tuple[int, int]:
    """Successor of the F(Q) element a/q, past 1/1 included."""
    if q == 1:
        # 0/1 -> 1/Q and 1/1 -> (Q+1)/Q
        return a * Q + 1, Q
    inv = pow(a, -1, q)
    r = (-inv) % q  # a1*q - a*q1 = 1 forces q1 = -a^{-1} mod q
    q1 = r + q * ((Q - r) // q)
    return (1 + a * q1) // q, q1


def ceil_in_farey(x: Fraction, Q: int) -> Fraction:
    """Smallest element of F(Q) that is >= x, by Stern-Brocot descent."""
    if x.denominator <= Q:
        return x
    p, r = x.numerator, x.denominator
    ln, ld, un, ud = 0, 1, 1, 1
    while ld + ud <= Q:
        mn, md = ln + un, ld + ud
        if p * md < mn * r:
            # x left of the mediant: pull the upper end down k times at once
            k = (un * r - p * ud - 1) // (p * ld - ln * r)
            k = max(1, min(k, (Q - ud) // ld))
            un, ud = un + k * ln, ud + k * ld
        else:
            k = (p * ld - ln * r - 1) // (un * r - p * ud)
            k = max(1, min(k, (Q - ld) // ud))
            ln, ld = ln + k * un, ld + k * ud
    return Fraction(un, ud)


def farey_start(Q: int, x0=0) -> FareyPairState:
    _check_order(Q)
    x = as_fraction(x0)
    if not 0 <= x <= 1:
        raise DomainError(f"start point {x} outside [0, 1]")
    f = ceil_in_farey(x, Q)
    a, q = f.numerator, f.denominator
    a1, q1 = successor_of(a, q, Q)
    return FareyPairState(a, q, a1, q1, Q)


def farey_next(s: FareyPairState) -> FareyPairState:
    K = (s.Q + s.q) // s.q1
    return FareyPairState(s.a1, s.q1, K * s.a1 - s.a, K * s.q1 - s.q, s.Q)


def iter_farey(Q: int, lo=0, hi=1) -> Iterator[FareyPairState]:
    """States whose current fraction runs over F(Q) in [lo, hi]."""
    hi = as_fraction(hi)
    s = farey_start(Q, lo)
    while s.a * hi.denominator <= hi.numerator * s.q:
        yield s
        s = farey_next(s)


def in_omega(a, b) -> bool:
    return 0 < a <= 1 and 0 < b <= 1 and a + b > 1


def bcz(a, b):
    """BCZ map T(a, b) = (b, floor((1 + a)/b) b - a).

    Works on floats, Fractions (exact floor) and numpy arrays.
    """
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        K = np.floor((1 + a) / b)
    else:
        K = math.floor((1 + a) / b)
    return b, K * b - a


def bcz_exact(q_i: int, q_next: int, Q: int) -> tuple[int, int]:
    """BCZ step on Farey points (q_i/Q, q_next/Q), in integers."""
    for v in (q_i, q_next, Q):
        if abs(v) > MAX_ORDER:
            raise OverflowError(f"{v} exceeds the 64-bit kernel bound")
    K = (Q + q_i) // q_next
    return q_next, K * q_next - q_i


def totients(n: int) -> np.ndarray:
    """Euler phi(0..n) by a prime sieve."""
    phi = np.arange(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if phi[p] == p:  # untouched so far, hence prime
            phi[p::p] -= phi[p::p] // p
    return phi


def farey_size(Q: int) -> int:
    """#F(Q) = 1 + sum_{q <= Q} phi(q)."""
    return 1 + int(totients(Q)[1:].sum())
